import numpy as np
import pytest

from rphist.errors import NotACherry, NotALeaf, RootHasNoParent
from rphist.geometry import Interval, contains
from rphist.tree import RPTree, children, depth, parent

from conftest import unit_box


def test_parent():
    assert parent(5) == 2
    assert parent(2) == 1
    with pytest.raises(RootHasNoParent):
        parent(1)


def test_children():
    assert children(1) == (2, 3)
    assert children(2) == (4, 5)
    assert children(5) == (10, 11)


def test_depth():
    assert depth(1) == 0
    assert depth(5) == 2
    assert depth(1024) == 10


def test_label_identities_on_big_labels():
    rng = np.random.default_rng(3)
    labels = [2**64 - 1, 2**64, 2**200 + 12345] + [
        int(rng.integers(1, 2**63)) for _ in range(200)
    ]
    for n in labels:
        assert depth(2 * n) == depth(n) + 1
        left, right = children(n)
        assert parent(left) == n
        assert parent(right) == n


def test_cell_box_examples():
    t = RPTree(unit_box(2))
    assert t.cell_box(1) == unit_box(2)
    b3 = t.cell_box(3)
    assert b3.intervals[0] == Interval(0.5, 1.0)
    assert b3.intervals[1] == Interval(0.0, 1.0)
    b5 = t.cell_box(5)
    assert b5.intervals[0] == Interval(0.0, 0.5, False, True)
    assert b5.intervals[1] == Interval(0.5, 1.0)


def test_split_and_merge_examples():
    t = RPTree(unit_box(2))
    t2 = t.split(1)
    assert t2.nodes == frozenset({1, 2, 3})
    t3 = t2.split(2)
    assert t3.nodes == frozenset({1, 2, 3, 4, 5})
    with pytest.raises(NotALeaf):
        t2.split(4)
    assert t2.merge(1).nodes == frozenset({1})
    assert t3.merge(2) == t2
    with pytest.raises(NotACherry):
        t3.merge(1)


def test_leaves():
    t = RPTree(unit_box(2))
    assert t.leaves() == [1]
    assert t.split(1).leaves() == [2, 3]
    assert t.split(1).split(2).leaves() == [3, 4, 5]


def test_split_then_merge_is_identity_over_random_edits():
    rng = np.random.default_rng(4)
    t = RPTree(unit_box(3))
    for _ in range(200):
        leaves = t.leaves()
        v = int(leaves[rng.integers(len(leaves))])
        t2 = t.split(v)
        assert t2.merge(v) == t
        if rng.random() < 0.7:
            t = t2


def _random_tree(rng, d=2, n_splits=25) -> RPTree:
    t = RPTree(unit_box(d))
    for _ in range(n_splits):
        leaves = t.leaves()
        t = t.split(int(leaves[rng.integers(len(leaves))]))
    return t


def test_leaf_volumes_partition_root():
    rng = np.random.default_rng(5)
    for d in (1, 2, 4):
        t = _random_tree(rng, d=d)
        total = sum(t.cell_box(v).volume for v in t.leaves())
        assert total == pytest.approx(t.root_box.volume, rel=1e-9)


def test_exactly_one_leaf_contains_each_point():
    rng = np.random.default_rng(6)
    t = _random_tree(rng, d=2, n_splits=30)
    boxes = [t.cell_box(v) for v in t.leaves()]
    pts = rng.uniform(0, 1, size=(200, 2))
    # include points exactly on split hyperplanes
    pts = np.vstack([pts, [[0.5, 0.5]], [[0.25, 0.75]], [[0.5, 0.0]]])
    for p in pts:
        hits = sum(contains(b, p) for b in boxes)
        assert hits == 1


def test_from_leaves_roundtrip_and_validation():
    rng = np.random.default_rng(7)
    t = _random_tree(rng)
    assert RPTree.from_leaves(t.root_box, t.leaves()) == t
    with pytest.raises(ValueError):
        RPTree.from_leaves(t.root_box, [2])  # 3 missing
    with pytest.raises(ValueError):
        RPTree.from_leaves(t.root_box, [1, 2, 3])  # 1 is not a leaf


def test_deep_tree_beyond_word_size():
    t = RPTree(unit_box(1))
    label = 1
    for _ in range(80):  # depth 80: labels need more than 64 bits
        t = t.split(label)
        label = 2 * label
    assert depth(label) == 80
    assert label > 2**64
    assert t.cell_box(label).volume == pytest.approx(2.0**-80, rel=1e-9)
