import numpy as np
import pytest

from rphist.distributed import (
    Shard,
    TaggedDataset,
    apply_splits,
    assemble_srp,
    backtrack,
    build_threshold_tree,
    cells_to_split,
    count_by_cell,
    prune,
    reconstruct_path,
    truncate_path,
)
from rphist.errors import DepthExhausted
from rphist.geometry import Box, bounding_box
from rphist.pqmc import PqmcConfig, SEB_PRIORITY, SPC_PRIORITY, run_pqmc
from rphist.srp import ingest
from rphist.tree import RPTree

from conftest import random_points, tie_free_instance, unit_box

CFG = PqmcConfig(tie_break="lowest_label")


def fig7_dataset(shard_count=2) -> TaggedDataset:
    """Six points in the three-cell paving {2, 6, 7}: three tagged A=2,
    two tagged B=6, one tagged C=7."""
    labels = np.array([2, 2, 6, 7, 6, 2], dtype=np.int64)
    pts = np.array([
        [0.1, 0.2], [0.3, 0.8], [0.6, 0.1],
        [0.7, 0.9], [0.9, 0.3], [0.2, 0.5],
    ])
    shards = []
    for rows in np.array_split(np.arange(6), shard_count):
        shards.append(Shard(labels[rows], pts[rows]))
    return TaggedDataset(tuple(shards), unit_box(2))


def test_count_by_cell_fig7():
    assert count_by_cell(fig7_dataset()) == {2: 3, 6: 2, 7: 1}


def test_count_by_cell_empty():
    ds = TaggedDataset.from_points(np.empty((0, 2)), unit_box(2))
    assert count_by_cell(ds) == {}


def test_count_by_cell_shard_invariant():
    for s in (1, 3, 6):
        assert count_by_cell(fig7_dataset(s)) == {2: 3, 6: 2, 7: 1}


def test_cells_to_split_threshold_strict():
    table = {1: 10}
    assert cells_to_split(table, unit_box(2), SEB_PRIORITY, 5.0, CFG) == {1}
    assert cells_to_split(table, unit_box(2), SEB_PRIORITY, 10.0, CFG) == set()


def test_cells_to_split_depth_capped():
    table = {4: 10, 5: 10}  # depth 2
    cfg = PqmcConfig(max_depth=2)
    assert cells_to_split(table, unit_box(2), SEB_PRIORITY, 1.0, cfg) == set()


def test_apply_splits_empty_set_is_identity():
    ds = fig7_dataset()
    assert apply_splits(ds, set()) is ds


def test_apply_splits_retags_only_split_cells():
    ds = fig7_dataset(1)
    out = apply_splits(ds, {2})
    labels = list(out.shards[0].labels)
    # cell 2 is [0, 0.5) x [0, 1], split on y at 0.5: below -> 4, at/above -> 5
    assert labels == [4, 5, 6, 7, 6, 5]


def test_apply_splits_point_on_hyperplane_goes_right():
    pts = np.array([[0.5, 0.25], [0.49, 0.25]])
    ds = TaggedDataset.from_points(pts, unit_box(2))
    out = apply_splits(ds, {1})
    assert list(out.shards[0].labels) == [3, 2]


def test_prune_moves_counts():
    ds = fig7_dataset()
    table = count_by_cell(ds)
    kept, passed = prune(ds, table, 10.0, SEB_PRIORITY, {})
    assert kept.total_points() == 0
    assert passed == {2: 3, 6: 2, 7: 1}
    same, passed2 = prune(ds, table, 0.5, SEB_PRIORITY, {})
    assert passed2 == {}
    assert same.total_points() == 6


def test_build_trivial_when_threshold_at_n():
    rng = np.random.default_rng(32)
    pts = rng.uniform(0, 1, size=(20, 2))
    res = build_threshold_tree(pts, unit_box(2), SEB_PRIORITY, 20.0, CFG)
    assert res.iterations == 0
    assert res.final_srp.leaf_count == 1
    assert res.final_srp.counts[1] == 20


def test_build_fig7_style_matches_sequential():
    pts = fig7_dataset(1).shards[0].points
    res = build_threshold_tree(pts, unit_box(2), SEB_PRIORITY, 2.0, CFG)
    s0 = ingest(RPTree(unit_box(2)), pts)
    seq = run_pqmc(s0, pts, SEB_PRIORITY, PqmcConfig(max_psi=2.0, tie_break="lowest_label"))
    assert res.final_srp == seq.final
    for v in res.final_srp.tree.leaves():
        assert res.final_srp.counts[v] <= 2 or res.final_srp.counts[v] == 0


def test_build_threshold_equals_sequential_random():
    found = 0
    seed = 0
    while found < 8:
        inst = tie_free_instance(seed)
        seed += 1
        if inst is None:
            continue
        found += 1
        pts, box, threshold, seq = inst
        res = build_threshold_tree(pts, box, SEB_PRIORITY, threshold, CFG,
                                   shard_count=3)
        assert res.final_srp == seq.final
        rev = list(reversed(backtrack(res)))
        states = seq.states()
        assert len(rev) == len(states)
        for a, b in zip(rev, states):
            assert a == b


def test_build_shard_invariance_small():
    rng = np.random.default_rng(33)
    pts = random_points(rng, 2000, 2)
    box = bounding_box(pts)
    results = [
        build_threshold_tree(pts, box, SEB_PRIORITY, 50.0, CFG, shard_count=s)
        for s in (1, 2, 4, 8)
    ]
    for r in results[1:]:
        assert r.final_srp == results[0].final_srp
        assert r.passed_counts == results[0].passed_counts
        assert r.iterations == results[0].iterations


def test_build_without_prune_same_result():
    rng = np.random.default_rng(34)
    pts = random_points(rng, 1500, 2)
    box = bounding_box(pts)
    a = build_threshold_tree(pts, box, SEB_PRIORITY, 40.0, CFG, use_prune=True)
    b = build_threshold_tree(pts, box, SEB_PRIORITY, 40.0, CFG, use_prune=False)
    assert a.final_srp == b.final_srp
    assert b.passed_counts == {}


def test_build_conservation_every_iteration():
    rng = np.random.default_rng(35)
    pts = random_points(rng, 3000, 3)
    box = bounding_box(pts)
    res = build_threshold_tree(pts, box, SEB_PRIORITY, 25.0, CFG, shard_count=4)
    assert res.stats, "expected at least one iteration"
    for st in res.stats:
        assert st.working_points + st.passed_points == len(pts)
        assert st.merged_table_keys == st.nonempty_cells


def test_build_depth_exhausted():
    rng = np.random.default_rng(36)
    pts = rng.uniform(0, 1, size=(50, 2))
    cfg = PqmcConfig(max_depth=2)
    with pytest.raises(DepthExhausted):
        build_threshold_tree(pts, unit_box(2), SEB_PRIORITY, 2.0, cfg)


def test_build_big_labels_escape_hatch():
    # two points closer than 2**-64 apart force splits past 64-bit labels
    pts = np.array([[0.0, 0.0], [2.0**-70, 0.0]])
    box = Box.from_bounds([0.0, -0.5], [1.0, 0.5])
    res = build_threshold_tree(pts, box, SEB_PRIORITY, 1.0, CFG)
    leaves = res.final_srp.tree.leaves()
    assert max(leaves) > 2**64
    nonempty = [v for v in leaves if res.final_srp.counts[v] == 1]
    assert len(nonempty) == 2
    s0 = ingest(RPTree(box), pts)
    seq = run_pqmc(s0, pts, SEB_PRIORITY,
                   PqmcConfig(max_psi=1.0, tie_break="lowest_label"))
    assert res.final_srp == seq.final


def test_prune_on_object_dtype_labels():
    deep = 2**100 + 5
    labels = np.array([deep, deep, 3], dtype=object)
    pts = np.zeros((3, 2))
    ds = TaggedDataset((Shard(labels, pts),), unit_box(2))
    table = count_by_cell(ds)
    assert table == {deep: 2, 3: 1}
    kept, passed = prune(ds, table, 1.0, SEB_PRIORITY, {})
    assert passed == {3: 1}
    assert list(kept.shards[0].labels) == [deep, deep]


def test_order_invariance_random_schedulers():
    rng = np.random.default_rng(37)
    pts = random_points(rng, 800, 2)
    box = bounding_box(pts)
    reference = build_threshold_tree(pts, box, SEB_PRIORITY, 30.0, CFG)
    for trial in range(6):
        order_rng = np.random.default_rng(1000 + trial)
        ds = TaggedDataset.from_points(pts, box, shard_count=2)
        while True:
            table = count_by_cell(ds)
            eligible = cells_to_split(table, box, SEB_PRIORITY, 30.0, CFG)
            if not eligible:
                break
            pool = sorted(eligible)
            k = int(order_rng.integers(1, len(pool) + 1))
            chosen = {pool[i] for i in order_rng.choice(len(pool), size=k, replace=False)}
            ds = apply_splits(ds, chosen)
        final = assemble_srp(box, count_by_cell(ds))
        assert final == reference.final_srp


def test_backtrack_root_only():
    pts = np.array([[0.5, 0.5]])
    res = build_threshold_tree(pts, unit_box(2), SEB_PRIORITY, 5.0, CFG)
    seq = backtrack(res)
    assert len(seq) == 1
    assert seq[0] == res.final_srp


def test_backtrack_merge_order_ascending_parent_priority():
    inst = None
    seed = 0
    while inst is None:
        inst = tie_free_instance(seed)
        seed += 1
    pts, box, threshold, _ = inst
    res = build_threshold_tree(pts, box, SEB_PRIORITY, threshold, CFG)
    states = backtrack(res)
    merged_counts = []
    for before, after in zip(states, states[1:]):
        gone = before.tree.nodes - after.tree.nodes
        p = min(gone) // 2
        merged_counts.append(before.counts[p])
    assert merged_counts == sorted(merged_counts)


def test_reconstruct_path_from_launch_state():
    # tributary from a carved state: parallel rebuild equals sequential
    found = 0
    seed = 100
    while found < 3:
        inst = tie_free_instance(seed)
        seed += 1
        if inst is None:
            continue
        pts, box, threshold, _ = inst
        s0 = ingest(RPTree(box), pts)
        carve = run_pqmc(s0, pts, SPC_PRIORITY,
                         PqmcConfig(max_leaves=4, tie_break="lowest_label"))
        launch = carve.final
        seq = run_pqmc(launch, pts, SEB_PRIORITY,
                       PqmcConfig(max_psi=threshold, tie_break="lowest_label"))
        if seq.had_ties:
            continue
        found += 1
        res = build_threshold_tree(pts, box, SEB_PRIORITY, threshold, CFG,
                                   initial_tree=launch.tree, shard_count=2)
        assert res.final_srp == seq.final
        par = reconstruct_path(res, initial=launch)
        assert par.records == seq.records
        assert par.initial == seq.initial


def test_reconstruct_never_merges_into_the_launch_state():
    # adversarial layout: the launch state contains a cherry whose parent
    # count (3) is far below every count the tributary splits (>= 12), so
    # an unrestricted least-priority backtrack would merge that cherry
    # first and leave the tributary's path entirely
    rng = np.random.default_rng(5)  # seed picked to keep all counts distinct
    left = rng.uniform([0.0, 0.0], [0.24, 0.49], size=(3, 2))
    right = rng.uniform([0.5, 0.0], [1.0, 1.0], size=(100, 2))
    pts = np.vstack([left, right])
    box = unit_box(2)
    launch_tree = RPTree(box).split(1).split(2)  # cherry at node 2
    launch = ingest(launch_tree, pts)
    assert launch.counts[2] == 3 and launch.counts[3] == 100

    seq = run_pqmc(launch, pts, SEB_PRIORITY,
                   PqmcConfig(max_psi=10.0, tie_break="lowest_label"))
    assert not seq.had_ties, "layout should give distinct counts"
    assert min(cl + cr for cl, cr in
               ((r.left_count, r.right_count) for r in seq.records)) > 3

    res = build_threshold_tree(pts, box, SEB_PRIORITY, 10.0, CFG,
                               initial_tree=launch_tree, shard_count=2)
    par = reconstruct_path(res, initial=launch)
    assert par.records == seq.records
    assert par.final == seq.final


def test_truncate_path():
    found = None
    seed = 0
    while found is None:
        found = tie_free_instance(seed)
        seed += 1
    pts, box, threshold, seq = found
    cut = truncate_path(seq, 3, SEB_PRIORITY, threshold, CFG)
    assert cut.final.leaf_count == min(3, seq.final.leaf_count)
    if seq.final.leaf_count > 3:
        assert cut.stop_reason == "max_leaves"
        assert not cut.success  # over-threshold splittable leaves remain
    whole = truncate_path(seq, None, SEB_PRIORITY, threshold, CFG)
    assert whole is seq
