"""Regular paving trees as prefix-closed sets of integer node labels.

The plane binary tree is addressed by naturals: the root is 1, the left
child of node ``n`` is ``2n`` and the right child ``2n + 1``.  This is a
binary encoding of the root-to-node path (a leading 1 followed by 0 for
left and 1 for right), so ancestors are right shifts and the depth is
the bit length minus one.  Labels are plain Python ints and therefore
unbounded; nothing caps the depth at a machine word.

A tree stores only its label set.  Cell boxes are recomputed from labels
on demand, which keeps memory at O(#nodes) independent of the dimension
and matches the representation used by the distributed builder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotACherry, NotALeaf, NotBisectable, RootHasNoParent
from .geometry import Box, bisect

ROOT = 1


def parent(n: int) -> int:
    """Parent label ``floor(n/2)``; the root has none."""
    if n <= ROOT:
        raise RootHasNoParent("node 1 is the root")
    return n >> 1


def children(n: int) -> tuple[int, int]:
    """Labels ``(2n, 2n+1)`` of the left and right child."""
    return 2 * n, 2 * n + 1


def depth(n: int) -> int:
    """Distance from the root: the index of the most significant bit."""
    if n < ROOT:
        raise ValueError(f"invalid node label {n}")
    return n.bit_length() - 1


def path_bits(n: int):
    """Yield the child-direction bits of a label, most significant first.

    0 means left, 1 means right; the leading 1 of the label is skipped.
    """
    for shift in range(n.bit_length() - 2, -1, -1):
        yield (n >> shift) & 1


def cell_bounds(root_box: Box, n: int) -> tuple[list, list, int, float]:
    """Fast path walk: bounds of the cell of label ``n``.

    Returns ``(lows, highs, split_axis, split_mid)`` where the last two
    describe the bisection of this cell (the first widest coordinate and
    its midpoint).  Works on plain float lists to stay cheap inside the
    builders; use :func:`cell_box` when a full Box is needed.

    Raises
    ------
    NotBisectable
        If some box along the path cannot be split in machine arithmetic.
    """
    lo = [iv.lo for iv in root_box.intervals]
    hi = [iv.hi for iv in root_box.intervals]
    axis, mid = _split_plane(lo, hi)
    for bit in path_bits(n):
        if not (lo[axis] < mid < hi[axis]):
            raise NotBisectable(f"cannot bisect along the path to {n}")
        if bit:
            lo[axis] = mid
        else:
            hi[axis] = mid
        axis, mid = _split_plane(lo, hi)
    return lo, hi, axis, mid


def _split_plane(lo, hi):
    axis, best = 0, hi[0] - lo[0]
    for i in range(1, len(lo)):
        w = hi[i] - lo[i]
        if w > best:
            axis, best = i, w
    a, b = lo[axis], hi[axis]
    return axis, a + (b - a) / 2.0


@dataclass(frozen=True)
class RPTree:
    """A regular paving: root box plus a prefix-closed label set.

    Every node has zero or two children present, so the leaf boxes
    partition the root box.  Trees are immutable; :meth:`split` and
    :meth:`merge` return new trees.
    """

    root_box: Box
    nodes: frozenset[int] = field(default_factory=lambda: frozenset({ROOT}))

    def __post_init__(self):
        if ROOT not in self.nodes:
            raise ValueError("tree must contain the root label 1")

    @classmethod
    def from_leaves(cls, root_box: Box, leaves) -> "RPTree":
        """Tree whose leaf set is ``leaves``; ancestors are filled in.

        Validates that the labels actually form a paving (each node has
        zero or two children present).
        """
        leaves = [int(leaf) for leaf in leaves]
        nodes = set()
        for leaf in leaves:
            n = leaf
            if n < ROOT:
                raise ValueError(f"invalid leaf label {leaf}")
            while n >= ROOT and n not in nodes:
                nodes.add(n)
                n >>= 1
        tree = cls(root_box, frozenset(nodes))
        for n in nodes:
            left, right = 2 * n, 2 * n + 1
            if (left in nodes) != (right in nodes):
                raise ValueError(f"node {n} has exactly one child present")
        bad = set(leaves) - set(tree.leaves())
        if bad:
            raise ValueError(f"labels {sorted(bad)[:5]} are not leaves of the paving")
        return tree

    @property
    def dim(self) -> int:
        return self.root_box.dim

    def __contains__(self, n: int) -> bool:
        return n in self.nodes

    def is_leaf(self, n: int) -> bool:
        return n in self.nodes and 2 * n not in self.nodes

    def leaves(self) -> list[int]:
        """Leaf labels in ascending order (the canonical serialization order)."""
        return sorted(n for n in self.nodes if 2 * n not in self.nodes)

    def internal(self) -> list[int]:
        return sorted(n for n in self.nodes if 2 * n in self.nodes)

    @property
    def leaf_count(self) -> int:
        return sum(1 for n in self.nodes if 2 * n not in self.nodes)

    def cell_box(self, n: int) -> Box:
        """Box of the cell addressed by ``n``, rebuilt from the root box.

        Defined for any label, member of the tree or not; the box is the
        result of bisecting along the bit path of ``n``, taking the left
        child on 0 and the right child on 1.
        """
        return cell_box(self.root_box, n)

    def split(self, n: int) -> "RPTree":
        """New tree with leaf ``n`` split into its two children."""
        if not self.is_leaf(n):
            raise NotALeaf(f"node {n} is not a leaf")
        return RPTree(self.root_box, self.nodes | {2 * n, 2 * n + 1})

    def merge(self, n: int) -> "RPTree":
        """New tree with the cherry at ``n`` collapsed back into a leaf."""
        left, right = 2 * n, 2 * n + 1
        if not (self.is_leaf(left) and self.is_leaf(right)):
            raise NotACherry(f"node {n} is not a cherry")
        return RPTree(self.root_box, self.nodes - {left, right})


def cell_box(root_box: Box, n: int) -> Box:
    """Box of label ``n`` under ``root_box`` (see :meth:`RPTree.cell_box`)."""
    box = root_box
    for bit in path_bits(n):
        left, right = bisect(box)
        box = right if bit else left
    return box
