"""Statistical regular pavings: per-node counts and the histogram estimate.

An SRP is a paving whose every node caches the number of data points
that fell into its cell, so the count of an internal node always equals
the sum of its children's counts.  The histogram estimate places the
density ``count / (n * volume)`` on each leaf cell, which is the maximum
likelihood simple function for the partition given by the leaves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptySample,
    PointOutsideRootBox,
)
from .geometry import Box, contains
from .tree import ROOT, RPTree, cell_bounds


def assign_leaves(tree: RPTree, points: np.ndarray) -> dict[int, np.ndarray]:
    """Partition point indices among the leaves of a tree.

    Vectorized recursive descent: at each internal node the points are
    routed by comparing the split coordinate against the midpoint, with
    points exactly on the hyperplane going right.  Points must already
    lie inside the root box.
    """
    points = np.asarray(points, dtype=float)
    out: dict[int, np.ndarray] = {}
    lo = [iv.lo for iv in tree.root_box.intervals]
    hi = [iv.hi for iv in tree.root_box.intervals]
    stack = [(ROOT, lo, hi, np.arange(len(points)))]
    while stack:
        label, lo, hi, idx = stack.pop()
        if tree.is_leaf(label):
            out[label] = idx
            continue
        axis, best = 0, hi[0] - lo[0]
        for i in range(1, len(lo)):
            w = hi[i] - lo[i]
            if w > best:
                axis, best = i, w
        mid = lo[axis] + (hi[axis] - lo[axis]) / 2.0
        right = points[idx, axis] >= mid
        lo_r = list(lo)
        lo_r[axis] = mid
        hi_l = list(hi)
        hi_l[axis] = mid
        stack.append((2 * label, lo, hi_l, idx[~right]))
        stack.append((2 * label + 1, lo_r, hi, idx[right]))
    return out


@dataclass(frozen=True)
class SRP:
    """A regular paving with a sample count cached at every node."""

    tree: RPTree
    counts: dict[int, int]
    n: int

    def count(self, label: int) -> int:
        return self.counts.get(label, 0)

    @property
    def leaf_count(self) -> int:
        return self.tree.leaf_count

    def nonempty_leaves(self) -> list[int]:
        return [v for v in self.tree.leaves() if self.counts.get(v, 0) > 0]

    def validate(self) -> None:
        """Check the parent-sum invariant and the root count."""
        if self.counts.get(ROOT, 0) != self.n:
            raise ValueError("root count does not equal n")
        for v in self.tree.internal():
            if self.counts.get(v, 0) != self.counts.get(2 * v, 0) + self.counts.get(2 * v + 1, 0):
                raise ValueError(f"count of node {v} does not equal its children's sum")

    def __eq__(self, other) -> bool:
        if not isinstance(other, SRP):
            return NotImplemented
        if self.n != other.n or self.tree != other.tree:
            return False
        return all(self.counts.get(v, 0) == other.counts.get(v, 0) for v in self.tree.nodes)

    def __hash__(self):
        return hash((self.tree, self.n))


def root_srp(root_box: Box, n_points: int = 0) -> SRP:
    """The trivial SRP: a root-only tree holding ``n_points`` points."""
    return SRP(RPTree(root_box), {ROOT: int(n_points)}, int(n_points))


def inside_mask(box: Box, points: np.ndarray) -> np.ndarray:
    """Boolean mask of the rows of ``points`` lying inside ``box``."""
    points = np.asarray(points, dtype=float)
    inside = np.ones(len(points), dtype=bool)
    for i, iv in enumerate(box.intervals):
        lo_ok = points[:, i] > iv.lo if iv.lo_open else points[:, i] >= iv.lo
        hi_ok = points[:, i] < iv.hi if iv.hi_open else points[:, i] <= iv.hi
        inside &= lo_ok & hi_ok
    return inside


def ingest(tree: RPTree, points, strict: bool = True) -> SRP:
    """Count points into a tree, filling every node of the SRP.

    A point increments the count of its containing leaf and of every
    ancestor up to the root.  In strict mode a point outside the root
    box raises :class:`PointOutsideRootBox`; otherwise such points are
    silently dropped (callers wanting a report can pre-filter with
    :func:`inside_mask`).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        points = points.reshape(0, tree.dim)
    if points.shape[1] != tree.dim:
        raise DimensionMismatch(
            f"points have dimension {points.shape[1]}, root box {tree.dim}"
        )
    inside = inside_mask(tree.root_box, points)
    dropped = int((~inside).sum())
    if dropped and strict:
        bad = int(np.nonzero(~inside)[0][0])
        raise PointOutsideRootBox(
            f"{dropped} points outside the root box (first at row {bad})"
        )
    kept = points[inside]
    leaf_idx = assign_leaves(tree, kept)
    counts: dict[int, int] = {}
    for leaf, idx in leaf_idx.items():
        c = len(idx)
        node = leaf
        counts[node] = counts.get(node, 0) + c
        while node > ROOT:
            node >>= 1
            counts[node] = counts.get(node, 0) + c
    for v in tree.nodes:
        counts.setdefault(v, 0)
    return SRP(tree, counts, len(kept))


@dataclass(frozen=True)
class HistogramLeaf:
    label: int
    box: Box
    count: int
    volume: float
    height: float


@dataclass(frozen=True)
class Histogram:
    """Piecewise-constant density over the leaf cells of an SRP."""

    root_box: Box
    n: int
    leaves: tuple[HistogramLeaf, ...] = field(repr=False)

    @property
    def leaf_count(self) -> int:
        return len(self.leaves)

    def total_mass(self) -> float:
        return sum(leaf.height * leaf.volume for leaf in self.leaves)


def histogram(s: SRP) -> Histogram:
    """The SRP histogram: density ``count / (n * volume)`` per leaf cell."""
    if s.n < 1:
        raise EmptySample("cannot form a histogram from zero points")
    leaves = []
    for label in s.tree.leaves():
        box = s.tree.cell_box(label)
        vol = box.volume
        c = s.counts.get(label, 0)
        leaves.append(HistogramLeaf(label, box, c, vol, c / (s.n * vol)))
    return Histogram(s.tree.root_box, s.n, tuple(leaves))


def density_at(h: Histogram, p) -> float:
    """Histogram density at a point; 0 outside the root box.

    A point on an internal splitting hyperplane belongs to the right
    child, consistent with the half-open left-child rule.
    """
    p = np.asarray(p, dtype=float).ravel()
    if p.size != h.root_box.dim:
        raise DimensionMismatch(
            f"point has {p.size} coordinates, histogram has {h.root_box.dim}"
        )
    if not contains(h.root_box, p):
        return 0.0
    by_label = {leaf.label: leaf for leaf in h.leaves}
    label = ROOT
    lo = [iv.lo for iv in h.root_box.intervals]
    hi = [iv.hi for iv in h.root_box.intervals]
    while label not in by_label:
        axis, best = 0, hi[0] - lo[0]
        for i in range(1, len(lo)):
            w = hi[i] - lo[i]
            if w > best:
                axis, best = i, w
        mid = lo[axis] + (hi[axis] - lo[axis]) / 2.0
        if p[axis] >= mid:
            label = 2 * label + 1
            lo[axis] = mid
        else:
            label = 2 * label
            hi[axis] = mid
    return by_label[label].height


def log_likelihood(s: SRP) -> float:
    """Log-likelihood of the data under the SRP's own histogram.

    Sum over non-empty leaves of ``count * log(count / (n * volume))``;
    empty leaves contribute 0 (the 0*log 0 convention).
    """
    if s.n < 1:
        raise EmptySample("log-likelihood of an empty sample")
    total = 0.0
    for label in s.tree.leaves():
        c = s.counts.get(label, 0)
        if c == 0:
            continue
        lo, hi, _, _ = cell_bounds(s.tree.root_box, label)
        vol = 1.0
        for a, b in zip(lo, hi):
            vol *= b - a
        total += c * np.log(c / (s.n * vol))
    return float(total)
