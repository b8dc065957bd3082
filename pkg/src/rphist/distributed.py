"""Data-parallel threshold splitting over sharded tagged points.

The working representation is the tagged dataset: every point is paired
with the integer label of the cell it currently lies in, and the pairs
are spread over shards that never exchange points.  One iteration
counts points per cell (a per-shard reduce merged by addition), picks
every cell whose priority exceeds the threshold, and retags the points
of those cells to the child cell on their side of the splitting
hyperplane (a purely shard-local map).  Cells at or below the threshold
can be retired early together with their counts ("pruning"), which
shrinks the working set without changing the result.

The terminal tree only depends on the threshold, not on the order in
which cells are split, so the result coincides with the tree the
sequential chain reaches when run to the same threshold; the
sequential path itself is recovered afterwards by backtracking (merging
the cherry whose parent has the least priority, repeatedly).
"""

from __future__ import annotations

import heapq
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DepthExhausted
from .geometry import Box, volume_at_depth
from .pqmc import PqmcConfig, PqmcPath, Priority, SplitRecord, splittable_leaves
from .srp import SRP, assign_leaves
from .tree import ROOT, RPTree, cell_bounds, depth

CountTable = dict[int, int]

# labels above this need more than 63 bits in the child generation
_INT64_SAFE_MAX = 2**61


@dataclass(frozen=True)
class Shard:
    """One shard of tagged points: parallel arrays of labels and rows."""

    labels: np.ndarray
    points: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class TaggedDataset:
    """Sharded (cell label, point) pairs: the tree stored implicitly."""

    shards: tuple[Shard, ...]
    root_box: Box

    @classmethod
    def from_points(cls, points, root_box: Box, shard_count: int = 1,
                    initial_tree: RPTree | None = None) -> "TaggedDataset":
        """Tag points with their containing cell and cut into shards.

        Without an initial tree every point is tagged with the root
        cell.  Shards are contiguous row ranges; the assignment never
        changes afterwards.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.size == 0:
            points = points.reshape(0, root_box.dim)
        if shard_count < 1:
            raise ValueError("need at least one shard")
        labels = np.full(len(points), ROOT, dtype=np.int64)
        if initial_tree is not None:
            for leaf, idx in assign_leaves(initial_tree, points).items():
                if leaf > _INT64_SAFE_MAX and labels.dtype != object:
                    labels = labels.astype(object)
                labels[idx] = leaf
        shards = []
        for rows in np.array_split(np.arange(len(points)), shard_count):
            shards.append(Shard(labels[rows].copy(), points[rows].copy()))
        return cls(tuple(shards), root_box)

    @property
    def shard_count(self) -> int:
        return len(self.shards)

    def total_points(self) -> int:
        return sum(len(s) for s in self.shards)


def _shard_counts(shard: Shard) -> CountTable:
    if len(shard) == 0:
        return {}
    labels, counts = np.unique(shard.labels, return_counts=True)
    return {int(a): int(c) for a, c in zip(labels, counts)}


def count_by_cell(ds: TaggedDataset, workers: int = 1) -> CountTable:
    """Exact per-cell multiplicities: per-shard tables merged by addition.

    Addition is associative and commutative, so the merged table does
    not depend on the shard count or merge order; only non-empty cells
    appear as keys.
    """
    partials = _map_shards(_shard_counts, ds.shards, workers)
    table: CountTable = {}
    for part in partials:
        for label, c in part.items():
            table[label] = table.get(label, 0) + c
    return table


def _map_shards(fn, shards, workers: int):
    if workers > 1 and len(shards) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, shards))
    return [fn(shard) for shard in shards]


def cells_to_split(c: CountTable, root_box: Box, priority: Priority,
                   threshold: float, cfg: PqmcConfig,
                   n_total: int | None = None) -> set[int]:
    """Cells whose priority strictly exceeds the threshold and that can
    actually be split (depth cap and machine bisectability)."""
    n = n_total if n_total is not None else sum(c.values())
    root_volume = root_box.volume
    out = set()
    for label, count in c.items():
        d = depth(label)
        psi = priority.value(count, volume_at_depth(root_volume, d), n)
        if psi <= threshold:
            continue
        if d >= cfg.max_depth:
            continue
        lo, hi, axis, mid = cell_bounds(root_box, label)
        if lo[axis] < mid < hi[axis]:
            out.add(label)
    return out


def _split_planes(root_box: Box, split_set) -> dict[int, tuple[int, float]]:
    planes = {}
    for label in split_set:
        lo, hi, axis, mid = cell_bounds(root_box, label)
        planes[label] = (axis, mid)
    return planes


def apply_splits(ds: TaggedDataset, split_set: set[int],
                 workers: int = 1) -> TaggedDataset:
    """Retag the points of every split cell to the child on their side.

    A point below the splitting hyperplane (coordinate < midpoint) goes
    to the left child ``2a``; a point at or above it goes to the right
    child ``2a + 1``.  Purely shard-local; other pairs are unchanged.
    """
    if not split_set:
        return ds
    planes = _split_planes(ds.root_box, split_set)
    widen = max(split_set) > _INT64_SAFE_MAX

    def retag(shard: Shard) -> Shard:
        labels = shard.labels
        if len(labels) == 0:
            return shard
        if widen and labels.dtype != object:
            labels = labels.astype(object)
        uniq, inv = np.unique(labels, return_inverse=True)
        axis_u = np.full(len(uniq), -1, dtype=np.int64)
        mid_u = np.zeros(len(uniq))
        for i, label in enumerate(uniq):
            plane = planes.get(int(label))
            if plane is not None:
                axis_u[i], mid_u[i] = plane
        rows = np.nonzero(axis_u[inv] >= 0)[0]
        if len(rows) == 0:
            return Shard(labels, shard.points)
        ax = axis_u[inv[rows]]
        md = mid_u[inv[rows]]
        side = shard.points[rows, ax] >= md
        new_labels = labels.copy()
        new_labels[rows] = 2 * labels[rows] + side
        return Shard(new_labels, shard.points)

    return TaggedDataset(tuple(_map_shards(retag, ds.shards, workers)), ds.root_box)


def prune(ds: TaggedDataset, c: CountTable, threshold: float,
          priority: Priority, passed: CountTable,
          n_total: int | None = None, workers: int = 1) -> tuple[TaggedDataset, CountTable]:
    """Retire every cell at or below the threshold.

    The retired cells' pairs are deleted from the working dataset and
    their counts move into ``passed``; the threshold never changes, so
    they could not have been split later anyway.  Working plus passed
    counts always conserve the total.
    """
    n = n_total if n_total is not None else sum(c.values())
    root_volume = ds.root_box.volume
    done = set()
    new_passed = dict(passed)
    for label, count in c.items():
        psi = priority.value(count, volume_at_depth(root_volume, depth(label)), n)
        if psi <= threshold:
            done.add(label)
            new_passed[label] = new_passed.get(label, 0) + count
    if not done:
        return ds, new_passed

    def drop(shard: Shard) -> Shard:
        if len(shard) == 0:
            return shard
        keep = ~np.isin(shard.labels, list(done))
        return Shard(shard.labels[keep], shard.points[keep])

    shards = tuple(_map_shards(drop, ds.shards, workers))
    return TaggedDataset(shards, ds.root_box), new_passed


@dataclass(frozen=True)
class IterationStats:
    """Per-iteration bookkeeping of one threshold build."""

    split_cells: int
    working_points: int
    passed_points: int
    merged_table_keys: int
    nonempty_cells: int


@dataclass(frozen=True)
class BuildResult:
    """Outcome of a threshold build: the terminal SRP plus diagnostics."""

    final_srp: SRP
    passed_counts: CountTable
    iterations: int
    priority: Priority
    threshold: float
    stats: tuple[IterationStats, ...] = field(default=(), repr=False)


def build_threshold_tree(points, root_box: Box, priority: Priority,
                         threshold: float, cfg: PqmcConfig,
                         shard_count: int = 1, workers: int = 1,
                         initial_tree: RPTree | None = None,
                         use_prune: bool = True) -> BuildResult:
    """Split every over-threshold cell per iteration until none is left.

    The returned SRP is the unique tree in which every leaf either has
    priority at or below the threshold or is empty; it equals the
    terminal state of the sequential chain run with ``max_psi =
    threshold`` and no leaf budget.

    Raises
    ------
    DepthExhausted
        If over-threshold cells remain but none of them can be split.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        points = points.reshape(0, root_box.dim)
    ds = TaggedDataset.from_points(points, root_box, shard_count, initial_tree)
    n_total = ds.total_points()
    passed: CountTable = {}
    stats: list[IterationStats] = []
    iterations = 0
    table = count_by_cell(ds, workers)
    while True:
        split_set = cells_to_split(table, root_box, priority, threshold, cfg, n_total)
        if not split_set:
            _check_exhaustion(table, root_box, priority, threshold, n_total)
            break
        iterations += 1
        if use_prune:
            ds, passed = prune(ds, table, threshold, priority, passed,
                               n_total=n_total, workers=workers)
        ds = apply_splits(ds, split_set, workers)
        table = count_by_cell(ds, workers)
        stats.append(IterationStats(
            split_cells=len(split_set),
            working_points=sum(table.values()),
            passed_points=sum(passed.values()),
            merged_table_keys=len(table),
            nonempty_cells=len(table),
        ))
    leaf_counts = dict(passed)
    leaf_counts.update(table)
    final = assemble_srp(root_box, leaf_counts, initial_tree)
    return BuildResult(final, passed, iterations, priority, float(threshold),
                       tuple(stats))


def _check_exhaustion(table: CountTable, root_box: Box, priority: Priority,
                      threshold: float, n_total: int) -> None:
    root_volume = root_box.volume
    for label, count in table.items():
        psi = priority.value(count, volume_at_depth(root_volume, depth(label)), n_total)
        if psi > threshold:
            raise DepthExhausted(
                f"cell {label} has priority {psi} > {threshold} but cannot be split"
            )


def assemble_srp(root_box: Box, leaf_counts: CountTable,
                 initial_tree: RPTree | None = None) -> SRP:
    """SRP from the non-empty leaf cells of a finished build.

    Ancestors get the sum of their children's counts; a split side that
    received no points is materialized as a count-0 leaf.  When the
    build refined an initial tree, that tree's nodes are kept even where
    they hold no data.
    """
    nodes: set[int] = {ROOT}
    counts: CountTable = {}
    for label, c in leaf_counts.items():
        counts[label] = counts.get(label, 0) + c
        node = label
        while node not in nodes:
            nodes.add(node)
            node >>= 1
    if initial_tree is not None:
        nodes |= initial_tree.nodes
    for node in list(nodes):
        if node > ROOT:
            sibling = node ^ 1
            nodes.add(sibling)
    for node in sorted(nodes, key=lambda v: -v.bit_length()):
        if 2 * node in nodes:
            counts[node] = counts.get(2 * node, 0) + counts.get(2 * node + 1, 0)
        else:
            counts.setdefault(node, 0)
    n = counts.get(ROOT, 0)
    return SRP(RPTree(root_box, frozenset(nodes)), counts, n)


def backtrack(result: BuildResult, stop_state: SRP | None = None) -> list[SRP]:
    """Coarsening sequence from the final SRP down to the trivial tree.

    Each step merges the cherry whose parent has least priority (ties
    towards the lowest parent label); the parent's priority is computed
    from its children's summed counts and its label-derived volume.
    Reversing the output gives the sequential forward path.  With a
    ``stop_state`` the merging never coarsens below that tree and stops
    on reaching it (used to reconstruct chains launched from a
    non-trivial state).
    """
    return [srp for srp, _ in _merge_walk(result, stop_state)]


def _merge_walk(result: BuildResult, stop_state: SRP | None,
                materialize: bool = True):
    """Yield (SRP, merge record) pairs along the coarsening walk.

    The record describes the merge that produced the state from its
    predecessor; the first state (the build's final SRP) carries None.
    With ``materialize=False`` the states are not built (record-only
    walk for path reconstruction).
    """
    srp = result.final_srp
    priority = result.priority
    n = srp.n
    root_volume = srp.tree.root_box.volume
    nodes = set(srp.tree.nodes)
    counts = srp.counts
    frozen_internal = frozenset(stop_state.tree.internal()) if stop_state is not None else frozenset()
    target_nodes = len(stop_state.tree.nodes) if stop_state is not None else 1

    def parent_psi(p: int) -> float:
        return priority.value(counts.get(p, 0),
                              volume_at_depth(root_volume, depth(p)), n)

    def is_leaf(v: int) -> bool:
        return 2 * v not in nodes

    heap: list[tuple[float, int]] = []
    for p in srp.tree.internal():
        if p in frozen_internal:
            continue
        if is_leaf(2 * p) and is_leaf(2 * p + 1):
            heapq.heappush(heap, (parent_psi(p), p))
    yield srp, None
    while len(nodes) > target_nodes:
        if not heap:
            raise ValueError("no mergeable cherry left; inconsistent stop state")
        psi, p = heapq.heappop(heap)
        left, right = 2 * p, 2 * p + 1
        nodes.discard(left)
        nodes.discard(right)
        state = None
        if materialize:
            state = SRP(RPTree(srp.tree.root_box, frozenset(nodes)), counts, n)
        yield state, SplitRecord(p, counts.get(left, 0), counts.get(right, 0))
        if p > ROOT:
            q = p >> 1
            if q not in frozen_internal and is_leaf(2 * q) and is_leaf(2 * q + 1):
                heapq.heappush(heap, (parent_psi(q), q))
    if stop_state is not None and nodes != set(stop_state.tree.nodes):
        raise ValueError("backtracking did not reach the stop state")


def reconstruct_path(result: BuildResult, initial: SRP | None = None) -> PqmcPath:
    """The sequential forward path implied by a threshold build.

    Backtracks from the final SRP to ``initial`` (the trivial root SRP
    when omitted) and reverses the merges into split records.  On data
    where all step priorities are distinct this is exactly the path the
    sequential chain takes; under ties it is one valid realization.
    """
    if initial is None:
        root_counts = {ROOT: result.final_srp.n}
        initial = SRP(RPTree(result.final_srp.tree.root_box), root_counts,
                      result.final_srp.n)
    records = [rec for _, rec in _merge_walk(result, initial, materialize=False)
               if rec is not None]
    records.reverse()
    return PqmcPath(
        initial=initial,
        records=tuple(records),
        stop_reason="max_psi",
        success=True,
        had_ties=False,
    )


def truncate_path(path: PqmcPath, max_leaves: int | None, priority: Priority,
                  threshold: float, cfg: PqmcConfig) -> PqmcPath:
    """Cut a path at a leaf budget and re-derive its success flag.

    Mirrors the sequential stopping rule: the chain would have halted on
    reaching ``max_leaves`` leaves, successful only if no splittable
    leaf above the threshold remains at that point.
    """
    m0 = path.initial.leaf_count
    if max_leaves is None or m0 + path.split_count <= max_leaves:
        return path
    keep = max(0, max_leaves - m0)
    kept = PqmcPath(path.initial, path.records[:keep], "max_leaves",
                    path.success, path.had_ties)
    final = kept.final
    n = final.n
    root_volume = final.tree.root_box.volume
    success = True
    for v in splittable_leaves(final, cfg):
        psi = priority.value(final.counts.get(v, 0),
                             volume_at_depth(root_volume, depth(v)), n)
        if psi > threshold:
            success = False
            break
    return PqmcPath(kept.initial, kept.records, "max_leaves", success,
                    kept.had_ties)
