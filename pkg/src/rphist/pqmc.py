"""Priority-queued splitting chains over statistical regular pavings.

A chain starts from an SRP and repeatedly splits the splittable leaf of
largest priority until it runs out of splittable leaves, reaches a leaf
budget, or the largest priority drops to the stopping threshold.  Two
priorities are provided:

* ``SEB`` (statistically equivalent blocks): the leaf's point count.
  Splitting the fullest cells drives all cells towards equal counts.
* ``SPC`` (support carving): ``(1 - count/n) * volume``.  Splitting
  large, nearly empty cells carves away the void around the data
  support, complementing SEB.

A carving run followed by SEB chains launched from states spread along
the carve path ("tributaries") yields the candidate states that the
smoothing stage scores.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .geometry import DEFAULT_PAD, Box, bounding_box, volume_at_depth
from .srp import SRP, assign_leaves, ingest
from .tree import RPTree, cell_bounds, depth

SEB = "seb"
SPC = "spc"


@dataclass(frozen=True)
class Priority:
    """A priority function over leaves, evaluated from count and volume."""

    kind: str

    def __post_init__(self):
        if self.kind not in (SEB, SPC):
            raise ValueError(f"unknown priority kind {self.kind!r}")

    def value(self, count: int, volume: float, n: int) -> float:
        if self.kind == SEB:
            return float(count)
        if n == 0:
            return volume
        return (1.0 - count / n) * volume


SEB_PRIORITY = Priority(SEB)
SPC_PRIORITY = Priority(SPC)


@dataclass(frozen=True)
class PqmcConfig:
    """Stopping thresholds and tie handling for a splitting chain.

    ``max_psi`` stops the chain once the largest splittable priority is
    no bigger than it; ``None`` or ``0.0`` disables that stop (a zero
    threshold can never bind for SEB, and for SPC the zero-threshold
    carve is defined to run until the leaf budget).  ``max_leaves=None``
    removes the leaf budget.  Ties at the maximum priority are broken
    uniformly at random (seeded) or towards the lowest label.
    """

    max_psi: float | None = None
    max_leaves: int | None = None
    max_depth: int = 1000
    rng_seed: int = 0
    tie_break: str = "random"

    def __post_init__(self):
        if self.max_leaves is not None and self.max_leaves < 1:
            raise ValueError("max_leaves must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.tie_break not in ("random", "lowest_label"):
            raise ValueError(f"unknown tie_break {self.tie_break!r}")

    @property
    def priority_stop_active(self) -> bool:
        return self.max_psi is not None and self.max_psi > 0.0


@dataclass(frozen=True)
class SplitRecord:
    """One chain transition: leaf ``label`` split into counts (left, right)."""

    label: int
    left_count: int
    right_count: int


@dataclass
class PqmcPath:
    """A chain sample path, stored as the initial SRP plus split records.

    ``states()`` materializes every intermediate SRP; ``state(t)``
    materializes a single one.  The compact form keeps long paths cheap:
    consecutive states differ by exactly one split.
    """

    initial: SRP
    records: tuple[SplitRecord, ...]
    stop_reason: str
    success: bool
    had_ties: bool

    def __len__(self) -> int:
        return len(self.records) + 1

    @property
    def split_count(self) -> int:
        return len(self.records)

    def state(self, t: int) -> SRP:
        if not 0 <= t < len(self):
            raise IndexError(f"state {t} of a path of length {len(self)}")
        nodes = set(self.initial.tree.nodes)
        counts = dict(self.initial.counts)
        for rec in self.records[:t]:
            left, right = 2 * rec.label, 2 * rec.label + 1
            nodes.add(left)
            nodes.add(right)
            counts[left] = rec.left_count
            counts[right] = rec.right_count
        return SRP(RPTree(self.initial.tree.root_box, frozenset(nodes)), counts, self.initial.n)

    @cached_property
    def final(self) -> SRP:
        return self.state(len(self) - 1)

    def states(self) -> list[SRP]:
        return [self.state(t) for t in range(len(self))]


def splittable_leaves(s: SRP, cfg: PqmcConfig) -> set[int]:
    """Leaves that the chain may split: non-empty, within the depth cap,
    and bisectable in machine arithmetic."""
    out = set()
    for label in s.tree.leaves():
        if s.counts.get(label, 0) <= 0:
            continue
        if depth(label) >= cfg.max_depth:
            continue
        lo, hi, axis, mid = cell_bounds(s.tree.root_box, label)
        if lo[axis] < mid < hi[axis]:
            out.add(label)
    return out


class _LeafPool:
    """Working state of one chain run: point indices and cell geometry
    per splittable leaf, with a max-priority heap keyed on (psi, label)."""

    def __init__(self, s0: SRP, points: np.ndarray, priority: Priority, cfg: PqmcConfig):
        self.points = points
        self.priority = priority
        self.cfg = cfg
        self.n = s0.n
        self.root_volume = s0.tree.root_box.volume
        self.info: dict[int, tuple] = {}
        self.heap: list[tuple[float, int]] = []
        self.leaf_count = s0.leaf_count
        assignment = assign_leaves(s0.tree, points)
        for label, idx in assignment.items():
            if len(idx) != s0.counts.get(label, 0):
                raise ValueError(
                    f"initial SRP count at leaf {label} does not match the data"
                )
            lo, hi, axis, mid = cell_bounds(s0.tree.root_box, label)
            self._admit(label, idx, lo, hi, axis, mid)

    def _psi(self, count: int, label: int) -> float:
        vol = volume_at_depth(self.root_volume, depth(label))
        return self.priority.value(count, vol, self.n)

    def _admit(self, label, idx, lo, hi, axis, mid):
        if len(idx) == 0:
            return
        if depth(label) >= self.cfg.max_depth:
            return
        if not (lo[axis] < mid < hi[axis]):
            return
        self.info[label] = (idx, lo, hi, axis, mid)
        heapq.heappush(self.heap, (-self._psi(len(idx), label), label))

    def max_priority(self) -> float | None:
        return -self.heap[0][0] if self.heap else None

    def pop_argmax(self, rng: np.random.Generator) -> tuple[int, bool]:
        """Pop one leaf of maximal priority.  Returns (label, tied)."""
        top_psi, label = heapq.heappop(self.heap)
        tied = bool(self.heap) and self.heap[0][0] == top_psi
        if tied and self.cfg.tie_break == "random":
            pool = [label]
            while self.heap and self.heap[0][0] == top_psi:
                pool.append(heapq.heappop(self.heap)[1])
            pick = int(rng.integers(len(pool)))
            label = pool.pop(pick)
            for other in pool:
                heapq.heappush(self.heap, (top_psi, other))
        return label, tied

    def split(self, label: int) -> SplitRecord:
        idx, lo, hi, axis, mid = self.info.pop(label)
        right = self.points[idx, axis] >= mid
        idx_r = idx[right]
        idx_l = idx[~right]
        lo_r = list(lo)
        lo_r[axis] = mid
        hi_l = list(hi)
        hi_l[axis] = mid
        self._admit(2 * label, idx_l, lo, hi_l, *_split_plane_of(lo, hi_l))
        self._admit(2 * label + 1, idx_r, lo_r, hi, *_split_plane_of(lo_r, hi))
        self.leaf_count += 1
        return SplitRecord(label, len(idx_l), len(idx_r))


def _split_plane_of(lo, hi):
    axis, best = 0, hi[0] - lo[0]
    for i in range(1, len(lo)):
        w = hi[i] - lo[i]
        if w > best:
            axis, best = i, w
    return axis, lo[axis] + (hi[axis] - lo[axis]) / 2.0


def run_pqmc(s0: SRP, points, priority: Priority, cfg: PqmcConfig) -> PqmcPath:
    """Run one priority-queued splitting chain from ``s0``.

    At every step the splittable leaf with the largest priority is
    split (ties per ``cfg.tie_break``) until no splittable leaf remains,
    the leaf count reaches ``cfg.max_leaves``, or the largest priority
    is at most ``cfg.max_psi``.  Termination is guaranteed: the leaf
    count strictly increases and splittability is depth-bounded.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) != s0.n:
        raise ValueError(f"SRP holds {s0.n} points but {len(points)} were passed")
    pool = _LeafPool(s0, points, priority, cfg)
    rng = np.random.default_rng(cfg.rng_seed)
    records: list[SplitRecord] = []
    had_ties = False
    stop_reason = "exhausted"
    while True:
        if not pool.heap:
            stop_reason = "exhausted"
            break
        if cfg.max_leaves is not None and pool.leaf_count >= cfg.max_leaves:
            stop_reason = "max_leaves"
            break
        if cfg.priority_stop_active and pool.max_priority() <= cfg.max_psi:
            stop_reason = "max_psi"
            break
        label, tied = pool.pop_argmax(rng)
        had_ties = had_ties or tied
        records.append(pool.split(label))
    priority_ok = (
        not cfg.priority_stop_active
        or pool.max_priority() is None
        or pool.max_priority() <= cfg.max_psi
    )
    leaves_ok = cfg.max_leaves is None or pool.leaf_count <= cfg.max_leaves
    return PqmcPath(
        initial=s0,
        records=tuple(records),
        stop_reason=stop_reason,
        success=priority_ok and leaves_ok,
        had_ties=had_ties,
    )


def carve_path(points, cfg: PqmcConfig, root_box: Box | None = None,
               pad: float = DEFAULT_PAD) -> PqmcPath:
    """Support-carving chain from the root SRP with a zero threshold.

    Runs the SPC priority until the leaf budget ``cfg.max_leaves`` is
    reached or no splittable leaf remains; ``cfg.max_psi`` must be 0 or
    None (the zero-threshold carve never stops on priority).
    """
    if cfg.max_psi not in (None, 0, 0.0):
        raise ValueError("the carve chain requires max_psi = 0 (or None)")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if root_box is None:
        root_box = bounding_box(points, pad)
    s0 = ingest(RPTree(root_box), points, strict=True)
    return run_pqmc(s0, points, SPC_PRIORITY, cfg)


def launch_states(carve: PqmcPath, c: int) -> list[SRP]:
    """``c`` states spread evenly along a carve path, always including
    the path's first state (the root SRP for a root-started carve).

    If ``c`` is at least the path length, every state is returned.
    """
    if c < 1:
        raise ValueError("need at least one launch state")
    total = len(carve)
    if c >= total:
        return carve.states()
    if c == 1:
        return [carve.state(0)]
    last = total - 1
    steps = sorted({(i * last) // (c - 1) for i in range(c)})
    return [carve.state(t) for t in steps]


def tributary_seed(base_seed: int, index: int) -> int:
    """Deterministic per-tributary RNG seed derived from the base seed."""
    ss = np.random.SeedSequence([int(base_seed), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def joint_exploration(points, carve_cfg: PqmcConfig, seb_cfg: PqmcConfig,
                      c: int, root_box: Box | None = None,
                      pad: float = DEFAULT_PAD) -> list[PqmcPath]:
    """Carve, then launch one SEB chain per spread-out carve state.

    Returns the ``c`` tributary paths; their states are the candidate
    set for smoothing.  Tributary ``i`` runs with the seed
    ``tributary_seed(seb_cfg.rng_seed, i)``, so any single tributary can
    be replayed with a standalone :func:`run_pqmc` call.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    carve = carve_path(points, carve_cfg, root_box=root_box, pad=pad)
    paths = []
    for i, state in enumerate(launch_states(carve, c)):
        cfg_i = replace(seb_cfg, rng_seed=tributary_seed(seb_cfg.rng_seed, i))
        paths.append(run_pqmc(state, points, SEB_PRIORITY, cfg_i))
    return paths
