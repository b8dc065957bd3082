"""End-to-end estimation pipeline: ingest, carve, explore, smooth, export.

The pipeline bounds the data with a padded box, carves away empty space
with a short support-carving chain, launches one SEB chain per spread
launch state and per entry of the stopping-threshold grid (through the
sharded threshold builder and path reconstruction by default, or the
plain sequential chain in sequential mode), and hands every state of
every tributary to the smoothing stage.  The selected histogram is
written as versioned JSON next to a manifest with the configuration,
per-candidate diagnostics and stage timings.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributed import build_threshold_tree, reconstruct_path, truncate_path
from .errors import PointOutsideRootBox
from .geometry import DEFAULT_PAD, bounding_box
from .io import histogram_to_json, ingest_csv, save_histogram
from .pqmc import (
    PqmcConfig,
    SEB_PRIORITY,
    carve_path,
    launch_states,
    run_pqmc,
    tributary_seed,
)
from .smoothing import (
    DEFAULT_TAU_MAX,
    DEFAULT_TAU_MIN,
    DEFAULT_TAU_STEPS,
    ScoredEstimate,
    SmoothingConfig,
    select,
)
from .srp import Histogram, histogram, inside_mask


@dataclass(frozen=True)
class RunConfig:
    """Everything one pipeline run needs.

    ``maxpts`` is the grid of SEB stopping thresholds (one tributary
    system per entry); ``carve_leaves`` defaults to a tenth of
    ``maxlvs``.  ``strict`` makes out-of-box points and malformed CSV
    rows fatal instead of dropped-with-report.
    """

    input_path: str | None = None
    dim: int = 2
    shards: int = 1
    workers: int = 1
    pad: float = DEFAULT_PAD
    carve_leaves: int | None = None
    tributaries: int = 5
    maxpts: tuple[int, ...] = (50, 500, 1500)
    maxlvs: int | None = None
    tau_min: float = DEFAULT_TAU_MIN
    tau_max: float = DEFAULT_TAU_MAX
    tau_steps: int = DEFAULT_TAU_STEPS
    seed: int = 0
    out: str | None = None
    strict: bool = False
    sequential: bool = False
    tie_break: str = "random"
    max_depth: int = 1000

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.shards < 1 or self.workers < 1 or self.tributaries < 1:
            raise ValueError("shards, workers and tributaries must be >= 1")
        if not self.maxpts:
            raise ValueError("maxpts grid must be nonempty")
        if any(p < 1 for p in self.maxpts):
            raise ValueError("maxpts entries must be >= 1")
        if self.carve_leaves is not None and self.carve_leaves < 1:
            raise ValueError("carve_leaves must be >= 1")
        if self.maxlvs is not None:
            if self.maxlvs < 1:
                raise ValueError("maxlvs must be >= 1")
            if self.effective_carve_leaves > self.maxlvs:
                raise ValueError("carve_leaves cannot exceed maxlvs")
        if self.tau_steps < 1 or self.tau_min <= 0 or self.tau_max < self.tau_min:
            raise ValueError("invalid tau grid")

    @property
    def effective_carve_leaves(self) -> int:
        if self.carve_leaves is not None:
            return self.carve_leaves
        if self.maxlvs is not None:
            return max(1, self.maxlvs // 10)
        return 100

    def tau_grid(self) -> tuple[float, ...]:
        if self.tau_steps == 1:
            return (self.tau_min,)
        return tuple(np.geomspace(self.tau_min, self.tau_max, self.tau_steps))


def run_pipeline(cfg: RunConfig, points=None) -> tuple[Histogram, ScoredEstimate]:
    """Run the full pipeline and return the selected histogram.

    Points come from ``cfg.input_path`` unless passed directly.  With a
    fixed seed and config the written histogram JSON is byte-identical
    across runs; the manifest also records wall-clock timings and is
    therefore not.
    """
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    skipped_rows = 0
    if points is None:
        if cfg.input_path is None:
            raise ValueError("need either points or cfg.input_path")
        points, skipped_rows = ingest_csv(cfg.input_path, cfg.dim, strict=cfg.strict)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != cfg.dim:
        raise ValueError(f"points have dim {points.shape[1]}, config says {cfg.dim}")
    root_box = bounding_box(points, cfg.pad)
    inside = inside_mask(root_box, points)
    dropped_points = int((~inside).sum())
    if dropped_points:
        if cfg.strict:
            raise PointOutsideRootBox(f"{dropped_points} points outside the root box")
        points = points[inside]
    timings["ingest"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    carve_cfg = PqmcConfig(
        max_psi=0.0,
        max_leaves=cfg.effective_carve_leaves,
        max_depth=cfg.max_depth,
        rng_seed=cfg.seed,
        tie_break=cfg.tie_break,
    )
    carve = carve_path(points, carve_cfg, root_box=root_box)
    launches = launch_states(carve, cfg.tributaries)
    timings["carve"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    paths = []
    candidates = []
    k = 0
    for maxpts in cfg.maxpts:
        for i, state in enumerate(launches):
            seb_cfg = PqmcConfig(
                max_psi=float(maxpts),
                max_leaves=cfg.maxlvs,
                max_depth=cfg.max_depth,
                rng_seed=tributary_seed(cfg.seed, k),
                tie_break=cfg.tie_break,
            )
            if cfg.sequential:
                path = run_pqmc(state, points, SEB_PRIORITY, seb_cfg)
            else:
                result = build_threshold_tree(
                    points, root_box, SEB_PRIORITY, float(maxpts), seb_cfg,
                    shard_count=cfg.shards, workers=cfg.workers,
                    initial_tree=state.tree,
                )
                path = reconstruct_path(result, initial=state)
                path = truncate_path(path, cfg.maxlvs, SEB_PRIORITY,
                                     float(maxpts), seb_cfg)
            paths.append(path)
            candidates.append({
                "maxpts": int(maxpts),
                "tributary": i,
                "launch_leaves": state.leaf_count,
                "final_leaves": path.final.leaf_count,
                "success": path.success,
            })
            k += 1
    timings["tributaries"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    estimate = select(paths, SmoothingConfig(cfg.tau_grid()))
    hist = histogram(estimate.srp)
    timings["smoothing"] = time.perf_counter() - t0

    if cfg.out is not None:
        t0 = time.perf_counter()
        save_histogram(hist, cfg.out)
        timings["export"] = time.perf_counter() - t0
        _write_manifest(cfg, hist, estimate, candidates, timings,
                        skipped_rows, dropped_points)
    return hist, estimate


def _write_manifest(cfg: RunConfig, hist: Histogram, estimate: ScoredEstimate,
                    candidates, timings, skipped_rows, dropped_points) -> None:
    manifest = {
        "config": {
            "input_path": cfg.input_path,
            "dim": cfg.dim,
            "shards": cfg.shards,
            "workers": cfg.workers,
            "pad": cfg.pad,
            "carve_leaves": cfg.effective_carve_leaves,
            "tributaries": cfg.tributaries,
            "maxpts": list(cfg.maxpts),
            "maxlvs": cfg.maxlvs,
            "tau_min": cfg.tau_min,
            "tau_max": cfg.tau_max,
            "tau_steps": cfg.tau_steps,
            "seed": cfg.seed,
            "strict": cfg.strict,
            "sequential": cfg.sequential,
            "tie_break": cfg.tie_break,
            "max_depth": cfg.max_depth,
        },
        "n": hist.n,
        "skipped_rows": skipped_rows,
        "dropped_points": dropped_points,
        "root_box": histogram_to_json(hist)["root_box"],
        "candidates": candidates,
        "selected": {
            "tau": estimate.tau,
            "leaf_count": estimate.srp.leaf_count,
            "penalized_score": estimate.penalized_score,
            "cv_score": estimate.cv_score,
        },
        "timings_s": {k: round(v, 6) for k, v in timings.items()},
    }
    path = Path(cfg.out).with_suffix(Path(cfg.out).suffix + ".manifest.json")
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
