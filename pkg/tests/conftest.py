"""Shared fixtures and generators for the test suite."""

import numpy as np
import pytest

from rphist.geometry import Box, bounding_box
from rphist.pqmc import PqmcConfig, SEB_PRIORITY, run_pqmc
from rphist.srp import SRP, ingest
from rphist.tree import RPTree

def unit_box(d: int) -> Box:
    return Box.from_bounds([0.0] * d, [1.0] * d)


@pytest.fixture
def fig2_tree() -> RPTree:
    """Unit square split into the three-leaf paving {1,2,3,4,5}."""
    return RPTree(unit_box(2)).split(1).split(2)


def fig2_points() -> np.ndarray:
    """Ten points: 2 in the lower-left quarter cell, 3 in the upper-left
    quarter cell, 5 in the right half cell (includes two box corners)."""
    return np.array([
        [0.0, 0.0], [0.3, 0.4],                          # lower-left quarter
        [0.1, 0.6], [0.2, 0.8], [0.4, 0.9],              # upper-left quarter
        [0.6, 0.1], [0.7, 0.3], [0.8, 0.5], [0.9, 0.7], [1.0, 1.0],  # right half
    ])


@pytest.fixture
def fig2_srp(fig2_tree) -> SRP:
    return ingest(fig2_tree, fig2_points())


def random_points(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """Clustered data: a mixture of a few Gaussian blobs with very
    unequal weights, which keeps leaf counts generically distinct."""
    k = int(rng.integers(2, 6))
    centers = rng.uniform(-5, 5, size=(k, d))
    scales = rng.uniform(0.05, 1.0, size=k)
    weights = rng.dirichlet(np.ones(k) * 0.5)
    comp = rng.choice(k, size=n, p=weights)
    return centers[comp] + rng.standard_normal((n, d)) * scales[comp, None]


def random_srp(rng: np.random.Generator, n_max: int = 200, d_max: int = 3,
               max_splits: int = 30) -> tuple[SRP, np.ndarray]:
    """A random SRP grown by an SEB chain on random clustered data."""
    d = int(rng.integers(1, d_max + 1))
    n = int(rng.integers(2, n_max + 1))
    pts = random_points(rng, n, d)
    box = bounding_box(pts)
    s0 = ingest(RPTree(box), pts)
    splits = int(rng.integers(0, max_splits + 1))
    cfg = PqmcConfig(max_leaves=1 + splits, rng_seed=int(rng.integers(2**32)))
    path = run_pqmc(s0, pts, SEB_PRIORITY, cfg)
    return path.final, pts


def tie_free_instance(seed: int):
    """One (points, box, threshold, sequential path) instance whose whole
    sequential chain never saw a priority tie, or None."""
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    n = int(rng.integers(64, 4097))
    pts = random_points(rng, n, d)
    threshold = float(rng.integers(max(2, n // 64), max(3, n // 4)))
    box = bounding_box(pts)
    s0 = ingest(RPTree(box), pts)
    cfg = PqmcConfig(max_psi=threshold, tie_break="lowest_label")
    path = run_pqmc(s0, pts, SEB_PRIORITY, cfg)
    if path.had_ties:
        return None
    return pts, box, threshold, path
