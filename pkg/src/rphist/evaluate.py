"""L1-error evaluation of a histogram against a known reference density.

The error ``integral |f_n - f|`` splits into a sum of per-leaf integrals
plus the reference mass outside the root box.  Since the histogram is
exactly constant on each leaf, stratified Monte Carlo with uniform
draws per leaf only has to average the reference's variation, and the
outside mass comes from the reference's closed-form box probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DimensionMismatch, UnknownReference
from .geometry import Box
from .srp import Histogram


class GaussianReference:
    """Standard multivariate Gaussian (zero mean, identity covariance)."""

    name = "gaussian"

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = dim
        self._norm = (2.0 * math.pi) ** (-dim / 2.0)

    def pdf(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self._norm * np.exp(-0.5 * np.sum(points * points, axis=1))

    def box_prob(self, box: Box) -> float:
        if box.dim != self.dim:
            raise DimensionMismatch(f"box dim {box.dim} != reference dim {self.dim}")
        p = 1.0
        for iv in box.intervals:
            p *= float(ndtr(iv.hi) - ndtr(iv.lo))
        return p


class UniformReference:
    """Uniform density on a fixed box."""

    name = "uniform"

    def __init__(self, box: Box):
        self.box = box
        self.dim = box.dim
        vol = box.volume
        if vol <= 0:
            raise ValueError("uniform reference needs a box of positive volume")
        self._height = 1.0 / vol

    def pdf(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.ones(len(points), dtype=bool)
        for i, iv in enumerate(self.box.intervals):
            inside &= (points[:, i] >= iv.lo) & (points[:, i] <= iv.hi)
        return np.where(inside, self._height, 0.0)

    def box_prob(self, box: Box) -> float:
        if box.dim != self.dim:
            raise DimensionMismatch(f"box dim {box.dim} != reference dim {self.dim}")
        p = 1.0
        for mine, other in zip(self.box.intervals, box.intervals):
            overlap = min(mine.hi, other.hi) - max(mine.lo, other.lo)
            if overlap <= 0:
                return 0.0
            p *= overlap / mine.width
        return p


def make_reference(name: str, dim: int, root_box: Box | None = None):
    """Built-in reference by name: ``gaussian`` (standard) or ``uniform``
    (over ``root_box``)."""
    if name == "gaussian":
        return GaussianReference(dim)
    if name == "uniform":
        if root_box is None:
            raise ValueError("the uniform reference needs a box")
        return UniformReference(root_box)
    raise UnknownReference(f"no built-in reference named {name!r}")


@dataclass(frozen=True)
class EvalReport:
    """Monte-Carlo L1 error estimate with its standard error."""

    l1_estimate: float
    l1_std_error: float
    samples_per_leaf: int
    outside_mass: float


def l1_error(h: Histogram, reference, mc_per_leaf: int = 256,
             seed: int = 0) -> EvalReport:
    """Estimate ``integral |f_n - f|`` by stratified Monte Carlo.

    Each leaf contributes its volume times the average of
    ``|height - f(x)|`` over ``mc_per_leaf`` uniform draws in the leaf;
    the reference mass outside the root box is added exactly.  The
    standard error combines the per-leaf sample variances.
    """
    if getattr(reference, "dim", h.root_box.dim) != h.root_box.dim:
        raise DimensionMismatch(
            f"reference dim {reference.dim} != histogram dim {h.root_box.dim}"
        )
    if mc_per_leaf < 2:
        raise ValueError("need at least two draws per leaf")
    rng = np.random.default_rng(seed)
    outside = 1.0 - reference.box_prob(h.root_box)
    total = outside
    var_sum = 0.0
    for leaf in h.leaves:
        lows = leaf.box.lows()
        highs = leaf.box.highs()
        draws = rng.uniform(lows, highs, size=(mc_per_leaf, h.root_box.dim))
        dev = np.abs(leaf.height - reference.pdf(draws))
        total += leaf.volume * float(dev.mean())
        se = leaf.volume * float(dev.std(ddof=1)) / math.sqrt(mc_per_leaf)
        var_sum += se * se
    return EvalReport(
        l1_estimate=float(total),
        l1_std_error=float(math.sqrt(var_sum)),
        samples_per_leaf=mc_per_leaf,
        outside_mass=float(outside),
    )
