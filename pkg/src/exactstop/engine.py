"""Hypothesize-and-verify RANSAC with approximate and exact stopping.

:func:`run_dual` executes a single loop and snapshots the best model twice:
when the iteration counter first reaches the approximate requirement ``N_a``
and when it reaches the exact requirement ``N_e``. Because ``N_a <= N_e`` for
any inlier count, the approximate run is a prefix of the exact run under the
same random stream.

:func:`run_single` is a plain Python implementation of the same loop for one
criterion. It is slow and exists as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .models import DegenerateSampleError, EllipseModel, LineModel, ModelHypothesis, fit_minimal
from .stopping import (
    UNBOUNDED,
    ConsensusCounts,
    Criterion,
    StopConfig,
    approx_probability,
    exact_probability,
    required_iterations,
)
from .synth import ProblemInstance, make_rng

_FAMILY_CODE = {"line": _kernels.LINE, "ellipse": _kernels.ELLIPSE}


@dataclass(frozen=True)
class RansacConfig:
    s: float = 0.99
    max_iterations: float = 1_000_000
    inlier_threshold: float = 3.0
    seed: int = 0

    def __post_init__(self):
        StopConfig(self.s, Criterion.EXACT, self.max_iterations)  # validates s and the cap
        if not self.inlier_threshold > 0:
            raise ValueError(f"inlier_threshold must be positive, got {self.inlier_threshold}")


class Snapshot(NamedTuple):
    """Best model at a stopping point; ``model`` is None if none was verifiable."""

    model: Optional[ModelHypothesis]
    inlier_count: int


@dataclass(frozen=True)
class DualRunResult:
    best_at_approx: Snapshot
    best_at_exact: Snapshot
    N_a: int
    N_e: int
    hypothesis_failures: int

    @property
    def undersampling(self) -> float:
        """Realized ``(N_e - N_a) / N_a``."""
        return (self.N_e - self.N_a) / self.N_a


class Verification(NamedTuple):
    count: int
    mask: np.ndarray


def draw_minimal_sample(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """k distinct indices from ``range(n)``, uniform over all k-subsets."""
    if not 1 <= k <= n:
        raise ValueError(f"cannot draw {k} of {n} items")
    perm = np.arange(n)
    picks = np.empty(k, np.int64)
    _kernels.partial_shuffle(rng, perm, k, picks)
    return perm[:k].copy()


def whitened_distances(model: ModelHypothesis, instance: ProblemInstance) -> np.ndarray:
    return np.asarray(model.distance(instance.measurements)) / instance.sigma


def verify(model: ModelHypothesis, instance: ProblemInstance, threshold: float = 3.0) -> Verification:
    """Inliers are measurements whose whitened distance is at most ``threshold``.

    With isotropic noise this is a geometric distance of at most
    ``threshold * sigma``.
    """
    dist = np.asarray(model.distance(instance.measurements))
    mask = dist <= threshold * instance.sigma
    return Verification(int(mask.sum()), mask)


def _make_model(family: str, params: np.ndarray) -> ModelHypothesis:
    if family == "line":
        return LineModel((params[0], params[1]), params[2])
    return EllipseModel(tuple(params))


def run_dual(instance: ProblemInstance, cfg: RansacConfig) -> DualRunResult:
    """One RANSAC pass with snapshots at both the approximate and exact stop."""
    return _run_kernel(instance, cfg, stop_on_approx=False)


def _run_kernel(instance, cfg, stop_on_approx):
    family = instance.family
    if instance.params.inliers < instance.k + 1 or instance.params.n < instance.k + 1:
        raise ValueError("instance too small to verify any hypothesis")
    rng = make_rng(cfg.seed)
    pts = np.ascontiguousarray(instance.measurements, dtype=float)
    cap = float(cfg.max_iterations)
    out = _kernels.ransac_loop(
        rng, pts, _FAMILY_CODE[family], instance.sigma, float(cfg.inlier_threshold),
        math.log1p(-cfg.s), cap, stop_on_approx)
    params_a, count_a, iters_a, params_e, count_e, iters_e, failures = out
    snap_a = Snapshot(_make_model(family, params_a) if count_a >= 0 else None, max(count_a, 0))
    snap_e = Snapshot(_make_model(family, params_e) if count_e >= 0 else None, max(count_e, 0))
    return DualRunResult(snap_a, snap_e, int(iters_a), int(iters_e), int(failures))


def run_single(instance: ProblemInstance, cfg: RansacConfig, mode: Criterion) -> tuple[Snapshot, int]:
    """Reference loop stopping on one criterion; returns the best model and iteration count."""
    mode = Criterion(mode)
    n, k = instance.params.n, instance.k
    rng = make_rng(cfg.seed)
    best: Optional[ModelHypothesis] = None
    best_count, best_resid = -1, math.inf
    needed = min(UNBOUNDED, cfg.max_iterations)
    it = 0
    while True:
        it += 1
        idx = draw_minimal_sample(rng, n, k)
        try:
            model = fit_minimal(instance.family, instance.measurements[idx])
        except (DegenerateSampleError, ValueError):
            model = None
        if model is not None:
            dist = np.asarray(model.distance(instance.measurements))
            mask = dist <= cfg.inlier_threshold * instance.sigma
            count = int(mask.sum())
            if count >= k + 1:
                resid = sum(dist[mask].tolist()) / (instance.sigma * count)
                if count > best_count or (count == best_count and resid < best_resid):
                    if count > best_count:
                        c = ConsensusCounts(n, count, k)
                        prob = approx_probability(c) if mode is Criterion.APPROXIMATE else exact_probability(c)
                        needed = min(required_iterations(prob, cfg.s), cfg.max_iterations)
                    best, best_count, best_resid = model, count, resid
        if it >= needed:
            return Snapshot(best, max(best_count, 0)), it
