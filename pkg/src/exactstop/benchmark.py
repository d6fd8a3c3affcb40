"""Synthetic benchmark driver: generate -> run_dual -> aggregate.

Seeds: instance ``i`` of inlier ratio ``p`` under master seed ``m`` uses
``derive_seed(m, round(1e6 * p), i, 0)`` for data synthesis and
``derive_seed(m, round(1e6 * p), i, 1)`` for RANSAC sampling, so every
instance is reproducible on its own and results do not depend on the number
of worker threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .engine import DualRunResult, RansacConfig, run_dual
from .metrics import DEFAULT_THRESHOLDS, BenchRow, error_samples, row_from_errors
from .synth import SynthParams, derive_seed, generate

DEFAULT_N = {"line": 50, "ellipse": 100}
DEFAULT_P = (0.2, 0.3, 0.4, 0.5)


@dataclass(frozen=True)
class InstanceOutcome:
    errors_approx: np.ndarray
    errors_exact: np.ndarray
    result: DualRunResult


def p_key(p: float) -> int:
    return int(round(p * 1_000_000))


def evaluate_instance(family: str, n: int, p: float, index: int, *, seed: int = 0, s: float = 0.99,
                      max_iterations: float = 1_000_000, inlier_threshold: float = 3.0,
                      synth_options: Optional[dict] = None) -> InstanceOutcome:
    params = SynthParams(family, n, p, seed=derive_seed(seed, p_key(p), index, 0), **(synth_options or {}))
    instance = generate(params)
    cfg = RansacConfig(s=s, max_iterations=max_iterations, inlier_threshold=inlier_threshold,
                       seed=derive_seed(seed, p_key(p), index, 1))
    result = run_dual(instance, cfg)
    return InstanceOutcome(
        error_samples(instance, result.best_at_approx.model),
        error_samples(instance, result.best_at_exact.model),
        result,
    )


def run_config(family: str, n: int, p: float, instances: int, *, seed: int = 0, s: float = 0.99,
               threads: int = 1, max_iterations: float = 1_000_000, inlier_threshold: float = 3.0,
               thresholds: Sequence[float] = DEFAULT_THRESHOLDS, synth_options: Optional[dict] = None,
               progress: Optional[Callable[[int], None]] = None) -> BenchRow:
    """Benchmark one (family, n, p) configuration over ``instances`` problems."""
    if instances < 1:
        raise ValueError("need at least one instance")
    # validates feasibility before spawning any work
    SynthParams(family, n, p, **(synth_options or {}))

    def work(i):
        out = evaluate_instance(family, n, p, i, seed=seed, s=s, max_iterations=max_iterations,
                                inlier_threshold=inlier_threshold, synth_options=synth_options)
        if progress is not None:
            progress(i)
        return out

    if threads <= 1:
        outcomes = [work(i) for i in range(instances)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(work, range(instances)))

    errs_a = np.concatenate([o.errors_approx for o in outcomes])
    errs_e = np.concatenate([o.errors_exact for o in outcomes])
    nea = float(np.mean([o.result.undersampling for o in outcomes]))
    return row_from_errors(family, p, errs_a, errs_e, 100.0 * nea, instances, thresholds)


def run_benchmark(family: str, n: Optional[int] = None, p_values: Sequence[float] = DEFAULT_P,
                  instances: int = 10_000, **kwargs) -> list[BenchRow]:
    """One table row per inlier ratio, in the order given."""
    n = DEFAULT_N[family] if n is None else n
    return [run_config(family, n, p, instances, **kwargs) for p in p_values]
