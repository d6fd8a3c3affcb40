"""Solver-free check of the success rate a stopping criterion actually delivers.

A population of ``n`` items with ``I`` inliers is sampled exactly as RANSAC
would sample it: ``N`` uniform k-subsets per trial, where ``N`` is the
iteration count the chosen criterion computes from the (known) inlier count.
A trial succeeds if any subset is all-inlier. The empirical success fraction
is then compared with the analytic prediction.

Trials are split into fixed chunks of :data:`CHUNK_TRIALS`; chunk ``j`` uses
the stream ``derive_seed(seed, j)`` so results do not depend on threading.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

from . import _kernels
from .stopping import (
    ConsensusCounts,
    Criterion,
    approx_probability,
    exact_probability,
    required_iterations,
    success_rate,
)
from .synth import derive_seed, make_rng

CHUNK_TRIALS = 1000
CSV_COLUMNS = ("n", "I", "k", "s", "mode", "trials", "success_rate", "half_width", "s_true_predicted")


@dataclass(frozen=True)
class MCResult:
    n: int
    I: int
    k: int
    s: float
    mode: str
    trials: int
    successes: int
    iterations: int
    s_true_predicted: float

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def half_width(self) -> float:
        """Normal-approximation 95% half-width of the empirical rate."""
        rate = self.success_rate
        return 1.96 * math.sqrt(rate * (1.0 - rate) / self.trials)

    @property
    def predicted_std_error(self) -> float:
        """Binomial standard error of the rate if the prediction is right."""
        q = self.s_true_predicted
        return math.sqrt(q * (1.0 - q) / self.trials)

    def row(self) -> dict:
        out = asdict(self)
        out["success_rate"] = self.success_rate
        out["half_width"] = self.half_width
        return {col: out[col] for col in CSV_COLUMNS}


def predicted_success(c: ConsensusCounts, s: float, mode: Criterion) -> tuple[int, float]:
    """Iterations run under ``mode`` and the resulting analytic success probability."""
    mode = Criterion(mode)
    p_e = exact_probability(c)
    p_used = approx_probability(c) if mode is Criterion.APPROXIMATE else p_e
    n_iter = required_iterations(p_used, s)
    return n_iter, success_rate(p_used, p_e, s, iterations=n_iter)


def measure_success_rate(n: int, I: int, k: int, s: float, mode, trials: int, seed: int = 0,
                         threads: int = 1) -> MCResult:
    """Empirical success rate of ``trials`` independent criterion-limited sampling runs."""
    c = ConsensusCounts(n, I, k)
    if I < k:
        raise ValueError(f"no all-inlier {k}-subset exists with {I} inliers")
    if trials < 1:
        raise ValueError("trials must be positive")
    mode = Criterion(mode)
    n_iter, predicted = predicted_success(c, s, mode)

    chunks = [(j, min(CHUNK_TRIALS, trials - j * CHUNK_TRIALS))
              for j in range(math.ceil(trials / CHUNK_TRIALS))]

    def work(chunk):
        j, size = chunk
        return _kernels.count_successes(make_rng(derive_seed(seed, j)), n, I, k, n_iter, size)

    if threads <= 1:
        hits = sum(map(work, chunks))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hits = sum(pool.map(work, chunks))
    return MCResult(n, I, k, s, mode.value, trials, int(hits), int(n_iter), predicted)


def results_to_csv(results: Sequence[MCResult]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for res in results:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in res.row().items()})
    return buf.getvalue()
