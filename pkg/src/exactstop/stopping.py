"""All-inlier sampling probabilities and the RANSAC iteration counts they imply.

Two probabilities of drawing a minimal sample made only of inliers are
provided:

* ``approx_probability`` -- the classic ``p**k``, which treats the k draws as
  independent (sampling *with* replacement).
* ``exact_probability`` -- the hypergeometric ``C(I, k) / C(n, k)``, i.e. the
  true probability under uniform sampling without replacement.

The remaining functions quantify what the difference costs: required trial
counts, the success rate actually attained when stopping on the approximate
count, the relative probability error, and the undersampling ratio.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from numbers import Integral

from . import _kernels

#: Iteration count returned when the all-inlier probability is zero.
#: Compares greater than every finite count, so ``min(N, cap)`` clamps it.
UNBOUNDED = math.inf


class DegenerateInputError(ValueError):
    """Raised when a quantity is undefined for the given counts."""


class Criterion(str, enum.Enum):
    APPROXIMATE = "approximate"
    EXACT = "exact"


@dataclass(frozen=True)
class ConsensusCounts:
    """Measurement count ``n``, inlier count ``inliers`` and sample size ``k``.

    The inlier ratio is always derived as ``inliers / n``.
    """

    n: int
    inliers: int
    k: int

    def __post_init__(self):
        for name in ("n", "inliers", "k"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, Integral):
                raise TypeError(f"{name} must be an integer, got {value!r}")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0 <= self.inliers <= self.n:
            raise ValueError(f"inlier count {self.inliers} outside [0, {self.n}]")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"sample size {self.k} outside [1, {self.n}]")

    @property
    def p(self) -> float:
        return self.inliers / self.n


def _check_target(s: float) -> None:
    if not 0.0 < s < 1.0:
        raise ValueError(f"target success probability must lie in (0, 1), got {s}")


@dataclass(frozen=True)
class StopConfig:
    s: float = 0.99
    mode: Criterion = Criterion.EXACT
    max_iterations: float = 1_000_000

    def __post_init__(self):
        _check_target(self.s)
        object.__setattr__(self, "mode", Criterion(self.mode))
        if not self.max_iterations >= 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.max_iterations != UNBOUNDED and self.max_iterations != int(self.max_iterations):
            raise ValueError("max_iterations must be an integer or UNBOUNDED")

    def probability(self, c: ConsensusCounts) -> float:
        if self.mode is Criterion.APPROXIMATE:
            return approx_probability(c)
        return exact_probability(c)

    def iterations(self, c: ConsensusCounts) -> float:
        """Required iterations for ``c`` under this criterion, clamped to the cap."""
        return min(required_iterations(self.probability(c), self.s), self.max_iterations)


def approx_probability(c: ConsensusCounts) -> float:
    """``(I/n)**k``. Stays positive even when fewer than k inliers exist."""
    return _kernels.approx_prob.py_func(c.n, c.inliers, c.k)


def exact_probability(c: ConsensusCounts) -> float:
    """Probability that a uniform k-subset of n items contains only inliers.

    Evaluated as the running product ``prod_{i<k} (I - i) / (n - i)``; zero
    when ``I < k``.
    """
    return _kernels.exact_prob.py_func(c.n, c.inliers, c.k)


def iterations_real(P: float, s: float) -> float:
    """Un-rounded lower bound ``log(1 - s) / log(1 - P)`` on the trial count."""
    _check_target(s)
    if not 0.0 <= P <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {P}")
    if P == 1.0:
        return 0.0
    if P == 0.0:
        return UNBOUNDED
    return math.log1p(-s) / math.log1p(-P)


def required_iterations(P: float, s: float) -> float:
    """Smallest trial count N >= 1 with ``(1 - P)**N <= 1 - s``.

    Returns ``UNBOUNDED`` when ``P == 0`` or so small that the count
    overflows. Finite results are integral
    (returned as ``int``).
    """
    _check_target(s)
    if not 0.0 <= P <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {P}")
    n_iter = _kernels.iterations_for.py_func(P, math.log1p(-s), UNBOUNDED)
    return n_iter if n_iter == UNBOUNDED else int(n_iter)


def success_rate(p_sampled: float, p_true: float, s: float, iterations: float | None = None) -> float:
    """Success probability attained when the trial count is computed from ``p_sampled``.

    ``1 - (1 - p_true)**N`` with ``N = log(1-s)/log(1-p_sampled)`` unless an
    explicit ``iterations`` count is given.
    """
    _check_target(s)
    if iterations is None:
        if not 0.0 < p_sampled < 1.0:
            raise DegenerateInputError(
                f"sampling probability {p_sampled} gives no finite, positive exponent")
        iterations = iterations_real(p_sampled, s)
    if p_true >= 1.0:
        return 1.0
    return -math.expm1(iterations * math.log1p(-p_true))


def true_success_rate(c: ConsensusCounts, s: float, integer_iterations: bool = False) -> float:
    """Success rate actually reached when stopping on the approximate probability.

    With ``integer_iterations`` the exponent is the rounded-up count a real
    loop would execute rather than the continuous bound.
    """
    p_a = approx_probability(c)
    if p_a <= 0.0 or p_a >= 1.0:
        raise DegenerateInputError(f"approximate probability {p_a} is degenerate for {c}")
    iterations = required_iterations(p_a, s) if integer_iterations else None
    return success_rate(p_a, exact_probability(c), s, iterations)


def relative_error(c: ConsensusCounts) -> float:
    """``(P_a - P_e) / P_a``, the relative overestimate of the classic probability."""
    if c.inliers == 0:
        raise DegenerateInputError("relative error is undefined without inliers")
    p_a = approx_probability(c)
    eps = (p_a - exact_probability(c)) / p_a
    return min(1.0, max(0.0, eps))


def undersampling_ratio(c: ConsensusCounts, s: float) -> float:
    """``(N_e - N_a) / N_a`` with continuous (un-rounded) iteration counts.

    The target ``s`` cancels in the ratio but is validated for consistency.
    """
    _check_target(s)
    if c.inliers < c.k:
        raise DegenerateInputError(
            f"no all-inlier sample exists with {c.inliers} inliers and k={c.k}")
    if c.inliers == c.n:
        raise DegenerateInputError("all-inlier data: both criteria need a single iteration")
    n_a = iterations_real(approx_probability(c), s)
    n_e = iterations_real(exact_probability(c), s)
    return max(0.0, (n_e - n_a) / n_a)
