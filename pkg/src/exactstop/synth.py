"""Synthetic line and ellipse fitting problems with uniform outliers.

Each instance lives in the box ``[-w, w]^2``. Ground-truth points are drawn
from a random segment or ellipse inside the box, corrupted by isotropic
Gaussian noise ``N(0, sigma^2 I)`` whose covariance determinant is uniform in
``noise_det_range``; the remaining measurements are uniform in the box.

Random draws come from a Philox generator keyed by the instance seed, in the
fixed order: noise determinant, model, clean points, noise, outliers, layout.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .models import EllipseModel, LineModel, ModelHypothesis, fit_line

SAMPLE_SIZE = {"line": 2, "ellipse": 5}


class InfeasibleConfigError(ValueError):
    """The configuration cannot produce a verifiable instance."""


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed directly by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & 0xFFFF_FFFF_FFFF_FFFF))


def derive_seed(master: int, *path: int) -> int:
    """64-bit child seed for ``path`` (e.g. instance index, stream id) under ``master``."""
    seq = np.random.SeedSequence(int(master), spawn_key=tuple(int(p) for p in path))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SynthParams:
    family: str
    n: int
    p: float
    seed: int = 0
    box_half_width: float = 100.0
    noise_det_range: tuple[float, float] = (0.5, 2.0)
    min_segment_length: float = 20.0
    center_fraction: float = 0.5
    semi_axis_range: tuple[float, float] = (10.0, 60.0)

    def __post_init__(self):
        if self.family not in SAMPLE_SIZE:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"inlier ratio {self.p} outside [0, 1]")
        if not self.box_half_width > 0:
            raise ValueError("box_half_width must be positive")
        lo, hi = self.noise_det_range
        if not 0 < lo <= hi:
            raise ValueError(f"noise determinant range {self.noise_det_range} invalid")
        object.__setattr__(self, "noise_det_range", (float(lo), float(hi)))
        object.__setattr__(self, "semi_axis_range", tuple(map(float, self.semi_axis_range)))
        k = self.k
        if self.inliers < k + 1:
            raise InfeasibleConfigError(
                f"{self.family} with n={self.n}, p={self.p} has {self.inliers} inliers; "
                f"verifying a hypothesis needs at least k+1={k + 1}")

    @property
    def k(self) -> int:
        return SAMPLE_SIZE[self.family]

    @property
    def inliers(self) -> int:
        return int(round(self.n * self.p))


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    params: SynthParams
    measurements: np.ndarray
    inlier_flags: np.ndarray
    clean_points: np.ndarray
    noise_cov: np.ndarray
    truth: ModelHypothesis

    def __post_init__(self):
        for arr in (self.measurements, self.inlier_flags, self.clean_points, self.noise_cov):
            arr.setflags(write=False)

    @property
    def family(self) -> str:
        return self.params.family

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def sigma(self) -> float:
        return math.sqrt(self.noise_cov[0, 0])

    def to_json(self) -> str:
        if isinstance(self.truth, LineModel):
            truth = {"normal": list(self.truth.normal), "offset": self.truth.offset}
        else:
            truth = {"conic": list(self.truth.conic)}
        doc = {
            "params": asdict(self.params),
            "measurements": self.measurements.tolist(),
            "inlier_flags": self.inlier_flags.astype(int).tolist(),
            "clean_points": self.clean_points.tolist(),
            "noise_cov": self.noise_cov.tolist(),
            "truth": truth,
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "ProblemInstance":
        doc = json.loads(text)
        params = doc["params"]
        for key in ("noise_det_range", "semi_axis_range"):
            params[key] = tuple(params[key])
        params = SynthParams(**params)
        truth = doc["truth"]
        if params.family == "line":
            model = LineModel(tuple(truth["normal"]), truth["offset"])
        else:
            model = EllipseModel(tuple(truth["conic"]))
        return cls(
            params=params,
            measurements=np.array(doc["measurements"], dtype=float).reshape(-1, 2),
            inlier_flags=np.array(doc["inlier_flags"], dtype=bool),
            clean_points=np.array(doc["clean_points"], dtype=float).reshape(-1, 2),
            noise_cov=np.array(doc["noise_cov"], dtype=float),
            truth=model,
        )


def _random_segment(rng, params):
    w = params.box_half_width
    while True:
        a, b = rng.uniform(-w, w, size=(2, 2))
        if math.hypot(*(b - a)) >= params.min_segment_length:
            return a, b


def _random_ellipse(rng, params):
    w = params.box_half_width
    center = rng.uniform(-params.center_fraction * w, params.center_fraction * w, size=2)
    axes = rng.uniform(*params.semi_axis_range, size=2)
    angle = rng.uniform(0.0, math.pi)
    cs, sn = math.cos(angle), math.sin(angle)
    half_x = math.hypot(axes[0] * cs, axes[1] * sn)
    half_y = math.hypot(axes[0] * sn, axes[1] * cs)
    shrink = min(1.0, (w - abs(center[0])) / half_x, (w - abs(center[1])) / half_y)
    return center, axes * shrink, angle


def generate(params: SynthParams) -> ProblemInstance:
    """Draw one problem instance; deterministic in ``params``."""
    rng = make_rng(params.seed)
    w = params.box_half_width
    n, n_in = params.n, params.inliers

    det = rng.uniform(*params.noise_det_range)
    sigma2 = math.sqrt(det)  # det(sigma^2 I_2) = sigma^4

    if params.family == "line":
        start, end = _random_segment(rng, params)
        truth = fit_line(start, end)
        t = rng.uniform(0.0, 1.0, size=n_in)
        clean = start + t[:, None] * (end - start)
    else:
        center, axes, angle = _random_ellipse(rng, params)
        truth = EllipseModel.from_geometry(center, axes, angle)
        theta = rng.uniform(0.0, 2.0 * math.pi, size=n_in)
        local = np.column_stack([axes[0] * np.cos(theta), axes[1] * np.sin(theta)])
        rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
        clean = center + local @ rot.T
    clean = np.clip(clean, -w, w)

    noisy = clean + math.sqrt(sigma2) * rng.standard_normal(size=(n_in, 2))
    outliers = rng.uniform(-w, w, size=(n - n_in, 2))

    order = rng.permutation(n)
    flags = np.zeros(n, dtype=bool)
    flags[order[:n_in]] = True
    measurements = np.empty((n, 2))
    measurements[flags] = noisy
    measurements[~flags] = outliers

    return ProblemInstance(
        params=params,
        measurements=measurements,
        inlier_flags=flags,
        clean_points=clean,
        noise_cov=sigma2 * np.eye(2),
        truth=truth,
    )
