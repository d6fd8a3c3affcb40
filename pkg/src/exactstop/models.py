"""Minimal solvers and point-to-model distances for 2D lines and ellipses."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import _kernels


class DegenerateSampleError(ValueError):
    """The minimal sample does not determine a valid model."""


def _as_points(x) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.ascontiguousarray(pts.reshape(-1, 2))
    return pts, single


@dataclass(frozen=True)
class LineModel:
    """The line ``{x : normal . x = offset}`` with a unit normal."""

    normal: tuple[float, float]
    offset: float

    k = 2

    def __post_init__(self):
        nx, ny = (float(v) for v in self.normal)
        if abs(math.hypot(nx, ny) - 1.0) > 1e-9:
            raise ValueError(f"line normal must have unit length, got {self.normal}")
        object.__setattr__(self, "normal", (nx, ny))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def params(self) -> np.ndarray:
        return np.array([self.normal[0], self.normal[1], self.offset])

    def distance(self, x):
        return line_distance(self, x)


@dataclass(frozen=True)
class EllipseModel:
    """Ellipse given by the unit-norm conic ``a x^2 + b xy + c y^2 + d x + e y + f = 0``.

    The coefficient vector is canonicalized (unit norm, ``a >= 0``) on
    construction, so two models describing the same curve compare equal up to
    rounding.
    """

    conic: tuple[float, ...]
    _geometry: np.ndarray = field(init=False, repr=False, compare=False)

    k = 5

    def __post_init__(self):
        coef = np.array(self.conic, dtype=float).reshape(6)
        if not _kernels.canonicalize_conic(coef):
            raise ValueError("conic coefficients are all zero")
        geo = np.empty(6)
        if not _kernels.conic_geometry(coef, geo):
            raise ValueError(f"conic {tuple(coef)} is not a real ellipse")
        object.__setattr__(self, "conic", tuple(float(v) for v in coef))
        object.__setattr__(self, "_geometry", geo)

    @classmethod
    def from_geometry(cls, center, semi_axes, angle: float) -> "EllipseModel":
        """Build from centre, semi-axes ``(a, b)`` and rotation of the ``a`` axis."""
        cx, cy = center
        sa, sb = semi_axes
        cs, sn = math.cos(angle), math.sin(angle)
        # x^T R diag(1/a^2, 1/b^2) R^T x for the centred point
        ia, ib = 1.0 / (sa * sa), 1.0 / (sb * sb)
        qa = ia * cs * cs + ib * sn * sn
        qb = 2.0 * (ia - ib) * cs * sn
        qc = ia * sn * sn + ib * cs * cs
        qd = -2.0 * qa * cx - qb * cy
        qe = -2.0 * qc * cy - qb * cx
        qf = qa * cx * cx + qb * cx * cy + qc * cy * cy - 1.0
        return cls((qa, qb, qc, qd, qe, qf))

    @property
    def params(self) -> np.ndarray:
        return np.array(self.conic)

    @property
    def center(self) -> tuple[float, float]:
        return float(self._geometry[0]), float(self._geometry[1])

    @property
    def semi_axes(self) -> tuple[float, float]:
        """(major, minor) semi-axis lengths."""
        return float(self._geometry[4]), float(self._geometry[5])

    @property
    def angle(self) -> float:
        """Direction of the major axis in radians, in (-pi/2, pi/2]."""
        phi = math.atan2(self._geometry[3], self._geometry[2])
        if phi <= -math.pi / 2:
            phi += math.pi
        elif phi > math.pi / 2:
            phi -= math.pi
        return phi

    def residual(self, x) -> np.ndarray:
        """Algebraic conic value at the given point(s)."""
        pts, single = _as_points(x)
        a, b, c, d, e, f = self.conic
        u, v = pts[:, 0], pts[:, 1]
        out = a * u * u + b * u * v + c * v * v + d * u + e * v + f
        return out[0] if single else out

    def distance(self, x):
        return ellipse_distance(self, x)


ModelHypothesis = Union[LineModel, EllipseModel]


def fit_line(p1, p2) -> LineModel:
    """Line through two points. Raises DegenerateSampleError if they coincide."""
    out = np.empty(3)
    (x1, y1), (x2, y2) = np.asarray(p1, float), np.asarray(p2, float)
    if not _kernels.fit_line_into(x1, y1, x2, y2, out):
        raise DegenerateSampleError(f"points {tuple(p1)} and {tuple(p2)} coincide")
    return LineModel((out[0], out[1]), out[2])


def fit_ellipse(pts) -> EllipseModel:
    """Conic through five points, rejected unless it is a real ellipse.

    The null vector of the 5x6 design matrix is found after centring and
    scaling the sample; a rank-deficient design (e.g. collinear points) or a
    parabola/hyperbola/line-pair solution raises DegenerateSampleError.
    """
    sample = np.ascontiguousarray(np.asarray(pts, dtype=float))
    if sample.shape != (5, 2):
        raise ValueError(f"expected 5 points of shape (5, 2), got {sample.shape}")
    out = np.empty(6)
    if not _kernels.fit_conic_into(sample, out):
        raise DegenerateSampleError("sample does not determine a unique ellipse")
    return EllipseModel(tuple(out))


def fit_minimal(family: str, sample) -> ModelHypothesis:
    if family == "line":
        return fit_line(sample[0], sample[1])
    if family == "ellipse":
        return fit_ellipse(sample)
    raise ValueError(f"unknown model family {family!r}")


def line_distance(m: LineModel, x):
    pts, single = _as_points(x)
    d = np.abs(pts @ np.asarray(m.normal) - m.offset)
    return float(d[0]) if single else d


def ellipse_distance(m: EllipseModel, x):
    """Orthogonal distance from point(s) to the ellipse curve.

    Points are rotated into the ellipse's axis frame and the closest-point
    condition is solved by bisection; interior points get the distance to the
    boundary.
    """
    pts, single = _as_points(x)
    out = np.empty(pts.shape[0])
    _kernels.ellipse_distances(m._geometry, pts, out)
    return float(out[0]) if single else out
