import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from exactstop.models import (
    DegenerateSampleError,
    EllipseModel,
    LineModel,
    ellipse_distance,
    fit_ellipse,
    fit_line,
    line_distance,
)

coord = st.floats(-100, 100, allow_nan=False)


def svd_conic(pts):
    """Independent oracle: right singular vector of the raw 5x6 design matrix."""
    x, y = np.asarray(pts).T
    design = np.column_stack([x * x, x * y, y * y, x, y, np.ones_like(x)])
    v = np.linalg.svd(design)[2][-1]
    v = v / np.linalg.norm(v)
    return v if v[0] >= 0 else -v


def ellipse_points(center, axes, angle, thetas):
    cs, sn = math.cos(angle), math.sin(angle)
    local = np.column_stack([axes[0] * np.cos(thetas), axes[1] * np.sin(thetas)])
    return np.asarray(center) + local @ np.array([[cs, -sn], [sn, cs]]).T


def random_ellipse(rng):
    center = rng.uniform(-40, 40, 2)
    axes = rng.uniform(5, 60, 2)
    return center, axes, rng.uniform(0, math.pi)


# --- lines ------------------------------------------------------------------

def test_fit_line_x_axis():
    m = fit_line((0, 0), (1, 0))
    assert m.normal == (0.0, 1.0)
    assert m.offset == 0.0


def test_fit_line_diagonal():
    m = fit_line((1, 1), (2, 2))
    assert abs(m.offset) < 1e-12
    assert abs(-m.normal[0] - m.normal[1]) < 1e-12  # parallel to (1, -1)


def test_fit_line_coincident_points():
    with pytest.raises(DegenerateSampleError):
        fit_line((0, 0), (0, 0))


@given(coord, coord, coord, coord)
def test_fit_line_passes_through_points(x1, y1, x2, y2):
    assume(math.hypot(x2 - x1, y2 - y1) > 1e-6)
    m = fit_line((x1, y1), (x2, y2))
    assert line_distance(m, (x1, y1)) < 1e-9
    assert line_distance(m, (x2, y2)) < 1e-9
    swapped = fit_line((x2, y2), (x1, y1))
    assert swapped.normal == m.normal
    assert swapped.offset == pytest.approx(m.offset, abs=1e-9)


@pytest.mark.parametrize("model, point, expected", [
    (LineModel((0, 1), 0), (3, 2), 2.0),
    (LineModel((0, 1), 0), (7, 0), 0.0),
    (LineModel((math.sqrt(0.5), -math.sqrt(0.5)), 0), (1, 0), math.sqrt(2) / 2),
])
def test_line_distance(model, point, expected):
    assert line_distance(model, point) == pytest.approx(expected, abs=1e-12)


def test_line_requires_unit_normal():
    with pytest.raises(ValueError):
        LineModel((1, 1), 0)


# --- ellipse fitting --------------------------------------------------------

def test_fit_unit_circle():
    t = np.deg2rad([0, 72, 144, 216, 288])
    m = fit_ellipse(np.column_stack([np.cos(t), np.sin(t)]))
    expected = np.array([1, 0, 1, 0, 0, -1]) / math.sqrt(3)
    assert np.allclose(m.conic, expected, atol=1e-12)


def test_fit_collinear_is_degenerate():
    pts = np.column_stack([np.arange(5.0), 2 * np.arange(5.0) + 1])
    with pytest.raises(DegenerateSampleError):
        fit_ellipse(pts)


def test_fit_hyperbola_sample_rejected():
    # points on x*y = 1
    x = np.array([0.5, 1.0, 2.0, -1.0, -3.0])
    with pytest.raises(DegenerateSampleError):
        fit_ellipse(np.column_stack([x, 1 / x]))


def test_fit_axis_aligned_ellipse():
    t = np.array([0.1, 1.3, 2.0, 3.9, 5.5])
    pts = np.column_stack([5 * np.cos(t), 3 * np.sin(t)])
    m = fit_ellipse(pts)
    assert np.max(np.abs(m.residual(pts))) < 1e-6
    expected = np.array([1 / 25, 0, 1 / 9, 0, 0, -1])
    expected /= np.linalg.norm(expected)
    assert np.allclose(m.conic, expected, atol=1e-6)
    assert np.allclose(m.conic, svd_conic(pts), atol=1e-9)


def test_fit_matches_svd_oracle_on_random_ellipses():
    rng = np.random.default_rng(3)
    for _ in range(200):
        center, axes, angle = random_ellipse(rng)
        pts = ellipse_points(center, axes, angle, rng.uniform(0, 2 * math.pi, 5))
        m = fit_ellipse(pts)
        assert np.max(np.abs(m.residual(pts))) < 1e-6
        assert np.allclose(m.conic, svd_conic(pts), atol=1e-7)


def test_refitting_consistency():
    rng = np.random.default_rng(11)
    for _ in range(200):
        center, axes, angle = random_ellipse(rng)
        pts = ellipse_points(center, axes, angle, rng.uniform(0, 2 * math.pi, 25))
        m = fit_ellipse(pts[:5])
        assert np.max(ellipse_distance(m, pts[5:])) < 1e-6


def test_fit_invariant_under_permutation():
    rng = np.random.default_rng(5)
    for _ in range(20):
        center, axes, angle = random_ellipse(rng)
        pts = ellipse_points(center, axes, angle, rng.uniform(0, 2 * math.pi, 5))
        ref = np.array(fit_ellipse(pts).conic)
        for perm in itertools.permutations(range(5)):
            assert np.allclose(fit_ellipse(pts[list(perm)]).conic, ref, atol=1e-9, rtol=0)


def test_from_geometry_round_trip():
    m = EllipseModel.from_geometry((3, -2), (40, 15), 0.7)
    assert m.center == pytest.approx((3, -2))
    assert m.semi_axes == pytest.approx((40, 15))
    assert m.angle == pytest.approx(0.7)
    assert np.linalg.norm(m.conic) == pytest.approx(1.0)
    assert m.conic[0] >= 0


def test_non_ellipse_conic_rejected():
    with pytest.raises(ValueError):
        EllipseModel((1, 0, -1, 0, 0, -1))  # hyperbola
    with pytest.raises(ValueError):
        EllipseModel((1, 0, 1, 0, 0, 1))  # empty (imaginary) ellipse


# --- ellipse distance -------------------------------------------------------

UNIT_CIRCLE = EllipseModel((1, 0, 1, 0, 0, -1))


@pytest.mark.parametrize("model, point, expected", [
    (UNIT_CIRCLE, (2, 0), 1.0),
    (UNIT_CIRCLE, (0, 0), 1.0),
    (EllipseModel.from_geometry((0, 0), (2, 1), 0.0), (3, 0), 1.0),
    (EllipseModel.from_geometry((0, 0), (2, 1), 0.0), (0, 0), 1.0),
    (EllipseModel.from_geometry((0, 0), (2, 1), 0.0), (0, -4), 3.0),
])
def test_ellipse_distance_examples(model, point, expected):
    assert ellipse_distance(model, point) == pytest.approx(expected, abs=1e-12)


def dense_boundary_distance(model, point, samples=200_000):
    center, axes, angle = model.center, model.semi_axes, model.angle
    t = np.linspace(0, 2 * math.pi, samples, endpoint=False)
    boundary = ellipse_points(center, axes, angle, t)
    return np.min(np.hypot(*(boundary - point).T))


def test_ellipse_distance_against_dense_search():
    rng = np.random.default_rng(21)
    for _ in range(100):
        model = EllipseModel.from_geometry(*random_ellipse(rng))
        point = rng.uniform(-100, 100, 2)
        assert ellipse_distance(model, point) == pytest.approx(
            dense_boundary_distance(model, point), abs=1e-5)


@settings(max_examples=200)
@given(st.floats(1, 80), st.floats(1, 80), st.floats(0, math.pi), coord, coord)
def test_ellipse_distance_is_attained_by_a_boundary_point(a, b, angle, x, y):
    """Distance is a lower bound on the distance to nearby boundary samples and is attained."""
    model = EllipseModel.from_geometry((0, 0), (a, b), angle)
    d = ellipse_distance(model, (x, y))
    t = np.linspace(0, 2 * math.pi, 20_000, endpoint=False)
    boundary = ellipse_points((0, 0), model.semi_axes, model.angle, t)
    brute = np.min(np.hypot(boundary[:, 0] - x, boundary[:, 1] - y))
    assert d <= brute + 1e-9
    step = 2 * math.pi * max(a, b) / 20_000
    assert brute - d <= step


def test_ellipse_distance_vectorized():
    pts = np.array([[2.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
    assert np.allclose(ellipse_distance(UNIT_CIRCLE, pts), [1.0, 1.0, 0.0])
    assert np.allclose(UNIT_CIRCLE.distance(pts), [1.0, 1.0, 0.0])
