import math

import numpy as np
import pytest
from scipy import stats

from exactstop.models import EllipseModel, LineModel
from exactstop.synth import InfeasibleConfigError, ProblemInstance, SynthParams, derive_seed, generate


def test_line_instance_has_exact_inlier_count():
    inst = generate(SynthParams("line", 50, 0.2, seed=7))
    assert inst.inlier_flags.sum() == 10
    assert len(inst.inlier_flags) == 50
    assert inst.clean_points.shape == (10, 2)
    assert isinstance(inst.truth, LineModel)


def test_generation_is_deterministic():
    a = generate(SynthParams("ellipse", 100, 0.3, seed=1))
    b = generate(SynthParams("ellipse", 100, 0.3, seed=1))
    assert a.to_json() == b.to_json()
    assert np.array_equal(a.measurements, b.measurements)


def test_different_seeds_differ():
    a = generate(SynthParams("ellipse", 100, 0.3, seed=1))
    b = generate(SynthParams("ellipse", 100, 0.3, seed=2))
    assert not np.array_equal(a.measurements, b.measurements)


def test_too_few_inliers_rejected():
    with pytest.raises(InfeasibleConfigError, match="k\\+1=6"):
        SynthParams("ellipse", 100, 0.04)
    with pytest.raises(InfeasibleConfigError):
        SynthParams("line", 10, 0.2)
    SynthParams("line", 15, 0.2)


@pytest.mark.parametrize("family", ["line", "ellipse"])
def test_instance_structure(family):
    for seed in range(50):
        inst = generate(SynthParams(family, 60, 0.4, seed=seed))
        w = inst.params.box_half_width
        assert np.all(np.abs(inst.clean_points) <= w)
        assert np.all(np.abs(inst.measurements[~inst.inlier_flags]) <= w)
        assert np.max(inst.truth.distance(inst.clean_points)) < 1e-6
        det = np.linalg.det(inst.noise_cov)
        assert 0.5 <= det <= 2.0
        assert np.allclose(inst.noise_cov, inst.noise_cov[0, 0] * np.eye(2))


def test_line_segments_are_long_enough():
    for seed in range(100):
        inst = generate(SynthParams("line", 50, 0.5, seed=seed))
        span = np.ptp(inst.clean_points, axis=0)
        assert math.hypot(*span) <= 2 * math.sqrt(2) * 100
        assert isinstance(inst.truth, LineModel)


def test_ellipses_fit_in_box():
    for seed in range(200):
        inst = generate(SynthParams("ellipse", 50, 0.5, seed=seed))
        m = inst.truth
        assert isinstance(m, EllipseModel)
        t = np.linspace(0, 2 * math.pi, 720)
        (cx, cy), (a, b), phi = m.center, m.semi_axes, m.angle
        xs = cx + a * np.cos(t) * math.cos(phi) - b * np.sin(t) * math.sin(phi)
        ys = cy + a * np.cos(t) * math.sin(phi) + b * np.sin(t) * math.cos(phi)
        assert np.max(np.abs(xs)) <= 100 + 1e-9 and np.max(np.abs(ys)) <= 100 + 1e-9


def test_whitened_noise_is_unit_variance():
    residuals = []
    for seed in range(2000):
        inst = generate(SynthParams("line", 100, 0.5, seed=seed))
        r = inst.measurements[inst.inlier_flags] - inst.clean_points
        residuals.append(r / inst.sigma)
    r = np.concatenate(residuals)
    assert r.shape[0] >= 100_000
    assert np.var(r[:, 0]) == pytest.approx(1.0, rel=0.02)
    assert np.var(r[:, 1]) == pytest.approx(1.0, rel=0.02)


def test_noise_determinant_uniform():
    dets = [np.linalg.det(generate(SynthParams("line", 20, 0.5, seed=s)).noise_cov) for s in range(3000)]
    result = stats.kstest(dets, stats.uniform(loc=0.5, scale=1.5).cdf)
    assert result.pvalue > 0.01


def test_json_round_trip():
    inst = generate(SynthParams("ellipse", 40, 0.5, seed=4))
    back = ProblemInstance.from_json(inst.to_json())
    assert back.params == inst.params
    assert np.array_equal(back.measurements, inst.measurements)
    assert np.array_equal(back.inlier_flags, inst.inlier_flags)
    assert np.allclose(back.truth.conic, inst.truth.conic, atol=1e-15)


def test_derived_seeds_are_distinct():
    seeds = {derive_seed(0, p, i, s) for p in range(3) for i in range(100) for s in range(2)}
    assert len(seeds) == 600
    assert derive_seed(5, 1, 2) == derive_seed(5, 1, 2)
