import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import deg, plate_landmark
from plateloc.camera import CameraIntrinsics
from plateloc.errors import DomainError, InvalidWidth
from plateloc.ocr import OcrBox
from plateloc.pose import (THETA_LIMIT, d_depth_d_theta, d_depth_d_w, d_theta_d_xhor, estimate_aov,
                           estimate_depth, exact_w, exact_xhor, localize, ocr_width_normalized, refine_pose,
                           tilted_w, tilted_xhor)
from plateloc.synth import SyntheticScene, numeric_w, numeric_xhor, project_box
from plateloc.vp import VanishingPoint

thetas = st.floats(-45, 45).filter(lambda t: abs(t) > 1e-3).map(math.radians)
depths = st.floats(0.5, 40)
widths = st.floats(0.05, 1.0)


def central(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


def test_width_normalized():
    assert ocr_width_normalized(OcrBox("A", 0, 0, 100, 10), CameraIntrinsics(1000, 1000, 0, 0)) == 0.1


def test_width_from_projection():
    sc = SyntheticScene(d=2.0, W=0.1)
    x, y, w, h = project_box(sc).bbox()
    assert ocr_width_normalized(OcrBox("A", x, y, w, h), sc.K) == pytest.approx(0.05, abs=1e-9)


def test_aov_examples():
    assert estimate_aov(math.inf) == (0.0, False)
    assert estimate_aov(None) == (0.0, False)
    assert estimate_aov(VanishingPoint(direction=0.0)) == (0.0, False)
    assert estimate_aov(-5.0) == (pytest.approx(0.2), False)
    assert estimate_aov(VanishingPoint(-5.0, 0.1))[0] == pytest.approx(0.2)


def test_aov_clamped():
    theta, clamped = estimate_aov(-0.5)
    assert clamped and theta == THETA_LIMIT
    assert estimate_aov(0.3) == (-THETA_LIMIT, True)


def test_aov_error_is_tan_minus_theta():
    sc = SyntheticScene(d=1.5, theta=deg(20), W=0.1)
    est, _ = estimate_aov(numeric_xhor(project_box(sc), sc.K))
    assert abs((est - sc.theta) - (math.tan(sc.theta) - sc.theta)) < deg(0.1)


@pytest.mark.xfail(strict=True, reason="closed-form x_hor carries an O(W/d) offset; 0.235 deg here")
def test_aov_error_from_closed_form_xhor():
    th = deg(20)
    est, _ = estimate_aov(exact_xhor(1.5, th, 0.1))
    assert abs((est - th) - (math.tan(th) - th)) < deg(0.1)


def test_xhor_examples():
    assert exact_xhor(2, 0.0, 0.1) == math.inf
    assert exact_xhor(2, deg(45), 0.1) == pytest.approx(-1.01770, abs=1e-4)
    assert exact_xhor(1e4, deg(30), 0.1) == pytest.approx(-1 / math.tan(deg(30)), abs=1e-4)


@settings(max_examples=200, deadline=None)
@given(depths, thetas, widths)
def test_xhor_sign(d, th, W):
    assume(d > W)
    assert math.copysign(1, exact_xhor(d, th, W)) == -math.copysign(1, th)


@settings(max_examples=200, deadline=None)
@given(st.floats(-45, 45).filter(lambda t: abs(t) > 0.5).map(math.radians))
def test_xhor_small_plate_limit(th):
    assert abs(-1 / exact_xhor(1.0, th, 1e-6) - math.tan(th)) < 1e-6


def test_w_examples():
    assert exact_w(2, 0.0, 0.1) == pytest.approx(0.05)
    assert exact_w(2, deg(30), 0.1) == pytest.approx(0.043308, abs=1e-5)
    assert exact_w(2, deg(30), 0.1) == exact_w(2, deg(-30), 0.1)


@pytest.mark.parametrize("th", [0, 10, 30, -40])
def test_w_matches_projection(th):
    sc = SyntheticScene(d=2.0, theta=deg(th), W=0.1, H=0.05)
    assert numeric_w(project_box(sc), sc.K) == pytest.approx(exact_w(2.0, deg(th), 0.1), rel=1e-9)


def test_depth_examples():
    assert estimate_depth(0.0, 0.1, 0.05) == pytest.approx(2.0)
    assert estimate_depth(deg(30), 0.1, exact_w(2, deg(30), 0.1)) == pytest.approx(2.0, abs=1e-9)
    assert estimate_depth(0.0, 0.1, 0.025) == pytest.approx(2 * estimate_depth(0.0, 0.1, 0.05))
    with pytest.raises(InvalidWidth):
        estimate_depth(0.0, 0.1, 0.0)
    with pytest.raises(DomainError):
        estimate_depth(math.pi / 2, 0.1, 0.1)


@settings(max_examples=300, deadline=None)
@given(depths, thetas, widths)
def test_depth_round_trip(d, th, W):
    assert estimate_depth(th, W, exact_w(d, th, W)) == pytest.approx(d, rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(thetas, widths, st.floats(0.001, 1.0), st.floats(1.01, 3))
def test_depth_decreasing_in_w_and_even(th, W, w, k):
    assert estimate_depth(th, W, w * k) < estimate_depth(th, W, w)
    assert estimate_depth(-th, W, w) == estimate_depth(th, W, w)


@settings(max_examples=200, deadline=None)
@given(depths, thetas, widths, st.floats(0.02, 0.5))
def test_tilt_reduces_at_zero(d, th, W, H):
    assert tilted_xhor(d, th, 0.0, W, H) == pytest.approx(exact_xhor(d, th, W), rel=1e-12)
    assert tilted_w(d, th, 0.0, W, H) == pytest.approx(exact_w(d, th, W), rel=1e-12)


def test_tilted_w_is_even_in_phi():
    assert tilted_w(2.0, deg(20), deg(-12), 0.1, 0.05) == tilted_w(2.0, deg(20), deg(12), 0.1, 0.05)


@pytest.mark.parametrize("phi", [10, -10, 25, -25])
def test_tilted_w_matches_projection(phi):
    sc = SyntheticScene(d=2.0, theta=deg(20), phi=deg(phi), W=0.1, H=0.05)
    assert numeric_w(project_box(sc), sc.K, sc.phi) == pytest.approx(
        tilted_w(2.0, sc.theta, sc.phi, 0.1, 0.05), rel=1e-6)


@pytest.mark.parametrize("phi", [0, 10, -10])
def test_tilted_xhor_converges_to_projection_for_small_plates(phi):
    # the closed form carries an O(W/d) offset from the projective VP; it vanishes with W
    sc_args = dict(d=2.0, theta=deg(20), phi=deg(phi))
    gaps = []
    for W in (0.1, 0.01, 0.001):
        sc = SyntheticScene(W=W, H=W / 2, **sc_args)
        gaps.append(abs(tilted_xhor(2.0, sc.theta, sc.phi, W, W / 2) - numeric_xhor(project_box(sc), sc.K)))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3 * abs(numeric_xhor(project_box(SyntheticScene(**sc_args)), DEFAULT_K()))


def DEFAULT_K():
    return SyntheticScene().K


def test_refine_recovers_truth():
    d, th, W = 2.0, deg(25), 0.1
    x, w = exact_xhor(d, th, W), exact_w(d, th, W)
    th0, _ = estimate_aov(x)
    d0 = estimate_depth(th0, W, w)
    th1, d1, ok = refine_pose(th0, d0, w, x, W)
    assert ok
    assert th1 == pytest.approx(th, abs=1e-8) and d1 == pytest.approx(d, abs=1e-8)


def test_refine_at_infinity_untouched():
    assert refine_pose(0.0, 2.0, 0.05, math.inf, 0.1) == (0.0, 2.0, False)


@pytest.mark.parametrize("seed", range(20))
def test_refine_noisy_inputs(seed):
    rng = np.random.default_rng(seed)
    d, th, W = rng.uniform(1, 5), deg(rng.uniform(-40, 40)), 0.1
    x = exact_xhor(d, th, W) * (1 + rng.uniform(-0.05, 0.05))
    w = exact_w(d, th, W)
    th0, _ = estimate_aov(x)
    d0 = estimate_depth(th0, W, w)
    th1, d1, ok = refine_pose(th0, d0, w, x, W)
    if ok:
        # converged: the refined pose reproduces both measurements
        assert exact_xhor(d1, th1, W) == pytest.approx(x, rel=1e-8)
        assert exact_w(d1, th1, W) == pytest.approx(w, rel=1e-8)
    else:
        assert (th1, d1) == (th0, d0)


def test_localize_examples():
    lm = plate_landmark()
    assert localize(0.0, 2.0, lm) == pytest.approx((5.0, 12.0))
    near_wall = localize(math.pi / 2 - 1e-9, 2.0, lm)
    assert near_wall[1] == pytest.approx(10.0, abs=1e-8)
    with pytest.raises(DomainError):
        localize(0.0, 0.0, lm)


@settings(max_examples=200, deadline=None)
@given(thetas, depths, st.floats(0, 2 * math.pi))
def test_localize_distance(th, d, a):
    lm = plate_landmark(anchor=(1.0, -3.0, 2.0), normal=(math.cos(a), math.sin(a)))
    x, y = localize(th, d, lm)
    assert math.hypot(x - 1.0, y + 3.0) == pytest.approx(d, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.2, 20).map(lambda v: v * np.random.default_rng(0).choice([-1, 1])))
def test_dtheta_dxhor(x):
    assert d_theta_d_xhor(x) == pytest.approx(central(lambda v: -1 / v, x, 1e-6 * abs(x)), rel=1e-6)


@settings(max_examples=200, deadline=None)
@given(st.floats(-60, 60).map(math.radians), widths, st.floats(0.005, 0.5))
def test_depth_derivatives(th, W, w):
    f_th = central(lambda t: estimate_depth(t, W, w), th, 1e-6)
    f_w = central(lambda v: estimate_depth(th, W, v), w, 1e-6 * w)
    assert d_depth_d_theta(th, W, w) == pytest.approx(f_th, rel=1e-6, abs=1e-9 * W / w)
    assert d_depth_d_w(th, W, w) == pytest.approx(f_w, rel=1e-6)
