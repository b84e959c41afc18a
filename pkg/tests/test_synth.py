import math

import numpy as np
import pytest

from conftest import deg
from plateloc.camera import CameraIntrinsics
from plateloc.errors import BehindCamera
from plateloc.pose import exact_w
from plateloc.synth import (CurveConfig, SensitivityConfig, SyntheticScene, camera_rotation, generate_segments,
                            horizontal_vp, numeric_w, numeric_xhor, project_box, project_pixels, render_scene,
                            rms_curves, sensitivity_report, to_csv, wall_segments)
from plateloc.vp import derotate_points, solve_weighted_vp

K0 = CameraIntrinsics(1000, 1000, 0, 0)


def test_fronto_parallel_corners():
    box = project_box(SyntheticScene(d=2.0, W=0.1, H=0.05, K=K0))
    np.testing.assert_allclose(np.abs(box.corners), [[25, 12.5]] * 4, atol=1e-12)
    assert box.bbox()[2] == pytest.approx(50)


def test_zero_pan_symmetry():
    c = project_box(SyntheticScene(d=3.0, phi=deg(12))).corners - [320, 240]
    assert c[0, 0] == pytest.approx(-c[1, 0]) and c[3, 0] == pytest.approx(-c[2, 0])


def test_zero_pan_vp_at_infinity():
    sc = SyntheticScene(d=2.0)
    assert numeric_xhor(project_box(sc), sc.K) == math.inf
    assert horizontal_vp(sc) is None


def test_rotation_is_orthonormal():
    R = camera_rotation(SyntheticScene(theta=deg(30), phi=deg(-10), roll=deg(7)))
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("th,phi", [(20, 10), (-35, -20), (5, 28)])
def test_edge_intersection_is_projective_vp(th, phi):
    sc = SyntheticScene(d=2.5, theta=deg(th), phi=deg(phi))
    # parallel 3D lines meet at the image of their direction: -cot(theta)/cos(phi)
    expect = -1 / math.tan(sc.theta) / math.cos(sc.phi)
    assert numeric_xhor(project_box(sc), sc.K) == pytest.approx(expect, rel=1e-9)
    assert horizontal_vp(sc)[0] == pytest.approx(expect, rel=1e-12)


def test_width_edges_agree_without_tilt():
    sc = SyntheticScene(d=2.0, theta=deg(33))
    n = sc.K.to_normalized(project_box(sc).corners)
    assert n[1, 0] - n[0, 0] == pytest.approx(n[2, 0] - n[3, 0], abs=1e-12)
    assert numeric_w(project_box(sc), sc.K) == pytest.approx(exact_w(2.0, sc.theta, sc.W), rel=1e-9)


def test_roll_is_image_rotation():
    base = SyntheticScene(d=2.0, theta=deg(25), phi=deg(8))
    for r in (-0.3, 0.1, 0.5):
        rolled = project_box(SyntheticScene(d=2.0, theta=deg(25), phi=deg(8), roll=r)).corners
        back = derotate_points(rolled, -r, base.K.principal_point)
        np.testing.assert_allclose(back, project_box(base).corners, atol=1e-9)


def test_behind_camera():
    with pytest.raises(BehindCamera):
        project_pixels(SyntheticScene(d=1.0), np.array([[0.0, 0.0, 2.0]]))


def test_noise_is_seeded():
    sc = SyntheticScene(noise_px=1.0, seed=4)
    assert np.array_equal(project_box(sc).corners, project_box(sc).corners)
    assert not np.array_equal(project_box(sc).corners, project_box(SyntheticScene()).corners)


def test_generated_bundle_meets_vp():
    sc = SyntheticScene(theta=deg(30))
    vp = horizontal_vp(sc)
    segs = generate_segments(sc, 15)
    for s in segs:
        a, b, c = s.line
        assert abs(a * vp[0] + b * vp[1] + c) < 1e-9
    fit = solve_weighted_vp([(*s.line, s.length_px) for s in segs])
    assert fit.point == pytest.approx(vp, abs=1e-9)


def test_generators_reproducible():
    sc = SyntheticScene(theta=deg(30), noise_px=1.0)
    assert generate_segments(sc, 10, 5, 0.002, seed=3) == generate_segments(sc, 10, 5, 0.002, seed=3)
    a = wall_segments(sc, rng=np.random.default_rng(2))
    assert a == wall_segments(sc, rng=np.random.default_rng(2))
    with pytest.raises(ValueError):
        generate_segments(sc, 1)


def test_wall_segments_converge():
    sc = SyntheticScene(d=2.0, theta=deg(20))
    vp = sc.K.to_pixel(horizontal_vp(sc)[None])[0]
    segs = wall_segments(sc, 10, 0)
    assert len(segs) == 10
    for s in segs:
        a, b, c = s.line
        assert abs(a * vp[0] + b * vp[1] + c) < 1e-6


def test_render_plate_box():
    sc = SyntheticScene(d=1.5, theta=deg(20))
    img, box = render_scene(sc)
    assert img.shape == (480, 640) and img.dtype == np.uint8
    x, y, w, h = box.bbox()
    inner = img[int(y) + 2:int(y + h) - 1, int(x) + 1:int(x + w) - 1]
    assert inner.min() < 60
    assert img[5, 5] > 200


def test_theta_rms_small_plate_limit():
    cfg = CurveConfig(d=1000.0, phi_grid_deg=(0.0,))
    grid = np.radians(np.arange(-45, 46, 1.0))
    want = math.degrees(math.sqrt(np.mean((np.tan(grid) - grid) ** 2)))
    assert rms_curves(cfg)[0]["theta_rms_deg"] == pytest.approx(want, abs=1e-3)


def test_theta_rms_default_band():
    row = rms_curves(CurveConfig(phi_grid_deg=(0.0,)))[0]
    assert abs(row["theta_rms_deg"] - 4.68) <= 1.5


def test_sensitivity_examples():
    rep = sensitivity_report(SensitivityConfig())
    f = 1000.0
    assert math.degrees(f / 1000.0 ** 2) == pytest.approx(0.0573, abs=1e-4)
    row = next(r for r in rep["theta_vs_xhor"] if r["x_var"] == 1000.0)
    assert row["analytic"] == pytest.approx(0.0573, abs=1e-4)
    assert row["analytic"] < 0.2
    # d = 7 m, W = 0.1 m: 50 px plate width means a 3500 px focal length
    assert rep["focal_px_depth_vs_w"] == pytest.approx(3500.0)
    row = next(r for r in rep["depth_vs_w"] if r["x_var"] == 50.0)
    assert abs(row["analytic"]) == pytest.approx(0.14, abs=1e-9)
    for table in ("theta_vs_xhor", "depth_vs_theta", "depth_vs_w"):
        for r in rep[table]:
            assert r["analytic"] == pytest.approx(r["finite_diff"], rel=1e-6, abs=1e-12)


def test_csv_format():
    text = to_csv([{"a": 1, "b": 0.5}, {"a": -2.25, "b": 1e-7}], ["a", "b"])
    assert text.splitlines() == ["a,b", "1.0,0.5", "-2.25,1e-07"]
