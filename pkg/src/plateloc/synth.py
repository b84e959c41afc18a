"""Synthetic ground truth: a parametric camera looking at a character plate.

The camera model is built from explicit rotation matrices and the
projections are intersected numerically, so everything here is an
independent check on the closed forms in :mod:`plateloc.pose`.  The
analysis tables at the bottom (:func:`rms_curves`, :func:`sensitivity_report`)
do use the closed forms; they reproduce the error and sensitivity curves.
"""
from dataclasses import dataclass, field
import csv
import io
import math

import numpy as np
from PIL import Image, ImageDraw

from . import pose
from .camera import CameraIntrinsics
from .errors import BehindCamera
from .linesegs import LineSegment

DEFAULT_K = CameraIntrinsics(1000.0, 1000.0, 320.0, 240.0)


@dataclass(frozen=True)
class SyntheticScene:
    d: float = 1.5
    theta: float = 0.0
    phi: float = 0.0
    roll: float = 0.0
    W: float = 0.1
    H: float = 0.05
    K: CameraIntrinsics = DEFAULT_K
    image_size: tuple = (640, 480)
    noise_px: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (self.d > 0 and self.W > 0 and self.H > 0 and abs(self.theta) < math.pi / 2):
            raise ValueError("scene needs d, W, H > 0 and |theta| < pi/2")


@dataclass(frozen=True)
class ProjectedBox:
    corners: np.ndarray  # (4, 2) pixels: top-left, top-right, bottom-right, bottom-left

    def bbox(self):
        """Axis-aligned (x_min, y_min, width, height) of the corners."""
        lo = self.corners.min(axis=0)
        hi = self.corners.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0] - lo[0]), float(hi[1] - lo[1])


def rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0, 0], [0, c, -s], [0, s, c]])


def rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


def camera_rotation(scene):
    """R = R_roll R_tilt R_pan.

    At zero tilt and roll the factors are the matrices of the derivation:
    R_roll = I, R_tilt = diag(1, -1, -1) and the pan rotation about y.  Tilt
    phi is a further rotation about the camera x-axis, roll about its z-axis.
    """
    c, s = math.cos(scene.theta), math.sin(scene.theta)
    r_pan = np.array([[c, 0, -s], [0, 1.0, 0], [s, 0, c]])
    r_tilt = rot_x(scene.phi) @ np.diag([1.0, -1.0, -1.0])
    r_roll = rot_z(scene.roll)
    return r_roll @ r_tilt @ r_pan


def camera_center(scene):
    return np.array([scene.d * math.sin(scene.theta), 0.0, scene.d * math.cos(scene.theta)])


def to_camera(scene, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return (camera_rotation(scene) @ (X - camera_center(scene)).T).T


def project_normalized(scene, X):
    Xc = to_camera(scene, X)
    if np.any(Xc[:, 2] <= 0):
        raise BehindCamera("point behind the camera")
    return Xc[:, :2] / Xc[:, 2:3]


def project_pixels(scene, X):
    return scene.K.to_pixel(project_normalized(scene, X))


def box_corners_3d(W, H):
    return np.array([[-W / 2, H / 2, 0], [W / 2, H / 2, 0], [W / 2, -H / 2, 0], [-W / 2, -H / 2, 0]])


def project_box(scene, rng=None):
    """Pixel corners of the W x H plate, with optional Gaussian pixel noise."""
    px = project_pixels(scene, box_corners_3d(scene.W, scene.H))
    if scene.noise_px > 0:
        rng = rng if rng is not None else np.random.default_rng(scene.seed)
        px = px + rng.normal(0.0, scene.noise_px, px.shape)
    return ProjectedBox(px)


def _hom(p):
    return np.array([p[0], p[1], 1.0])


def numeric_xhor(box, K):
    """x of the intersection of edges x1-x2 and x4-x3, normalized; inf if parallel."""
    n = K.to_normalized(box.corners)
    top = np.cross(_hom(n[0]), _hom(n[1]))
    bottom = np.cross(_hom(n[3]), _hom(n[2]))
    v = np.cross(top, bottom)
    scale = np.linalg.norm(v[:2])
    if abs(v[2]) <= 1e-15 * scale:
        return math.inf
    return float(v[0] / v[2])


def numeric_vp(box, K):
    n = K.to_normalized(box.corners)
    v = np.cross(np.cross(_hom(n[0]), _hom(n[1])), np.cross(_hom(n[3]), _hom(n[2])))
    if abs(v[2]) <= 1e-15 * np.linalg.norm(v[:2]):
        return None
    return v[:2] / v[2]


def numeric_w(box, K, phi=0.0):
    """Box width in normalized units: x2 - x1 for phi > 0, x3 - x4 for phi < 0."""
    n = K.to_normalized(box.corners)
    if phi > 0:
        return float(n[1, 0] - n[0, 0])
    if phi < 0:
        return float(n[2, 0] - n[3, 0])
    return float(n[1, 0] - n[0, 0])


def horizontal_vp(scene):
    """Normalized image of the wall's horizontal direction, or None at infinity."""
    v = camera_rotation(scene) @ np.array([1.0, 0, 0])
    if abs(v[2]) < 1e-15:
        return None
    return v[:2] / v[2]


def vertical_vp(scene):
    v = camera_rotation(scene) @ np.array([0, 1.0, 0])
    if abs(v[2]) < 1e-15:
        return None
    return v[:2] / v[2]


def generate_segments(scene, n_inliers, n_outliers=0, noise=0.0, vp="scene", seed=None,
                      length=(0.15, 0.5), extent=0.3):
    """Normalized segments on random lines through a vanishing point, plus outliers.

    ``vp`` is "scene" (the scene's projective horizontal VP), a 2-vector, or None for a
    bundle of parallel horizontal lines.  ``noise`` is the std-dev of Gaussian endpoint
    noise in normalized units.  Segment midpoints fall in [-extent, extent]^2.  The
    returned segments carry pixel lengths (normalized length times fx) as weights.
    """
    if n_inliers < 2:
        raise ValueError("n_inliers must be >= 2")
    rng = np.random.default_rng(scene.seed if seed is None else seed)
    if isinstance(vp, str):
        vp = horizontal_vp(scene)
    segs = []
    for _ in range(n_inliers):
        mid = rng.uniform(-extent, extent, 2)
        if vp is None:
            u = np.array([1.0, 0.0])
        else:
            u = np.asarray(vp, dtype=float) - mid
            u /= np.linalg.norm(u)
        half = 0.5 * rng.uniform(*length)
        p0, p1 = mid - half * u, mid + half * u
        segs.append((p0, p1))
    for _ in range(n_outliers):
        mid = rng.uniform(-extent, extent, 2)
        a = rng.uniform(0, math.pi)
        u = np.array([math.cos(a), math.sin(a)])
        half = 0.5 * rng.uniform(*length)
        segs.append((mid - half * u, mid + half * u))
    out = []
    for p0, p1 in segs:
        if noise > 0:
            p0 = p0 + rng.normal(0, noise, 2)
            p1 = p1 + rng.normal(0, noise, 2)
        out.append(LineSegment.from_points(p0, p1, np.linalg.norm(p1 - p0) * scene.K.fx))
    return out


def _visible(px, size):
    w, h = size
    return np.all((px[:, 0] >= 0) & (px[:, 0] <= w - 1) & (px[:, 1] >= 0) & (px[:, 1] <= h - 1))


def wall_segments(scene, n_horizontal=12, n_vertical=8, n_outliers=0, rng=None):
    """Pixel segments imaged from random horizontal/vertical 3D lines on the wall plane.

    Endpoints carry ``scene.noise_px`` Gaussian noise.  Outliers are random image segments.
    """
    rng = rng if rng is not None else np.random.default_rng(scene.seed)
    out = []

    def add(X):
        try:
            px = project_pixels(scene, X)
        except BehindCamera:
            return False
        if not _visible(px, scene.image_size):
            return False
        if scene.noise_px > 0:
            px = px + rng.normal(0, scene.noise_px, px.shape)
        if np.linalg.norm(px[1] - px[0]) < 40:
            return False
        out.append(LineSegment.from_points(px[0], px[1]))
        return True

    reach = max(0.4, 0.35 * scene.d)
    for want, horizontal in ((n_horizontal, True), (n_vertical, False)):
        got = tries = 0
        while got < want and tries < 200 * max(want, 1):
            tries += 1
            length = rng.uniform(0.3, 1.0) * reach
            cx, cy = rng.uniform(-reach, reach), rng.uniform(-0.8 * reach, 0.8 * reach)
            if horizontal:
                X = [[cx - length / 2, cy, 0], [cx + length / 2, cy, 0]]
            else:
                X = [[cx, cy - length / 2, 0], [cx, cy + length / 2, 0]]
            got += add(np.array(X))
    w, h = scene.image_size
    for _ in range(n_outliers):
        p0 = rng.uniform([0, 0], [w - 1, h - 1])
        a = rng.uniform(0, math.pi)
        L = rng.uniform(40, 200)
        p1 = np.clip(p0 + L * np.array([math.cos(a), math.sin(a)]), 0, [w - 1, h - 1])
        if np.linalg.norm(p1 - p0) > 10:
            out.append(LineSegment.from_points(p0, p1))
    return out


@dataclass(frozen=True)
class RenderSpec:
    """Wall decorations drawn around the plate (landmark-frame meters)."""
    stripe_rows: tuple = (-0.5, -0.3, 0.3, 0.5)
    stripe_cols: tuple = (-0.9, -0.45, 0.45, 0.9)
    stripe_half_length: float = 1.2
    stripe_thickness: float = 0.015
    glyphs: int = 4
    supersample: int = 4
    background: int = 225
    ink: int = 20


def _quad(x0, x1, y0, y1):
    return np.array([[x0, y1, 0], [x1, y1, 0], [x1, y0, 0], [x0, y0, 0]], dtype=float)


def render_scene(scene, spec=None):
    """Anti-aliased grayscale image of the wall: stripes plus a glyph plate.

    Returns (image, ProjectedBox of the plate, noiseless).
    """
    spec = spec or RenderSpec()
    ss = spec.supersample
    w, h = scene.image_size
    canvas = Image.new("L", (w * ss, h * ss), spec.background)
    draw = ImageDraw.Draw(canvas)
    t = spec.stripe_thickness
    L = spec.stripe_half_length
    quads = [_quad(-L, L, y - t, y + t) for y in spec.stripe_rows]
    quads += [_quad(x - t, x + t, -L, L) for x in spec.stripe_cols]
    W, H = scene.W, scene.H
    # glyph bars fill the plate's full width so the text box spans exactly W
    pitch = W / spec.glyphs
    for i in range(spec.glyphs):
        x0 = -W / 2 + i * pitch
        quads.append(_quad(x0 if i == 0 else x0 + 0.2 * pitch, x0 + pitch if i == spec.glyphs - 1 else x0 + 0.8 * pitch,
                           -H / 2, H / 2))
    for q in quads:
        try:
            px = project_pixels(scene, q)
        except BehindCamera:
            continue
        pts = [((x + 0.5) * ss - 0.5, (y + 0.5) * ss - 0.5) for x, y in px]
        draw.polygon(pts, fill=spec.ink)
    img = canvas.resize((w, h), Image.BOX)
    box = ProjectedBox(project_pixels(scene, box_corners_3d(W, H)))
    return np.asarray(img, dtype=np.uint8).copy(), box


def ocr_box_for(scene, box, roll_trigger=math.radians(2.0)):
    """Where an ideal OCR engine would put the plate box after roll removal: (x, y, w, h)."""
    corners = box.corners
    if abs(scene.roll) > roll_trigger:
        # the pipeline rotates the image by the estimated roll, which is -scene.roll
        c, s = math.cos(-scene.roll), math.sin(-scene.roll)
        ctr = np.array([scene.K.cx, scene.K.cy])
        corners = (corners - ctr) @ np.array([[c, -s], [s, c]]).T + ctr
    return ProjectedBox(corners).bbox()


def write_query(scene, lm, image_path, spec=None, confidence=0.9, text=None):
    """Render ``scene`` to a PNG with an ``.ocr.tsv`` sidecar for the mock engine.

    Returns the manifest entry (image path plus ground truth) for the query.
    """
    img, box = render_scene(scene, spec)
    Image.fromarray(img).save(image_path)
    x, y, w, h = ocr_box_for(scene, box)
    shown = lm.text if text is None else text
    with open(str(image_path) + ".ocr.tsv", "w", encoding="utf-8") as fh:
        fh.write("\t".join([shown, repr(x), repr(y), repr(w), repr(h), repr(float(confidence))]) + "\n")
    return {
        "image_path": str(image_path),
        "ground_truth": {
            "world": list(pose.localize(scene.theta, scene.d, lm)),
            "landmark_id": lm.id,
            "theta_deg": math.degrees(scene.theta),
            "depth_m": scene.d,
        },
    }


# ---------------------------------------------------------------------------
# analysis tables


@dataclass(frozen=True)
class CurveConfig:
    d: float = 1.5
    W: float = 0.1
    H: float = 0.05
    theta_max_deg: float = 45.0
    theta_step_deg: float = 1.0
    phi_grid_deg: tuple = tuple(range(-30, 31, 5))


def theta_grid(cfg):
    n = int(round(2 * cfg.theta_max_deg / cfg.theta_step_deg))
    return np.radians(-cfg.theta_max_deg + cfg.theta_step_deg * np.arange(n + 1))


def rms_curves(cfg=None):
    """AOV and depth RMS error over the theta grid, one row per tilt angle.

    Columns: phi_deg, theta_rms_deg (theta from -1/x_hor), depth_rms_norm (depth after
    joint refinement, the pipeline's estimate), depth_rms_norm_approx (depth from the
    approximate theta), depth_rms_norm_true_theta (depth given the true theta).
    """
    cfg = cfg or CurveConfig()
    rows = []
    thetas = theta_grid(cfg)
    for phi_deg in cfg.phi_grid_deg:
        phi = math.radians(phi_deg)
        e_th, e_ref, e_apx, e_true = [], [], [], []
        for th in thetas:
            x_hor = pose.tilted_xhor(cfg.d, th, phi, cfg.W, cfg.H)
            w = pose.tilted_w(cfg.d, th, phi, cfg.W, cfg.H)
            th_est, _ = pose.estimate_aov(x_hor)
            d_apx = pose.estimate_depth(th_est, cfg.W, w)
            _, d_ref, _ = pose.refine_pose(th_est, d_apx, w, x_hor, cfg.W)
            e_th.append(th_est - th)
            e_apx.append((d_apx - cfg.d) / cfg.d)
            e_ref.append((d_ref - cfg.d) / cfg.d)
            e_true.append((pose.estimate_depth(th, cfg.W, w) - cfg.d) / cfg.d)
        rms = lambda e: float(np.sqrt(np.mean(np.square(e))))
        rows.append({
            "phi_deg": float(phi_deg),
            "theta_rms_deg": math.degrees(rms(e_th)),
            "depth_rms_norm": rms(e_ref),
            "depth_rms_norm_approx": rms(e_apx),
            "depth_rms_norm_true_theta": rms(e_true),
        })
    return rows


@dataclass(frozen=True)
class SensitivityConfig:
    # focal length of the AOV-vs-VP curve; f = 1000 px puts x_hor = 1000 px near 45 deg
    focal_px: float = 1000.0
    xhor_px: tuple = tuple(range(200, 3001, 100))
    d: float = 7.0
    W: float = 0.1
    theta_deg: tuple = tuple(range(-60, 61, 5))
    # focal length at which a plate W wide at depth d images as w_px_nominal pixels
    w_px_nominal: float = 50.0
    w_px: tuple = tuple(range(20, 201, 10))
    rel_step: float = 1e-5


def _central(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


def sensitivity_report(cfg=None):
    """Analytic derivatives next to central finite differences of the closed forms.

    Returns a dict of three tables (lists of rows with x_var, analytic, finite_diff):
    ``theta_vs_xhor`` in deg/px, ``depth_vs_theta`` in m/deg, ``depth_vs_w`` in m/px.
    """
    cfg = cfg or SensitivityConfig()
    f = cfg.focal_px
    theta_of_px = lambda x: math.degrees(-1.0 / (x / f))
    t1 = []
    for x in cfg.xhor_px:
        x = float(x)
        an = math.degrees(pose.d_theta_d_xhor(x / f)) / f
        t1.append({"x_var": x, "analytic": an, "finite_diff": _central(theta_of_px, x, cfg.rel_step * x)})
    w_nom = cfg.W / cfg.d
    t2 = []
    for td in cfg.theta_deg:
        td = float(td)
        depth = lambda deg: pose.estimate_depth(math.radians(deg), cfg.W, w_nom)
        an = pose.d_depth_d_theta(math.radians(td), cfg.W, w_nom) * math.pi / 180
        t2.append({"x_var": td, "analytic": an, "finite_diff": _central(depth, td, cfg.rel_step * max(1.0, abs(td)))})
    f_w = cfg.w_px_nominal / w_nom
    t3 = []
    for wp in cfg.w_px:
        wp = float(wp)
        depth = lambda p: pose.estimate_depth(0.0, cfg.W, p / f_w)
        an = pose.d_depth_d_w(0.0, cfg.W, wp / f_w) / f_w
        t3.append({"x_var": wp, "analytic": an, "finite_diff": _central(depth, wp, cfg.rel_step * wp)})
    return {"theta_vs_xhor": t1, "depth_vs_theta": t2, "depth_vs_w": t3, "focal_px_depth_vs_w": f_w}


def to_csv(rows, columns):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for r in rows:
        wr.writerow([repr(float(r[c])) for c in columns])
    return buf.getvalue()
