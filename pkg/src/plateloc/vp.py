"""Vanishing points from weighted line sets, RANSAC consensus, and roll removal."""
from dataclasses import dataclass
import math

import numpy as np
from scipy import ndimage, stats

from .errors import DegenerateVerticalVP, InsufficientLines, NoConsensus


@dataclass(frozen=True)
class VanishingPoint:
    """Either a finite point (x, y) or a point at infinity along ``direction`` (radians)."""
    x: float = math.nan
    y: float = math.nan
    direction: float = None
    support: tuple = ()
    residual: float = 0.0

    @property
    def at_infinity(self):
        return self.direction is not None

    @property
    def point(self):
        return np.array([self.x, self.y])

    def to_dict(self):
        if self.at_infinity:
            return {"kind": "at_infinity", "direction_rad": self.direction,
                    "support": list(self.support), "residual": self.residual}
        return {"kind": "finite", "x": self.x, "y": self.y,
                "support": list(self.support), "residual": self.residual}


@dataclass(frozen=True)
class RansacParams:
    iterations: int = 500
    sample_size: int = 2
    inlier_threshold: float = 0.01
    seed: int = 0
    min_inliers: int = 3
    length_weighted: bool = True
    # "distance": |VP-to-line distance| < threshold (normalized units);
    # "angle": sine of the angle between segment and midpoint->VP ray < threshold
    inlier_metric: str = "distance"
    refit_rounds: int = 5

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.sample_size < 2:
            raise ValueError("sample_size must be >= 2")
        if self.inlier_metric not in ("distance", "angle"):
            raise ValueError("inlier_metric must be 'distance' or 'angle'")


def weighted_cost(lines, x, y):
    """Sum of weight * squared point-to-line distance."""
    L = np.asarray(lines, dtype=float)
    a, b, c, w = L.T
    return float(np.sum(w * (a * x + b * y + c) ** 2 / (a * a + b * b)))


def solve_weighted_vp(lines, degeneracy_tol=1e-12):
    """Closed-form minimizer of the length-weighted squared distance to a set of lines.

    ``lines`` rows are (a, b, c, weight) for a*x + b*y + c = 0.
    """
    L = np.asarray(lines, dtype=float).reshape(-1, 4)
    if len(L) < 2:
        raise InsufficientLines(f"need at least 2 lines, got {len(L)}")
    a, b, c, wt = L.T
    if np.any(wt <= 0):
        raise ValueError("weights must be positive")
    k = wt / (a * a + b * b)
    A = np.sum(k * a * a)
    B = np.sum(k * a * b)
    C = np.sum(k * a * c)
    D = B
    E = np.sum(k * b * b)
    F = np.sum(k * b * c)
    det = A * E - B * D
    if abs(det) < degeneracy_tol * (abs(A * E) + abs(B * D) + 1e-300):
        # all lines share one direction: average it (mod pi) weighted
        ang = 2 * np.arctan2(-a, b)
        direction = 0.5 * math.atan2(np.sum(wt * np.sin(ang)), np.sum(wt * np.cos(ang)))
        return VanishingPoint(direction=direction % math.pi, support=tuple(range(len(L))))
    x = (B * F - C * E) / det
    y = (C * D - A * F) / det
    res = math.sqrt(weighted_cost(L, x, y) / np.sum(wt))
    return VanishingPoint(x=float(x), y=float(y), support=tuple(range(len(L))), residual=res)


def _line_array(segs):
    return np.array([(*s.line, s.length_px, *s.midpoint) for s in segs], dtype=float)


def _inliers(vp, L, thr, metric="distance"):
    a, b, c = L[:, 0], L[:, 1], L[:, 2]
    if vp.at_infinity:
        # line direction (b, -a) against the VP direction, as sin of the angle
        dx, dy = math.cos(vp.direction), math.sin(vp.direction)
        return np.abs(b * dy + a * dx) < thr
    dist = np.abs(a * vp.x + b * vp.y + c)
    if metric == "angle":
        ray = np.hypot(vp.x - L[:, 4], vp.y - L[:, 5])
        return dist < thr * ray
    return dist < thr


def ransac_vp(segs, params=None):
    """Robust VP of (normalized) segments: sampled closed-form solves, consensus, refit."""
    params = params or RansacParams()
    n = len(segs)
    if n < 2:
        raise InsufficientLines(f"need at least 2 segments, got {n}")
    L = _line_array(segs)
    k = min(params.sample_size, n)
    rng = np.random.default_rng(params.seed)
    samples = np.argsort(rng.random((params.iterations, n)), axis=1)[:, :k]
    best_score, best_mask = -1.0, None
    for idx in samples:
        hyp = solve_weighted_vp(L[idx, :4])
        mask = _inliers(hyp, L, params.inlier_threshold, params.inlier_metric)
        score = L[mask, 3].sum() if params.length_weighted else float(mask.sum())
        if score > best_score:
            best_score, best_mask = score, mask
    need = min(params.min_inliers, n)
    if best_mask.sum() < max(need, 2):
        raise NoConsensus(f"best hypothesis has {int(best_mask.sum())} inliers, need {need}")
    support = np.flatnonzero(best_mask)
    vp = solve_weighted_vp(L[support, :4])
    # re-select inliers around the refit until the consensus set settles
    for _ in range(params.refit_rounds):
        mask = _inliers(vp, L, params.inlier_threshold, params.inlier_metric)
        # a collapsing support means the refit drifted, not that outliers were shed
        if 2 * mask.sum() < len(support) or mask.sum() < max(need, 2) \
                or np.array_equal(np.flatnonzero(mask), support):
            break
        support = np.flatnonzero(mask)
        vp = solve_weighted_vp(L[support, :4])
    return VanishingPoint(x=vp.x, y=vp.y, direction=vp.direction,
                          support=tuple(int(i) for i in support), residual=vp.residual)


def _sines_to_vp(vp, L):
    """Sine of the angle between each segment and its midpoint->VP ray."""
    a, b = L[:, 0], L[:, 1]
    n = np.hypot(a, b)
    if vp.at_infinity:
        return (b * math.sin(vp.direction) + a * math.cos(vp.direction)) / n
    ray = np.hypot(vp.x - L[:, 4], vp.y - L[:, 5])
    return (a * vp.x + b * vp.y + L[:, 2]) / (n * np.maximum(ray, 1e-300))


def parallel_fit(segs, idx=None):
    """Length-weighted common direction of segments (radians, mod pi) and the weighted RMS
    sine of each segment's angle to it."""
    L = _line_array(segs)
    if idx is not None:
        L = L[np.asarray(idx, dtype=int)]
    a, b, wt = L[:, 0], L[:, 1], L[:, 3]
    ang = 2 * np.arctan2(-a, b)
    direction = 0.5 * math.atan2(np.sum(wt * np.sin(ang)), np.sum(wt * np.cos(ang)))
    sines = _sines_to_vp(VanishingPoint(direction=direction), L)
    rms = math.sqrt(np.sum(wt * sines ** 2) / np.sum(wt))
    return direction % math.pi, rms


def prefer_parallel(vp, segs, tol, confidence=0.99):
    """Replace a finite VP by a point at infinity when one direction explains its support.

    Nearly parallel, slightly noisy segments pull the least-squares VP in toward the
    segments themselves.  The common-direction model (one parameter) is kept when its
    RMS angular residual is below ``tol`` and an F-test against the finite VP (two
    parameters) finds no significant improvement.
    """
    n = len(vp.support)
    if vp.at_infinity or tol <= 0 or n < 4:
        return vp
    direction, rms_p = parallel_fit(segs, vp.support)
    if rms_p >= tol:
        return vp
    L = _line_array(segs)[np.asarray(vp.support, dtype=int)]
    wt = L[:, 3] / np.sum(L[:, 3])
    ss_p = rms_p ** 2
    ss_f = float(np.sum(wt * _sines_to_vp(vp, L) ** 2))
    if ss_p > ss_f and (ss_p - ss_f) * (n - 2) > stats.f.ppf(confidence, 1, n - 2) * max(ss_f, 1e-300):
        return vp
    return VanishingPoint(direction=direction, support=vp.support, residual=rms_p)


def estimate_roll(vertical_vp):
    """In-plane rotation implied by the vertical VP: atan(x_ver / y_ver).

    A vertical VP at infinity gives the roll of its direction relative to the
    image y-axis (zero when the segments are already vertical).
    """
    if vertical_vp.at_infinity:
        dx, dy = math.cos(vertical_vp.direction), math.sin(vertical_vp.direction)
        if abs(dy) < 1e-12:
            raise DegenerateVerticalVP("vertical VP direction is horizontal")
        return math.atan(dx / dy)
    if vertical_vp.y == 0:
        raise DegenerateVerticalVP("vertical VP lies on the horizon row (y = 0)")
    return math.atan(vertical_vp.x / vertical_vp.y)


def rotation_2d(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def derotate_points(pts, roll, center):
    """Image-plane rotation applied by :func:`derotate` to pixel coordinates (x, y)."""
    pts = np.asarray(pts, dtype=float)
    center = np.asarray(center, dtype=float)
    return (pts - center) @ rotation_2d(roll).T + center


def derotate(img, roll, center=None, roll_trigger=math.radians(2.0), fill=None):
    """Remove an estimated roll by rotating the image about the principal point.

    The output pixel at p samples the input at the inverse rotation of p, so a
    feature at q in the input lands at ``derotate_points(q, roll, center)``.
    Rolls below ``roll_trigger`` return the image unchanged.
    """
    if abs(roll) > math.pi / 2:
        raise ValueError("|roll| must be <= pi/2")
    if abs(roll) <= roll_trigger:
        return img
    h, w = img.shape
    if center is None:
        center = ((w - 1) / 2.0, (h - 1) / 2.0)
    cx, cy = center
    R = rotation_2d(roll)
    # input (x, y) = R^T (output - c) + c; ndimage works in (row, col)
    Rt = R.T
    M = np.array([[Rt[1, 1], Rt[1, 0]], [Rt[0, 1], Rt[0, 0]]])
    c_rc = np.array([cy, cx])
    offset = c_rc - M @ c_rc
    if fill is None:
        fill = float(np.median(img))
    out = ndimage.affine_transform(img.astype(float), M, offset=offset, order=1,
                                   mode="constant", cval=fill)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)
