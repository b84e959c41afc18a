"""Angle-of-view, depth and position from the horizontal VP and the OCR box width.

All quantities are in normalized image coordinates (focal length 1,
principal point at the origin).  The camera sits at (d sin(theta), 0,
d cos(theta)) in the landmark frame, looking at the characters centroid;
``theta`` is positive on the +x side of the landmark frame.
"""
from dataclasses import dataclass, field, asdict
import math

import numpy as np

from .errors import DomainError, InvalidWidth
from .floorplan import landmark_to_world

THETA_LIMIT = math.pi / 2 - 1e-3


@dataclass
class PoseEstimate:
    theta: float
    depth_m: float
    landmark_id: str
    text: str = ""
    world: tuple = (math.nan, math.nan)
    x_hor: float = None
    w: float = None
    flags: dict = field(default_factory=dict)

    @property
    def local(self):
        return (self.depth_m * math.sin(self.theta), self.depth_m * math.cos(self.theta))

    def to_dict(self):
        doc = asdict(self)
        doc["theta_deg"] = math.degrees(self.theta)
        doc["local"] = list(self.local)
        doc["world"] = list(self.world)
        return doc


def ocr_width_normalized(box, K):
    """Horizontal OCR box extent in normalized units."""
    return box.w_px / K.fx


def estimate_aov(x_hor):
    """theta ~= -1 / x_hor, clamped to the open AOV range; ``None``/inf (VP at infinity) gives 0.

    ``x_hor`` may also be a VanishingPoint.  Returns (theta, clamped).
    """
    if hasattr(x_hor, "at_infinity"):
        x_hor = math.inf if x_hor.at_infinity else x_hor.x
    if x_hor is None or not math.isfinite(x_hor):
        return 0.0, False
    if x_hor == 0:
        return 0.0, True
    theta = -1.0 / x_hor
    if abs(theta) > THETA_LIMIT:
        return math.copysign(THETA_LIMIT, theta), True
    return theta, False


def exact_xhor(d, theta, W):
    """x of the horizontal VP as a closed form of depth, AOV and plate width.

    Returns ``math.inf`` at theta = 0 (horizontal edges image as parallel lines).
    """
    s = math.sin(theta)
    if s == 0:
        return math.inf
    den = 4 * d * d * s - W * W * s ** 3
    if den == 0:
        raise DomainError("x_hor undefined where 2d = W |sin(theta)|")
    return -math.cos(theta) * (4 * d * d - W * W * s * s + 2 * d * W * s) / den


def inverse_xhor(d, theta, W):
    """-1 / exact_xhor, smooth through theta = 0 (used by the refinement)."""
    s = math.sin(theta)
    num = s * (4 * d * d - W * W * s * s)
    den = math.cos(theta) * (4 * d * d - W * W * s * s + 2 * d * W * s)
    return num / den


def exact_w(d, theta, W):
    """Normalized image width of a W-wide plate seen at depth d and AOV theta."""
    den = 4 * d * d - W * W * math.sin(theta) ** 2
    if den == 0:
        raise DomainError("w undefined where 4d^2 = W^2 sin^2(theta)")
    return 4 * d * W * math.cos(theta) / den


def estimate_depth(theta, W, w):
    """Positive root of (4w) d^2 - (4W cos(theta)) d - w W^2 sin^2(theta) = 0."""
    if not w > 0:
        raise InvalidWidth(f"image width must be positive, got {w}")
    if not abs(theta) < math.pi / 2:
        raise DomainError("|theta| must be < pi/2")
    return 0.5 * math.cos(theta) * (W / w) * (1 + math.sqrt(1 + (w * math.tan(theta)) ** 2))


def _tilt_terms(d, theta, phi, W, H):
    cp, sp = math.cos(phi), math.sin(phi)
    st = math.sin(theta)
    s2p = math.sin(2 * phi)
    s1 = 8 * d ** 3 * cp ** 2 + 2 * d * H ** 2 * sp ** 2 - 2 * d * W ** 2 * cp ** 2 * st ** 2
    s2 = 4 * d ** 2 * H * s2p + 4 * d ** 2 * W * cp ** 2 * st - H ** 2 * W * st * sp ** 2
    s3 = 4 * d ** 2 * cp ** 2 + H ** 2 * sp ** 2
    s4 = -W ** 2 * cp ** 2 * st ** 2 + 2 * d * H * s2p
    s5 = 2 * W * math.cos(theta) * (2 * d * cp - H * sp)
    s6 = 4 * d ** 2 * cp ** 2 + H ** 2 * sp ** 2
    s7 = -W ** 2 * cp ** 2 * st ** 2 - 2 * d * H * s2p
    return s1, s2, s3, s4, s5, s6, s7


def tilted_xhor(d, theta, phi, W, H):
    """Horizontal-VP x under camera tilt phi.

    The leading sign is chosen so that phi = 0 reproduces :func:`exact_xhor`.
    """
    s1, s2, s3, s4, *_ = _tilt_terms(d, theta, phi, W, H)
    st = math.sin(theta)
    if st == 0:
        return math.inf
    den = 2 * d * math.cos(phi) * st * (s3 + s4)
    if den == 0:
        raise DomainError("tilted x_hor denominator vanishes")
    return -math.cos(theta) * (s1 + s2) / den


def tilted_w(d, theta, phi, W, H):
    """OCR box width under tilt: widest horizontal span of the projected plate.

    The closed form measures the x1-x2 edge, which is the wider one for phi >= 0.
    Tilting the other way mirrors the plate top to bottom, so the phi < 0 width
    (edge x4-x3) is the same expression at |phi|.
    """
    *_, s5, s6, s7 = _tilt_terms(d, theta, abs(phi), W, H)
    den = s6 + s7
    if den == 0:
        raise DomainError("tilted w denominator vanishes")
    return abs(s5 / den)


def refine_pose(theta0, d0, w_meas, x_hor_meas, W, tol=1e-10, max_iter=50):
    """Jointly solve exact_xhor(d, theta) = x_hor_meas and exact_w(d, theta) = w_meas.

    Damped Newton on (theta, d) with residuals expressed through -1/x_hor
    (finite at theta = 0) and relative width.  Returns (theta, d, converged);
    on failure the initial values come back unchanged.
    """
    if x_hor_meas is None or not math.isfinite(x_hor_meas):
        return theta0, d0, False
    u_meas = -1.0 / x_hor_meas

    def residual(v):
        th, d = v
        if not (abs(th) < math.pi / 2 and d > W / 2):
            return None
        try:
            return np.array([inverse_xhor(d, th, W) - u_meas, exact_w(d, th, W) / w_meas - 1.0])
        except (DomainError, ZeroDivisionError):
            return None

    v = np.array([theta0, d0], dtype=float)
    r = residual(v)
    if r is None:
        return theta0, d0, False
    norm = np.max(np.abs(r))
    for _ in range(max_iter):
        if norm < tol:
            return float(v[0]), float(v[1]), True
        J = np.empty((2, 2))
        for j, h in enumerate((1e-7, 1e-7 * max(1.0, v[1]))):
            e = np.zeros(2)
            e[j] = h
            rp, rm = residual(v + e), residual(v - e)
            if rp is None or rm is None:
                return theta0, d0, False
            J[:, j] = (rp - rm) / (2 * h)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return theta0, d0, False
        lam = 1.0
        while lam > 1e-6:
            cand = v + lam * step
            rc = residual(cand)
            if rc is not None and np.max(np.abs(rc)) < norm:
                break
            lam *= 0.5
        else:
            return theta0, d0, False
        v, r, norm = cand, rc, np.max(np.abs(rc))
    if norm < tol:
        return float(v[0]), float(v[1]), True
    return theta0, d0, False


def localize(theta, d, lm):
    """Floor-plane world position of a camera at (theta, d) from a landmark."""
    if not d > 0:
        raise DomainError("depth must be positive")
    world = landmark_to_world(lm, (d * math.sin(theta), 0.0, d * math.cos(theta)))
    return float(world[0]), float(world[1])


# analytic derivatives used by the sensitivity report

def d_theta_d_xhor(x_hor):
    """Derivative of theta = -1/x_hor."""
    return 1.0 / (x_hor * x_hor)


def d_depth_d_theta(theta, W, w):
    t = math.tan(theta)
    q = math.sqrt(1 + w * w * t * t)
    sec2 = 1 + t * t
    return 0.5 * (W / w) * (-math.sin(theta) * (1 + q) + math.cos(theta) * w * w * t * sec2 / q)


def d_depth_d_w(theta, W, w):
    t = math.tan(theta)
    q = math.sqrt(1 + w * w * t * t)
    return 0.5 * math.cos(theta) * W * (-(1 + q) / (w * w) + t * t / q)
