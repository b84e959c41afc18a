"""Straight line segments: detection, orientation split, normalization.

The detector follows the level-line region-growing scheme of LSD (gradient
orientation field, greedy growth within an angle tolerance, rectangle
approximation) without the a-contrario validation step; short and
low-density regions are discarded instead.
"""
from collections import deque
from dataclasses import dataclass
import math

import numpy as np
from scipy import ndimage

from .detect import as_gray


@dataclass(frozen=True)
class LineSegment:
    p0: tuple
    p1: tuple
    length_px: float

    @classmethod
    def from_points(cls, p0, p1, length_px=None):
        p0 = (float(p0[0]), float(p0[1]))
        p1 = (float(p1[0]), float(p1[1]))
        if length_px is None:
            length_px = math.hypot(p1[0] - p0[0], p1[1] - p0[1])
        if not length_px > 0 or p0 == p1:
            raise ValueError("degenerate segment")
        return cls(p0, p1, float(length_px))

    @property
    def line(self):
        """Implicit coefficients (a, b, c), a^2 + b^2 = 1, of the supporting line."""
        (x0, y0), (x1, y1) = self.p0, self.p1
        a, b = y0 - y1, x1 - x0
        n = math.hypot(a, b)
        a, b = a / n, b / n
        # c from the midpoint keeps both endpoint residuals symmetric
        c = -(a * (x0 + x1) + b * (y0 + y1)) / 2
        return a, b, c

    @property
    def midpoint(self):
        return (0.5 * (self.p0[0] + self.p1[0]), 0.5 * (self.p0[1] + self.p1[1]))

    @property
    def angle_deg(self):
        """Acute angle to the image x-axis, in [0, 90]."""
        dx = abs(self.p1[0] - self.p0[0])
        dy = abs(self.p1[1] - self.p0[1])
        return math.degrees(math.atan2(dy, dx))


@dataclass(frozen=True)
class SegParams:
    min_length_px: float = 20.0
    grad_threshold: float = 8.0
    angle_tol_deg: float = 22.5
    min_density: float = 0.6
    smoothing_sigma: float = 0.6


def _angle_diff(a, b):
    return abs((a - b + math.pi) % (2 * math.pi) - math.pi)


def _fit_region(xs, ys, wts):
    """Weighted principal-axis fit; returns (p0, p1, width) or None."""
    wsum = wts.sum()
    cx = (wts * xs).sum() / wsum
    cy = (wts * ys).sum() / wsum
    dx, dy = xs - cx, ys - cy
    cov = np.array([[(wts * dx * dx).sum(), (wts * dx * dy).sum()],
                    [(wts * dx * dy).sum(), (wts * dy * dy).sum()]]) / wsum
    evals, evecs = np.linalg.eigh(cov)
    d = evecs[:, 1]
    t = dx * d[0] + dy * d[1]
    s = -dx * d[1] + dy * d[0]
    tmin, tmax = t.min(), t.max()
    p0 = (cx + tmin * d[0], cy + tmin * d[1])
    p1 = (cx + tmax * d[0], cy + tmax * d[1])
    return p0, p1, s.max() - s.min()


def detect_segments(img, params=None):
    """Detect straight segments with sub-pixel endpoints in a grayscale image."""
    params = params or SegParams()
    g = as_gray(img).astype(float)
    if params.smoothing_sigma > 0:
        g = ndimage.gaussian_filter(g, params.smoothing_sigma)
    gy, gx = np.gradient(g)
    mag = np.hypot(gx, gy)
    # level-line direction, perpendicular to the gradient
    ang = np.arctan2(gx, -gy)
    h, w = g.shape
    strong = mag > params.grad_threshold
    flat = np.flatnonzero(strong)
    order = flat[np.argsort(-mag.ravel()[flat], kind="stable")]
    used = ~strong
    tol = math.radians(params.angle_tol_deg)
    segments = []
    neigh = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    min_pixels = max(3, int(params.min_length_px))
    for idx in order:
        r0, c0 = divmod(int(idx), w)
        if used[r0, c0]:
            continue
        used[r0, c0] = True
        theta = ang[r0, c0]
        sx, sy = math.cos(theta), math.sin(theta)
        members = [(r0, c0)]
        queue = deque(members)
        while queue:
            r, c = queue.popleft()
            for dr, dc in neigh:
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and not used[rr, cc]:
                    a = ang[rr, cc]
                    if _angle_diff(a, theta) <= tol:
                        used[rr, cc] = True
                        members.append((rr, cc))
                        queue.append((rr, cc))
                        sx += math.cos(a)
                        sy += math.sin(a)
                        theta = math.atan2(sy, sx)
        if len(members) < min_pixels:
            continue
        rc = np.array(members)
        ys, xs = rc[:, 0].astype(float), rc[:, 1].astype(float)
        p0, p1, width = _fit_region(xs, ys, mag[rc[:, 0], rc[:, 1]])
        length = math.hypot(p1[0] - p0[0], p1[1] - p0[1])
        if length < params.min_length_px:
            continue
        if len(members) / ((length + 1.0) * (width + 1.0)) < params.min_density:
            continue
        segments.append(LineSegment.from_points(p0, p1, length))
    return segments


def split_by_orientation(segs, horiz_tol_deg=30.0):
    """Partition into (near_horizontal, near_vertical, other)."""
    horiz, vert, other = [], [], []
    for s in segs:
        a = s.angle_deg
        if a < horiz_tol_deg:
            horiz.append(s)
        elif a > 90.0 - horiz_tol_deg:
            vert.append(s)
        else:
            other.append(s)
    return horiz, vert, other


def to_normalized(seg, K):
    """Map a pixel segment through the inverse calibration; the pixel length is kept as weight."""
    p = K.to_normalized(np.array([seg.p0, seg.p1]))
    return LineSegment.from_points(p[0], p[1], seg.length_px)


def to_pixel(seg, K):
    p = K.to_pixel(np.array([seg.p0, seg.p1]))
    return LineSegment.from_points(p[0], p[1], seg.length_px)
