"""Character-candidate regions: MSER extraction, geometric filtering, binarization.

Images are 2D ``uint8`` numpy arrays indexed ``[row, col]``; region pixel
coordinates are stored as ``(x, y) = (col, row)``.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import ndimage

_EIGHT = np.ones((3, 3), dtype=bool)


def as_gray(img):
    """Convert an array image to 8-bit grayscale with luma weights 0.299/0.587/0.114."""
    arr = np.asarray(img)
    if arr.ndim == 3:
        arr = arr[..., :3].astype(float) @ np.array([0.299, 0.587, 0.114])
        arr = np.clip(np.rint(arr), 0, 255)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("expected a nonempty 2D (or HxWxC) image")
    return arr.astype(np.uint8)


@dataclass(frozen=True)
class RegionParams:
    delta: int = 5
    stability_ratio: float = 0.25
    min_area: int = 30
    max_area_frac: float = 0.01
    min_diversity: float = 0.2
    polarity: str = "both"  # "dark", "light" or "both"


@dataclass(eq=False)
class Region:
    coords: np.ndarray  # (N, 2) int, columns x, y
    polarity: str = "dark"
    variation: float = 0.0

    @property
    def area(self):
        return len(self.coords)

    @property
    def centroid(self):
        return self.coords.mean(axis=0)

    @property
    def bbox(self):
        """(x_min, y_min, x_max, y_max), inclusive pixel indices."""
        lo = self.coords.min(axis=0)
        hi = self.coords.max(axis=0)
        return int(lo[0]), int(lo[1]), int(hi[0]), int(hi[1])

    def _moments(self):
        d = self.coords - self.centroid
        mu20 = np.mean(d[:, 0] ** 2)
        mu02 = np.mean(d[:, 1] ** 2)
        mu11 = np.mean(d[:, 0] * d[:, 1])
        return mu20, mu02, mu11

    @property
    def orientation_deg(self):
        """Major-axis angle from the image x-axis in [0, 180)."""
        mu20, mu02, mu11 = self._moments()
        ang = 0.5 * math.degrees(math.atan2(2 * mu11, mu20 - mu02))
        return ang % 180.0

    @property
    def anisotropy(self):
        """(l1 - l2) / (l1 + l2) of the second-moment eigenvalues; 0 for isotropic blobs."""
        mu20, mu02, mu11 = self._moments()
        tr = mu20 + mu02
        if tr <= 0:
            return 0.0
        return math.hypot(mu20 - mu02, 2 * mu11) / tr

    def mask(self, shape):
        out = np.zeros(shape, dtype=bool)
        out[self.coords[:, 1], self.coords[:, 0]] = True
        return out


def _first_index(labels, n):
    """Flat index of the first pixel of each label 1..n."""
    flat = labels.ravel()
    nz = np.flatnonzero(flat)
    lab, first = np.unique(flat[nz], return_index=True)
    out = np.empty(n + 1, dtype=np.int64)
    out[0] = -1
    out[lab] = nz[first]
    return out


class _Level:
    __slots__ = ("labels", "n", "sizes", "reps")

    def __init__(self, mask):
        self.labels, self.n = ndimage.label(mask, structure=_EIGHT)
        self.sizes = np.bincount(self.labels.ravel(), minlength=self.n + 1).astype(np.int64)
        self.sizes[0] = 0
        self.reps = _first_index(self.labels, self.n)


def _mser_dark(img, params):
    """MSERs of the sublevel sets {img <= t}; returns (level, label, variation) triples."""
    delta = params.delta
    lo, hi = int(img.min()), int(img.max())
    levels = {}
    up = {}  # t -> label map of components at t into t+1
    present = np.bincount(img.ravel(), minlength=256) > 0
    # sublevel sets only change at gray values that occur in the image
    last_present = np.maximum.accumulate(np.where(present, np.arange(256), -1))
    built = {}

    def level(t):
        if t < lo:
            return None
        t = min(t, 255)
        if t not in levels:
            src = int(last_present[t])
            if src not in built:
                built[src] = _Level(img <= src)
            levels[t] = built[src]
        return levels[t]

    def parent_map(src, dst):
        out = np.zeros(src.n + 1, dtype=np.int64)
        if src.n:
            out[1:] = dst.labels.ravel()[src.reps[1:]]
        return out

    variation = {}
    for t in range(lo, 256):
        cur = level(t)
        par = level(t + delta) if t + delta <= 255 else level(255)
        kid = level(t - delta)
        p_sizes = par.sizes[parent_map(cur, par)]
        k_sizes = np.zeros(cur.n + 1, dtype=np.int64)
        if kid is not None and kid.n:
            into = parent_map(kid, cur)
            np.maximum.at(k_sizes, into[1:], kid.sizes[1:])
        with np.errstate(divide="ignore", invalid="ignore"):
            v = (p_sizes - k_sizes) / cur.sizes
        v[0] = np.inf
        variation[t] = v
        if t + 1 <= 255:
            up[t] = parent_map(cur, level(t + 1))
        # keep only what later iterations still need
        for old in [k for k, lv in levels.items() if k < t - delta and isinstance(lv, _Level)]:
            levels[old] = _Light(levels[old])
        for old in [k for k in built if k < last_present[max(t - delta, lo)]]:
            del built[old]
        if t == 255:
            break

    n_img = img.size
    max_area = params.max_area_frac * n_img
    picked = []
    for t in range(lo, 256):
        cur = levels[t]
        v = variation[t]
        sizes = cur.sizes
        ok = (sizes >= params.min_area) & (sizes <= max_area) & (v <= params.stability_ratio)
        ok[0] = False
        if not ok.any():
            continue
        # local minimum of variation along the component-tree path
        if t + 1 <= 255 and t in up:
            ok &= v <= variation[t + 1][up[t]]
        if t - 1 >= lo:
            prev = levels[t - 1]
            into = up[t - 1]
            kid_v = np.full(cur.n + 1, np.inf)
            kid_sz = np.zeros(cur.n + 1, dtype=np.int64)
            # variation of the largest child at t-1
            order = np.argsort(prev.sizes[1:], kind="stable") + 1
            kid_sz[into[order]] = prev.sizes[order]
            kid_v[into[order]] = variation[t - 1][order]
            ok &= v <= kid_v
        for lab in np.flatnonzero(ok):
            picked.append((t, int(lab), float(v[lab])))
    # a plateau of identical pixel sets is reported once, at its lowest level
    seen = set()
    unique = []
    for t, lab, var in picked:
        key = (int(levels[t].sizes[lab]), int(levels[t].reps[lab]))
        if key not in seen:
            seen.add(key)
            unique.append((t, lab, var))
    return unique, levels, up


class _Light:
    """Label-free summary of a processed level (sizes and representatives only)."""
    __slots__ = ("n", "sizes", "reps")

    def __init__(self, lv):
        self.n, self.sizes, self.reps = lv.n, lv.sizes, lv.reps


def _suppress_nested(picked, levels, up, min_diversity):
    """Drop regions nested in a selected region of nearly the same area, keeping the more stable."""
    keys = {(t, lab): var for t, lab, var in picked}
    dropped = set()
    for t, lab, var in picked:
        if (t, lab) in dropped:
            continue
        size = levels[t].sizes[lab]
        s, node = t, lab
        while s + 1 in levels and s in up:
            node = up[s][node]
            s += 1
            if levels[s].sizes[node] > (1 + min_diversity) * size:
                break
            other = (s, node)
            if other in keys and other not in dropped:
                if keys[other] <= var:
                    dropped.add((t, lab))
                else:
                    dropped.add(other)
                break
    return [p for p in picked if (p[0], p[1]) not in dropped]


def _regions_one_polarity(img, params, polarity):
    picked, levels, up = _mser_dark(img, params)
    picked = _suppress_nested(picked, levels, up, params.min_diversity)
    out = []
    for t in sorted({p[0] for p in picked}):
        labels, _ = ndimage.label(img <= t, structure=_EIGHT)
        for tt, lab, var in picked:
            if tt != t:
                continue
            ys, xs = np.nonzero(labels == lab)
            out.append(Region(np.column_stack([xs, ys]).astype(np.int64), polarity, var))
    return out


def detect_regions(img, params=None):
    """Maximally stable extremal regions of both polarities, in a deterministic order."""
    params = params or RegionParams()
    img = as_gray(img)
    regions = []
    if params.polarity in ("dark", "both"):
        regions += _regions_one_polarity(img, params, "dark")
    if params.polarity in ("light", "both"):
        regions += _regions_one_polarity(255 - img, params, "light")
    return regions


def _median(values):
    values = sorted(values)
    n = len(values)
    mid = n // 2
    return values[mid] if n % 2 else 0.5 * (values[mid - 1] + values[mid])


def geometric_filter(regions, N=10.0, eps_deg=5.0, isotropy_bypass=0.1):
    """Keep regions with area < N * median area and near-vertical orientation.

    Both tests use the median of the full input list. Regions whose moment
    anisotropy is below ``isotropy_bypass`` have no reliable orientation and
    skip the orientation test.
    """
    if not regions:
        return []
    med = _median([r.area for r in regions])
    keep = []
    for r in regions:
        if not r.area < N * med:
            continue
        if r.anisotropy >= isotropy_bypass and not abs(r.orientation_deg - 90.0) < eps_deg:
            continue
        keep.append(r)
    return keep


def otsu_threshold(img):
    """Threshold t maximizing between-class variance; classes are <= t and > t."""
    hist = np.bincount(np.asarray(img, dtype=np.uint8).ravel(), minlength=256).astype(float)
    p = hist / hist.sum()
    omega = np.cumsum(p)
    mu = np.cumsum(p * np.arange(256))
    mu_t = mu[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma_b = (mu_t * omega - mu) ** 2 / (omega * (1.0 - omega))
    sigma_b[~np.isfinite(sigma_b)] = -1.0
    best = sigma_b.max()
    if best <= 0:
        return None
    # middle of the plateau of maximizers, so perfectly bimodal inputs split midway
    idx = np.flatnonzero(sigma_b >= best * (1 - 1e-12))
    return int(idx[len(idx) // 2])


def binarize(img):
    """Global binarization; output is dark (0) text on light (255) background."""
    img = as_gray(img)
    t = otsu_threshold(img)
    if t is None:
        return np.full_like(img, 255)
    dark = img <= t
    if dark.mean() > 0.5:
        dark = ~dark
    return np.where(dark, 0, 255).astype(np.uint8)
