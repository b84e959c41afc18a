"""OCR stage: preprocessing, engine adapters, landmark selection.

Engines are callables ``engine(image) -> list[OcrBox]``.  The external-process
adapter speaks a line-oriented TSV protocol: the image is written to a
temporary PNG, ``<cmd> <png path>`` is run, and each stdout line is

    text<TAB>x_min<TAB>y_min<TAB>width<TAB>height<TAB>confidence
"""
from dataclasses import dataclass
import math
import os
import shlex
import subprocess
import tempfile

import numpy as np
from PIL import Image

from .detect import binarize
from .errors import EngineFailure, NoLandmarkRecognized


@dataclass(frozen=True)
class OcrBox:
    text: str
    x_min: float
    y_min: float
    w_px: float
    h_px: float
    confidence: float = 1.0

    def __post_init__(self):
        if not self.text:
            raise ValueError("OCR box text must be non-empty")
        if not (self.w_px > 0 and self.h_px > 0):
            raise ValueError("OCR box must have positive width and height")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")

    @property
    def bbox_px(self):
        return (self.x_min, self.y_min, self.w_px, self.h_px)

    def inside(self, shape, slack=0.5):
        h, w = shape
        return (self.x_min >= -slack and self.y_min >= -slack
                and self.x_min + self.w_px <= w - 1 + slack and self.y_min + self.h_px <= h - 1 + slack)

    def to_tsv(self):
        return "\t".join([self.text, repr(float(self.x_min)), repr(float(self.y_min)),
                          repr(float(self.w_px)), repr(float(self.h_px)), repr(float(self.confidence))])


def parse_tsv_line(line):
    parts = line.rstrip("\r\n").split("\t")
    if len(parts) != 6:
        raise EngineFailure(f"expected 6 tab-separated fields, got {len(parts)}: {line!r}")
    text = parts[0].strip()
    try:
        nums = [float(p) for p in parts[1:]]
    except ValueError as exc:
        raise EngineFailure(f"non-numeric field in {line!r}") from exc
    if not all(math.isfinite(v) for v in nums):
        raise EngineFailure(f"non-finite field in {line!r}")
    try:
        return OcrBox(text, *nums)
    except ValueError as exc:
        raise EngineFailure(f"invalid box {line!r}: {exc}") from exc


def parse_tsv(output):
    return [parse_tsv_line(ln) for ln in output.splitlines() if ln.strip()]


class MockEngine:
    """Deterministic engine returning a fixed script of boxes, whatever the image."""

    def __init__(self, boxes=()):
        self.boxes = tuple(boxes)

    def __call__(self, img):
        return list(self.boxes)

    @classmethod
    def from_tsv(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                return cls(parse_tsv(fh.read()))
            except EngineFailure as exc:
                raise EngineFailure(f"{path}: {exc}") from exc


class SubprocessEngine:
    """Runs an external OCR command per image over the TSV protocol."""

    def __init__(self, cmd, timeout=10.0):
        self.argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        self.timeout = timeout

    def __call__(self, img):
        fd, path = tempfile.mkstemp(suffix=".png", prefix="plateloc-")
        os.close(fd)
        try:
            Image.fromarray(np.asarray(img, dtype=np.uint8)).save(path)
            try:
                proc = subprocess.run(self.argv + [path], capture_output=True, timeout=self.timeout,
                                      encoding="utf-8", errors="replace")
            except subprocess.TimeoutExpired as exc:
                raise EngineFailure(f"OCR engine timed out after {self.timeout} s") from exc
            except OSError as exc:
                raise EngineFailure(f"cannot run OCR engine: {exc}") from exc
        finally:
            os.unlink(path)
        if proc.returncode != 0:
            raise EngineFailure(f"OCR engine exited with status {proc.returncode}: {proc.stderr.strip()[:200]}")
        return parse_tsv(proc.stdout)


@dataclass(frozen=True)
class OcrParams:
    min_ocr_area: int = 50
    max_ocr_area_frac: float = 0.05
    min_confidence: float = 0.5


def preprocess_for_ocr(img, regions, params=None):
    """Binarize and blank everything outside the (size-filtered) surviving regions."""
    params = params or OcrParams()
    img = np.asarray(img, dtype=np.uint8)
    binary = binarize(img)
    max_area = params.max_ocr_area_frac * img.size
    keep = np.zeros(img.shape, dtype=bool)
    for r in regions:
        if params.min_ocr_area <= r.area <= max_area:
            keep[r.coords[:, 1], r.coords[:, 0]] = True
    return np.where(keep, binary, 255).astype(np.uint8)


def recognize(engine, img, params=None):
    """Engine boxes with confidence >= min_confidence; out-of-image boxes are a protocol error."""
    params = params or OcrParams()
    boxes = engine(img)
    shape = np.asarray(img).shape[:2]
    for b in boxes:
        if not b.inside(shape):
            raise EngineFailure(f"box {b.bbox_px} for {b.text!r} lies outside the {shape[1]}x{shape[0]} image")
    return [b for b in boxes if b.confidence >= params.min_confidence]


def select_landmark(boxes, plan):
    """Widest box whose text names a landmark; ties by confidence, then leftmost x."""
    by_text = {lm.text: lm for lm in plan.landmarks}
    hits = [b for b in boxes if b.text.strip() in by_text]
    if not hits:
        raise NoLandmarkRecognized("no recognized text matches a floor-plan landmark")
    best = min(hits, key=lambda b: (-b.w_px, -b.confidence, b.x_min))
    return by_text[best.text.strip()], best


def landmarks_seen(boxes, plan):
    """Distinct floor-plan landmark texts among the boxes."""
    texts = {lm.text for lm in plan.landmarks}
    return sorted({b.text.strip() for b in boxes} & texts)
