"""Pinhole intrinsics and pixel <-> normalized coordinate maps (zero skew)."""
from dataclasses import dataclass
import json

import numpy as np

from .errors import ParseError, SingularCalibration


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx == 0 or self.fy == 0:
            raise SingularCalibration(f"focal lengths must be nonzero, got fx={self.fx}, fy={self.fy}")
        if self.fx < 0 or self.fy < 0:
            raise ValueError("focal lengths must be positive")

    @property
    def matrix(self):
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    @property
    def principal_point(self):
        return np.array([self.cx, self.cy])

    def to_normalized(self, pts):
        """Map pixel points (..., 2) through the inverse calibration."""
        pts = np.asarray(pts, dtype=float)
        return np.stack([(pts[..., 0] - self.cx) / self.fx, (pts[..., 1] - self.cy) / self.fy], axis=-1)

    def to_pixel(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.stack([pts[..., 0] * self.fx + self.cx, pts[..., 1] * self.fy + self.cy], axis=-1)

    def to_dict(self):
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy}

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(float(doc["fx"]), float(doc["fy"]), float(doc["cx"]), float(doc["cy"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad calibration document: {exc}") from exc


def load_calibration(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return CameraIntrinsics.from_dict(doc)
