"""Character-tagged floor plans.

A floor plan is a set of landmarks, each a location-distinctive character
string (room number, gate number) anchored at a 3D point on a wall.  The
landmark frame used for localization has its origin at the characters
centroid, ``z`` along the wall normal (into walkable space), ``y`` world-up
and ``x = y cross z`` along the wall.
"""
from dataclasses import dataclass, field
import json
import math

import numpy as np

from .errors import ParseError, UnknownLandmark, ValidationError

UP = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class Landmark:
    id: str
    text: str
    anchor: tuple
    wall_normal: tuple
    box_width_m: float
    box_height_m: float = None
    centroid_height_m: float = None

    def violations(self):
        out = []
        if not self.text.strip():
            out.append(f"landmark {self.id!r}: empty text")
        n = math.hypot(*self.wall_normal)
        if abs(n - 1.0) > 1e-9:
            out.append(f"landmark {self.id!r}: wall_normal has norm {n:.12g}, expected 1")
        if not self.box_width_m > 0:
            out.append(f"landmark {self.id!r}: box_width_m must be > 0")
        if self.box_height_m is not None and not self.box_height_m > 0:
            out.append(f"landmark {self.id!r}: box_height_m must be > 0")
        if not all(math.isfinite(v) for v in self.anchor):
            out.append(f"landmark {self.id!r}: non-finite anchor")
        return out

    @property
    def frame(self):
        """3x3 matrix whose columns are the landmark x, y, z axes in world coordinates."""
        normal = np.array([self.wall_normal[0], self.wall_normal[1], 0.0])
        x_axis = np.cross(UP, normal)
        return np.column_stack([x_axis, UP, normal])

    def to_dict(self):
        doc = {
            "id": self.id,
            "text": self.text,
            "anchor": list(self.anchor),
            "wall_normal": list(self.wall_normal),
            "box_width_m": self.box_width_m,
        }
        if self.box_height_m is not None:
            doc["box_height_m"] = self.box_height_m
        if self.centroid_height_m is not None:
            doc["centroid_height_m"] = self.centroid_height_m
        return doc


@dataclass(frozen=True)
class FloorPlan:
    landmarks: tuple = ()
    name: str = ""
    units: str = field(default="meters")

    def violations(self):
        out = []
        if self.units != "meters":
            out.append(f"units must be 'meters', got {self.units!r}")
        seen_text, seen_id = {}, set()
        for lm in self.landmarks:
            out.extend(lm.violations())
            key = lm.text.strip()
            if key in seen_text:
                out.append(f"duplicate text {key!r} (landmarks {seen_text[key]!r} and {lm.id!r})")
            seen_text.setdefault(key, lm.id)
            if lm.id in seen_id:
                out.append(f"duplicate id {lm.id!r}")
            seen_id.add(lm.id)
        return out

    def validate(self):
        problems = self.violations()
        if problems:
            raise ValidationError(problems)
        return self

    def to_dict(self):
        return {"name": self.name, "units": self.units, "landmarks": [lm.to_dict() for lm in self.landmarks]}


def _landmark_from_dict(doc, index):
    try:
        anchor = tuple(float(v) for v in doc["anchor"])
        normal = tuple(float(v) for v in doc["wall_normal"])
        if len(anchor) != 3 or len(normal) != 2:
            raise ValueError("anchor needs 3 values and wall_normal 2")
        opt = lambda k: None if doc.get(k) is None else float(doc[k])
        return Landmark(
            id=str(doc["id"]),
            text=str(doc["text"]).strip(),
            anchor=anchor,
            wall_normal=normal,
            box_width_m=float(doc["box_width_m"]),
            box_height_m=opt("box_height_m"),
            centroid_height_m=opt("centroid_height_m"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"landmark #{index}: {exc}") from exc


def parse_floorplan(doc, validate=True):
    """Build a FloorPlan from an already-decoded JSON document."""
    if not isinstance(doc, dict) or not isinstance(doc.get("landmarks"), list):
        raise ParseError("floor plan must be an object with a 'landmarks' list")
    plan = FloorPlan(
        landmarks=tuple(_landmark_from_dict(d, i) for i, d in enumerate(doc["landmarks"])),
        name=str(doc.get("name", "")),
        units=str(doc.get("units", "meters")),
    )
    return plan.validate() if validate else plan


def load_floorplan(document, validate=True):
    """Parse and validate a floor plan from JSON text (str or bytes)."""
    try:
        doc = json.loads(document)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed floor plan JSON: {exc}") from exc
    return parse_floorplan(doc, validate=validate)


def load_floorplan_file(path, validate=True):
    with open(path, "rb") as fh:
        return load_floorplan(fh.read(), validate=validate)


def dump_floorplan(plan):
    return json.dumps(plan.to_dict(), indent=2)


def lookup(plan, text):
    key = text.strip()
    matches = [lm for lm in plan.landmarks if lm.text == key]
    if len(matches) != 1:
        raise UnknownLandmark(key)
    return matches[0]


def landmark_to_world(lm, local):
    """Map a point from the landmark frame to world coordinates."""
    return np.asarray(lm.anchor, dtype=float) + lm.frame @ np.asarray(local, dtype=float)
