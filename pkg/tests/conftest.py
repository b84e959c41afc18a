import json
import math

import numpy as np
import pytest

from plateloc.camera import CameraIntrinsics
from plateloc.floorplan import FloorPlan, Landmark

K_DEFAULT = CameraIntrinsics(1000.0, 1000.0, 320.0, 240.0)


def plate_landmark(text="4010", lm_id="L1", anchor=(5.0, 10.0, 1.5), normal=(0.0, 1.0), W=0.1):
    return Landmark(lm_id, text, anchor, normal, W, 0.05)


@pytest.fixture
def plan():
    return FloorPlan((plate_landmark(), plate_landmark("4148", "L2", (12.0, 10.0, 1.5))), "test")


@pytest.fixture
def plan_files(tmp_path, plan):
    from plateloc.floorplan import dump_floorplan
    fp = tmp_path / "plan.json"
    fp.write_text(dump_floorplan(plan))
    calib = tmp_path / "calib.json"
    calib.write_text(json.dumps(K_DEFAULT.to_dict()))
    return fp, calib


def rect_image(shape=(300, 400), rect=(100, 50, 40, 20), fg=0, bg=255):
    """White image with a filled rectangle; rect = (row, col, height, width)."""
    img = np.full(shape, bg, dtype=np.uint8)
    r, c, h, w = rect
    img[r:r + h, c:c + w] = fg
    return img


def deg(x):
    return math.radians(x)
