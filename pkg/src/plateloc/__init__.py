"""Indoor localization from one image of a character landmark (room or gate number).

The pose of the camera relative to the plate comes from two measurements: the
horizontal vanishing point of the wall (angle of view) and the OCR box width
(depth).  Combined with a character-tagged floor plan this gives a 2D position.
"""
from .camera import CameraIntrinsics, load_calibration
from .config import PipelineConfig, load_config
from .errors import PlatelocError
from .floorplan import FloorPlan, Landmark, load_floorplan, load_floorplan_file, lookup
from .ocr import MockEngine, OcrBox, SubprocessEngine
from .pipeline import localize_image, localize_measurements
from .pose import PoseEstimate, estimate_aov, estimate_depth, exact_w, exact_xhor
from .vp import RansacParams, VanishingPoint, ransac_vp, solve_weighted_vp

__version__ = "0.1.0"
