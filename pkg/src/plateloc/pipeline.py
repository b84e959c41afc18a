"""End-to-end localization from a query image (or from pre-extracted measurements).

Image path: segments -> vertical VP -> roll -> derotate -> segments again ->
horizontal VP -> character regions -> geometric filter -> OCR preprocessing ->
recognition -> landmark selection -> AOV, width, depth -> refinement -> position.
"""
import logging
import math

from . import pose
from .config import PipelineConfig
from .detect import as_gray, detect_regions, geometric_filter
from .errors import (DegenerateVerticalVP, InsufficientLines, NoConsensus, NoLandmarkRecognized,
                     UnknownLandmark)
from .linesegs import detect_segments, split_by_orientation, to_normalized
from .ocr import landmarks_seen, preprocess_for_ocr, recognize, select_landmark
from .vp import derotate, estimate_roll, prefer_parallel, ransac_vp

log = logging.getLogger(__name__)


def horizontal_vp(segments_px, K, cfg):
    horiz, _, _ = split_by_orientation(segments_px, cfg.horiz_tol_deg)
    segs = [to_normalized(s, K) for s in horiz]
    return prefer_parallel(ransac_vp(segs, cfg.ransac), segs, cfg.parallel_tol)


def estimate_image_roll(segments_px, K, cfg):
    """Roll from near-vertical segments, or None when no vertical VP can be found."""
    _, vert, _ = split_by_orientation(segments_px, cfg.horiz_tol_deg)
    try:
        segs = [to_normalized(s, K) for s in vert]
        vvp = prefer_parallel(ransac_vp(segs, cfg.ransac_vertical), segs, cfg.parallel_tol)
        return estimate_roll(vvp)
    except (InsufficientLines, NoConsensus, DegenerateVerticalVP) as exc:
        log.debug("no roll estimate: %s", exc)
        return None


def pose_from_measurements(vp, box, lm, K, cfg, seen=1):
    """Turn a horizontal VP (normalized) and the landmark's OCR box into a PoseEstimate."""
    x_hor = math.inf if vp.at_infinity else vp.x
    theta, clamped = pose.estimate_aov(x_hor)
    w = pose.ocr_width_normalized(box, K)
    W = lm.box_width_m
    d = pose.estimate_depth(theta, W, w)
    refined = False
    if cfg.refine and math.isfinite(x_hor):
        theta, d, refined = pose.refine_pose(theta, d, w, x_hor, W)
    world = pose.localize(theta, d, lm)
    return pose.PoseEstimate(
        theta=theta, depth_m=d, landmark_id=lm.id, text=lm.text, world=world,
        x_hor=None if not math.isfinite(x_hor) else x_hor, w=w,
        flags={
            "roll_corrected": False,
            "vp_at_infinity": vp.at_infinity,
            "multiple_landmarks_seen": seen > 1,
            "refined": refined,
            "theta_clamped": clamped,
        },
    )


def _choose(boxes, plan):
    if not boxes:
        raise NoLandmarkRecognized("OCR found no text")
    try:
        return select_landmark(boxes, plan)
    except NoLandmarkRecognized:
        widest = max(boxes, key=lambda b: b.w_px)
        raise UnknownLandmark(widest.text) from None


def localize_measurements(segments_px, boxes, K, plan, cfg=None):
    """Pose from pixel segments (roll already removed) and OCR boxes."""
    cfg = cfg or PipelineConfig()
    lm, box = _choose(boxes, plan)
    vp = horizontal_vp(segments_px, K, cfg)
    est = pose_from_measurements(vp, box, lm, K, cfg, seen=len(landmarks_seen(boxes, plan)))
    return est, {"horizontal_vp": vp.to_dict(), "n_segments": len(segments_px), "box": list(box.bbox_px)}


def localize_image(img, K, plan, engine, cfg=None):
    """Full pipeline on a grayscale (or color) image array. Returns (PoseEstimate, diagnostics)."""
    cfg = cfg or PipelineConfig()
    img = as_gray(img)
    diag = {}
    segs = detect_segments(img, cfg.segments)
    roll = estimate_image_roll(segs, K, cfg)
    diag["roll_rad"] = roll
    roll_corrected = False
    if roll is not None and abs(roll) > math.radians(cfg.roll_trigger_deg):
        img = derotate(img, roll, center=(K.cx, K.cy), roll_trigger=math.radians(cfg.roll_trigger_deg))
        segs = detect_segments(img, cfg.segments)
        roll_corrected = True
    diag["n_segments"] = len(segs)
    vp_error = None
    try:
        vp = horizontal_vp(segs, K, cfg)
        diag["horizontal_vp"] = vp.to_dict()
    except (InsufficientLines, NoConsensus) as exc:
        vp_error = exc if isinstance(exc, NoConsensus) else NoConsensus(str(exc))

    regions = detect_regions(img, cfg.regions)
    kept = geometric_filter(regions, cfg.filter_N, cfg.filter_eps_deg)
    diag["n_regions"] = len(regions)
    diag["n_regions_kept"] = len(kept)
    ocr_img = preprocess_for_ocr(img, kept, cfg.ocr)
    boxes = recognize(engine, ocr_img, cfg.ocr)
    diag["ocr_boxes"] = [b.to_tsv().split("\t") for b in boxes]
    lm, box = _choose(boxes, plan)
    if vp_error is not None:
        raise vp_error
    est = pose_from_measurements(vp, box, lm, K, cfg, seen=len(landmarks_seen(boxes, plan)))
    est.flags["roll_corrected"] = roll_corrected
    return est, diag
