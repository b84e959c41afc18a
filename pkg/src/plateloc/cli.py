"""Command-line entry points.

    plateloc localize --image P --calib P --floorplan P [--ocr-engine CMD] [--config P] [--seed N]
    plateloc evaluate --manifest P --calib P --floorplan P [--ocr-engine CMD] [--config P] [--seed N] [--out DIR]
    plateloc synth-bench [--config P] --out DIR
    plateloc validate-floorplan P

Without ``--ocr-engine`` the scripted mock engine reads ``<image>.ocr.tsv``
next to the query image (no sidecar means no text is recognized).
"""
import argparse
import json
import logging
import math
import os
import sys

import numpy as np
from PIL import Image

from . import synth
from .camera import load_calibration
from .config import load_config
from .errors import ParseError, PlatelocError
from .floorplan import load_floorplan, load_floorplan_file
from .ocr import MockEngine, SubprocessEngine
from .pipeline import localize_image

log = logging.getLogger("plateloc")


def _dumps(doc):
    return json.dumps(doc, indent=2, allow_nan=False, default=_jsonable)


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _clean(obj):
    """Replace non-finite floats by None so the output stays strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def load_image(path):
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("L"), dtype=np.uint8).copy()
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot read image {path}: {exc}") from exc


def make_engine(cmd, image_path, timeout=10.0):
    if cmd:
        return SubprocessEngine(cmd, timeout=timeout)
    sidecar = image_path + ".ocr.tsv"
    if os.path.exists(sidecar):
        return MockEngine.from_tsv(sidecar)
    return MockEngine()


def _error_doc(exc):
    return {"code": exc.code, "type": type(exc).__name__, "message": str(exc)}


def run_localize(image_path, K, plan, cfg, engine_cmd=None):
    """One query through the pipeline; returns (JSON-ready dict, exit status). Never raises PlatelocError."""
    try:
        img = load_image(image_path)
        engine = make_engine(engine_cmd, image_path)
        est, diag = localize_image(img, K, plan, engine, cfg)
        return {"status": "ok", "pose": est.to_dict(), "diagnostics": diag}, 0
    except PlatelocError as exc:
        return {"status": "error", "error": _error_doc(exc)}, exc.exit_status


def parse_overrides(items):
    """``key.sub=value`` strings to a dict; values are parsed as JSON when possible."""
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ParseError(f"override {item!r} is not of the form key=value")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _common_inputs(args):
    try:
        K = load_calibration(args.calib)
        plan = load_floorplan_file(args.floorplan)
        cfg = load_config(args.config, parse_overrides(args.set))
    except OSError as exc:
        raise ParseError(f"cannot read {exc.filename}: {exc.strerror}") from exc
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return K, plan, cfg


def cmd_localize(args):
    try:
        K, plan, cfg = _common_inputs(args)
    except PlatelocError as exc:
        print(_dumps({"status": "error", "error": _error_doc(exc)}))
        return exc.exit_status
    out, status = run_localize(args.image, K, plan, cfg, args.ocr_engine)
    out["config"] = cfg.to_dict()
    print(_dumps(_clean(out)))
    return status


def load_manifest(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    entries = doc.get("entries") if isinstance(doc, dict) else doc
    if not isinstance(entries, list):
        raise ParseError("manifest must hold an 'entries' list")
    base = os.path.dirname(os.path.abspath(path))
    out = []
    for i, e in enumerate(entries):
        p = e.get("image_path") if isinstance(e, dict) else None
        if not p:
            raise ParseError(f"entry {i}: missing image_path")
        gt = e.get("ground_truth")
        if gt is not None and "world" in gt:
            if not all(math.isfinite(float(v)) for v in gt["world"]):
                raise ParseError(f"entry {i}: non-finite ground-truth position")
        out.append({"image_path": p if os.path.isabs(p) else os.path.join(base, p), "ground_truth": gt})
    return out


def evaluation_report(records, plan):
    """Recognition rate and error statistics from per-query records.

    A query counts as recognized when the selected landmark's text equals the
    ground truth's (``text``, or the text of ``landmark_id``).  Position errors
    are taken over recognized queries only.
    """
    id_text = {lm.id: lm.text for lm in plan.landmarks}
    n_gt = recognized = 0
    errors = []
    for rec in records:
        gt = rec.get("ground_truth")
        if not gt:
            continue
        n_gt += 1
        want = gt.get("text") or id_text.get(gt.get("landmark_id"))
        pose = rec["result"].get("pose")
        ok = pose is not None and want is not None and pose["text"] == want
        rec["recognized"] = ok
        if ok:
            recognized += 1
            if gt.get("world") is not None:
                err = math.dist(pose["world"][:2], [float(v) for v in gt["world"][:2]])
                rec["error_m"] = err
                errors.append(err)
    errors.sort()
    cdf = [{"error_m": e, "cdf": (i + 1) / len(errors)} for i, e in enumerate(errors)]
    return {
        "n_queries": len(records),
        "n_with_ground_truth": n_gt,
        "recognition_rate": recognized / n_gt if n_gt else None,
        "mean_error_m": float(np.mean(errors)) if errors else None,
        "median_error_m": float(np.median(errors)) if errors else None,
        "cdf": cdf,
        "records": records,
    }


def cmd_evaluate(args):
    try:
        K, plan, cfg = _common_inputs(args)
        entries = load_manifest(args.manifest)
    except OSError as exc:
        exc = ParseError(f"cannot read manifest: {exc}")
        print(_dumps({"status": "error", "error": _error_doc(exc)}))
        return exc.exit_status
    except PlatelocError as exc:
        print(_dumps({"status": "error", "error": _error_doc(exc)}))
        return exc.exit_status
    records = []
    for i, e in enumerate(entries):
        res, _ = run_localize(e["image_path"], K, plan, cfg, args.ocr_engine)
        records.append({"index": i, "image_path": e["image_path"], "ground_truth": e["ground_truth"], "result": res})
    report = evaluation_report(records, plan)
    report["config"] = cfg.to_dict()
    report = _clean(report)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(_dumps(report) + "\n")
        with open(os.path.join(args.out, "error_cdf.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write(synth.to_csv(report["cdf"], ["error_m", "cdf"]))
    print(_dumps(report))
    return 0


def bench_configs(path):
    doc = {}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"{path}: {exc}") from exc
    try:
        curves = synth.CurveConfig(**{k: tuple(v) if isinstance(v, list) else v
                                      for k, v in doc.get("curves", {}).items()})
        sens = synth.SensitivityConfig(**{k: tuple(v) if isinstance(v, list) else v
                                          for k, v in doc.get("sensitivity", {}).items()})
    except TypeError as exc:
        raise ParseError(f"bad synth-bench config: {exc}") from exc
    return curves, sens


def write_bench(out_dir, curves_cfg, sens_cfg):
    """Write the tilt-error and sensitivity tables as CSV files; returns the file names."""
    os.makedirs(out_dir, exist_ok=True)
    rows = synth.rms_curves(curves_cfg)
    sens = synth.sensitivity_report(sens_cfg)
    files = {
        "theta_rms.csv": synth.to_csv(rows, ["phi_deg", "theta_rms_deg"]),
        "depth_rms.csv": synth.to_csv(rows, ["phi_deg", "depth_rms_norm"]),
        "rms_detail.csv": synth.to_csv(rows, ["phi_deg", "theta_rms_deg", "depth_rms_norm",
                                              "depth_rms_norm_approx", "depth_rms_norm_true_theta"]),
        "sens_theta_xhor.csv": synth.to_csv(sens["theta_vs_xhor"], ["x_var", "analytic", "finite_diff"]),
        "sens_depth_theta.csv": synth.to_csv(sens["depth_vs_theta"], ["x_var", "analytic", "finite_diff"]),
        "sens_depth_w.csv": synth.to_csv(sens["depth_vs_w"], ["x_var", "analytic", "finite_diff"]),
    }
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return sorted(files)


def cmd_synth_bench(args):
    try:
        curves, sens = bench_configs(args.config)
    except PlatelocError as exc:
        print(_dumps({"status": "error", "error": _error_doc(exc)}))
        return exc.exit_status
    names = write_bench(args.out, curves, sens)
    print(_dumps({"status": "ok", "out": args.out, "files": names}))
    return 0


def cmd_validate_floorplan(args):
    try:
        with open(args.path, "rb") as fh:
            plan = load_floorplan(fh.read(), validate=False)
    except (OSError, PlatelocError) as exc:
        msg = str(exc)
        print(_dumps({"valid": False, "violations": [msg]}))
        return 2
    problems = plan.violations()
    print(_dumps({"valid": not problems, "name": plan.name, "n_landmarks": len(plan.landmarks),
                  "violations": problems}))
    return 0 if not problems else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="plateloc", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def pipeline_args(p):
        p.add_argument("--calib", required=True)
        p.add_argument("--floorplan", required=True)
        p.add_argument("--ocr-engine", default=None, help="external OCR command (TSV protocol)")
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="config override, e.g. ransac.iterations=1000 (repeatable)")

    p = sub.add_parser("localize", help="localize one query image")
    p.add_argument("--image", required=True)
    pipeline_args(p)
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("evaluate", help="batch-evaluate a query manifest")
    p.add_argument("--manifest", required=True)
    pipeline_args(p)
    p.add_argument("--out", default=None, help="directory for report.json and error_cdf.csv")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth-bench", help="write synthetic error and sensitivity tables")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth_bench)

    p = sub.add_parser("validate-floorplan", help="check a floor plan document")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate_floorplan)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
