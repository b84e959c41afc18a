"""Pipeline tunables, loadable from JSON with per-key overrides."""
from dataclasses import asdict, dataclass, field, fields, is_dataclass, replace
import json

from .detect import RegionParams
from .errors import ParseError
from .linesegs import SegParams
from .ocr import OcrParams
from .vp import RansacParams


@dataclass(frozen=True)
class PipelineConfig:
    regions: RegionParams = field(default_factory=RegionParams)
    filter_N: float = 10.0
    filter_eps_deg: float = 5.0
    segments: SegParams = field(default_factory=SegParams)
    horiz_tol_deg: float = 30.0
    # angular consistency tolerates far-away VPs (small AOV) far better than raw distance
    ransac: RansacParams = field(
        default_factory=lambda: RansacParams(inlier_metric="angle", inlier_threshold=0.02))
    # zero tilt puts the vertical VP at infinity, where VP-to-line distances are meaningless
    ransac_vertical: RansacParams = field(
        default_factory=lambda: RansacParams(inlier_metric="angle", inlier_threshold=0.02))
    # a VP's support may be re-modelled as parallel only below this RMS angular residual (sine)
    parallel_tol: float = 0.05
    ocr: OcrParams = field(default_factory=OcrParams)
    roll_trigger_deg: float = 2.0
    refine: bool = True

    def with_seed(self, seed):
        return replace(self, ransac=replace(self.ransac, seed=int(seed)),
                       ransac_vertical=replace(self.ransac_vertical, seed=int(seed)))

    def to_dict(self):
        return asdict(self)


def _build(base, doc, where):
    """Copy of dataclass instance ``base`` with the keys of ``doc`` applied recursively."""
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected an object")
    known = {f.name for f in fields(base)}
    changes = {}
    for key, value in doc.items():
        if key not in known:
            raise ParseError(f"{where}: unknown key {key!r}")
        current = getattr(base, key)
        if is_dataclass(current):
            changes[key] = _build(current, value, f"{where}.{key}")
        elif isinstance(current, tuple):
            changes[key] = tuple(value)
        else:
            changes[key] = value
    try:
        return replace(base, **changes)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}") from exc


def config_from_dict(doc):
    return _build(PipelineConfig(), doc, "config")


def load_config(path=None, overrides=None):
    """Read a JSON config (missing keys keep defaults); ``overrides`` maps dotted keys to values."""
    doc = {}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
        doc = doc.get("pipeline", doc)
    for dotted, value in (overrides or {}).items():
        node = doc
        *parents, leaf = dotted.split(".")
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = value
    return config_from_dict(doc)
