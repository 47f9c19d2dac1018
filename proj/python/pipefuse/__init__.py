"""Multi-view GPR pipeline detection fusion."""

import json as _json

from ._core import (  # noqa: F401
    DataError,
    DomainError,
    Error,
    ParameterError,
    ShapeError,
    UsageError,
    corpus_bscan,
    depth_eq8,
    depth_from_apex,
    diou_3d,
    information_entropy,
    iou_3d,
    preprocess,
)
from . import _core

DEFAULT_CONFIG = {
    "confidence_threshold": 0.5,
    "prediction_iou_threshold": 0.7,
    "matching_diou_threshold": 0.4,
    "pairwise_mode": "all",
}


def generate_scene(seed, n_pipes):
    """Scene file document: {"scene": ..., "truth": ...}."""
    return _json.loads(_core._generate_scene(seed, n_pipes))


def truth_detections(scene):
    return _json.loads(_core._truth_detections(_json.dumps(scene)))


def match(detections, **config):
    cfg = dict(DEFAULT_CONFIG)
    cfg.update(config)
    return _json.loads(_core._match(_json.dumps(detections), _json.dumps(cfg)))


def footprint(out_dir="."):
    return _json.loads(_core._footprint(str(out_dir)))
