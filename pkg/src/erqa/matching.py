"""Edge matching and the ERQA score.

Three matching rules are available:

* plain: exact set comparison of the two edge masks;
* v1.0: a distorted edge pixel counts as a true positive when some ground
  truth edge pixel lies within Chebyshev distance 1; ground-truth pixels are
  false negatives only when no distorted edge pixel is that close;
* v1.1: one-to-one assignment, so every ground-truth edge pixel backs at most
  one true positive and thickened edges are penalized.
"""

from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Optional

import numpy as np
from scipy import ndimage
from sklearn.base import BaseEstimator

from .edges import CannyParams, detect_edges
from .exceptions import ConfigError, GeometryError
from .image import ShiftVector, overlap_pair, to_luma
from .shift import find_global_shift
from .validation import check_edge_map, check_frame, check_same_shape

VERSIONS = ("1.0", "1.1")

# N, S, W, E, NW, NE, SW, SE as (dy, dx)
NEIGHBOR_ORDER = ((-1, 0), (1, 0), (0, -1), (0, 1),
                  (-1, -1), (-1, 1), (1, -1), (1, 1))

_SQUARE = np.ones((3, 3), dtype=bool)


class Label(IntEnum):
    NONE = 0
    TP = 1
    FP = 2
    FN = 3


@dataclass(frozen=True)
class ErqaConfig:
    version: str = "1.1"
    enable_global_shift: bool = True
    enable_local_tolerance: bool = True
    shift_radius: int = 3
    canny: CannyParams = field(default_factory=CannyParams)

    def __post_init__(self):
        version = str(self.version)
        if version not in VERSIONS:
            raise ConfigError(f"version must be one of {VERSIONS}, got {self.version!r}")
        object.__setattr__(self, "version", version)
        if version == "1.1" and not self.enable_local_tolerance:
            raise ConfigError("version 1.1 requires local tolerance; "
                              "use version 1.0 for the tolerance-free stages")
        if self.shift_radius < 0:
            raise ConfigError("shift_radius must be non-negative")


# Stage configurations of the ablation, from the bare comparison to v1.1.
ABLATION_STAGES = {
    "Without compensation (baseline)":
        ErqaConfig("1.0", enable_global_shift=False, enable_local_tolerance=False),
    "+ Compensation of global shift":
        ErqaConfig("1.0", enable_global_shift=True, enable_local_tolerance=False),
    "+ Compensation of local shift (v1.0)":
        ErqaConfig("1.0", enable_global_shift=True, enable_local_tolerance=True),
    "+ Penalize false wide edges (v1.1)":
        ErqaConfig("1.1", enable_global_shift=True, enable_local_tolerance=True),
}


@dataclass(frozen=True)
class EdgeMatchResult:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    classification: np.ndarray = field(repr=False, compare=False)
    shift: Optional[ShiftVector] = None

    def to_dict(self):
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn,
                "precision": self.precision, "recall": self.recall, "f1": self.f1}


def f1_score(tp, fp, fn):
    """Precision, recall and F1 from match counts.

    Vacuous ratios count as perfect: no distorted edges gives precision 1, no
    ground-truth edges gives recall 1, and two empty maps give F1 = 1.
    """
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be non-negative")
    if tp == fp == fn == 0:
        return 1.0, 1.0, 1.0
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    if precision + recall == 0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def _dilate(mask):
    return ndimage.binary_dilation(mask, structure=_SQUARE)


def one_to_one_assignment(gt_edges, dist_edges):
    """Greedy one-to-one matching of distorted edge pixels to GT edge pixels.

    Exact overlaps are matched first. The remaining distorted pixels are then
    visited in raster order; each takes the first still-free GT pixel among
    its 8 neighbors in N, S, W, E, NW, NE, SW, SE order.

    Returns
    -------
    matched : ndarray of bool
      Distorted pixels that found a partner.
    consumed : ndarray of bool
      GT pixels that were used.
    pairs : list of ((y, x), (y, x))
      Pass-2 assignments as (distorted, gt) coordinates.
    """
    gt = check_edge_map(gt_edges, "gt_edges")
    dist = check_edge_map(dist_edges, "dist_edges")
    check_same_shape(gt, dist, ("gt_edges", "dist_edges"))
    h, w = gt.shape

    matched = gt & dist
    free = np.zeros((h + 2, w + 2), dtype=bool)
    free[1:-1, 1:-1] = gt & ~dist

    # only pixels with a free GT neighbor can match in pass 2
    todo = dist & ~gt & _dilate(free[1:-1, 1:-1])
    pairs = []
    for y, x in np.argwhere(todo):
        for oy, ox in NEIGHBOR_ORDER:
            if free[y + 1 + oy, x + 1 + ox]:
                free[y + 1 + oy, x + 1 + ox] = False
                matched[y, x] = True
                pairs.append(((int(y), int(x)), (int(y + oy), int(x + ox))))
                break
    consumed = gt & ~free[1:-1, 1:-1]
    return matched, consumed, pairs


def match_edges(gt_edges, dist_edges, config=None):
    """Classify edge pixels of `dist_edges` against `gt_edges`.

    The rule is picked by ``config.enable_local_tolerance`` and
    ``config.version``; see the module docstring.
    """
    config = config or ErqaConfig()
    gt = check_edge_map(gt_edges, "gt_edges")
    dist = check_edge_map(dist_edges, "dist_edges")
    check_same_shape(gt, dist, ("gt_edges", "dist_edges"))

    if not config.enable_local_tolerance:
        tp_mask = dist & gt
        fn_mask = gt & ~dist
    elif config.version == "1.0":
        tp_mask = dist & _dilate(gt)
        fn_mask = gt & ~_dilate(dist)
    else:
        tp_mask, consumed, _ = one_to_one_assignment(gt, dist)
        fn_mask = gt & ~consumed
    fp_mask = dist & ~tp_mask

    labels = np.zeros(gt.shape, dtype=np.uint8)
    labels[fn_mask] = Label.FN
    labels[tp_mask] = Label.TP
    labels[fp_mask] = Label.FP

    tp, fp, fn = int(tp_mask.sum()), int(fp_mask.sum()), int(fn_mask.sum())
    precision, recall, f1 = f1_score(tp, fp, fn)
    return EdgeMatchResult(tp, fp, fn, precision, recall, f1, labels)


def erqa(gt, dist, config=None):
    """Edge-restoration quality of `dist` against ground truth `gt`.

    Optionally compensates a global integer shift, detects Canny edges on both
    luma planes and scores the match with F1. The returned result's ``f1`` is
    the ERQA value; ``shift`` is set when the global stage ran.
    """
    config = config or ErqaConfig()
    gt = check_frame(gt, "gt")
    dist = check_frame(dist, "dist")
    check_same_shape(gt, dist, ("gt", "dist"))
    shift = None
    if config.enable_global_shift:
        shift = find_global_shift(gt, dist, config.shift_radius).shift
        gt, dist = overlap_pair(gt, dist, shift)
    gt_edges = detect_edges(to_luma(gt), config.canny)
    dist_edges = detect_edges(to_luma(dist), config.canny)
    result = match_edges(gt_edges, dist_edges, config)
    return replace(result, shift=shift)


_COLORS = {
    Label.TP: (255, 255, 255),
    Label.FN: (0, 0, 255),
    Label.FP: (255, 0, 0),
}


def render_classification(result, background, dim=0.4):
    """Draw the label map over a dimmed copy of `background`.

    True positives are white, false negatives blue, false positives red.
    `result` may be an :class:`EdgeMatchResult` or a label array.
    """
    labels = result.classification if isinstance(result, EdgeMatchResult) else result
    labels = np.asarray(labels)
    bg = check_frame(background, "background", min_side=1)
    if bg.shape[:2] != labels.shape:
        raise GeometryError(
            f"background {bg.shape[:2]} and classification {labels.shape} differ in size")
    if bg.ndim == 2:
        bg = np.repeat(bg[:, :, None], 3, axis=2)
    out = np.floor(bg.astype(np.float64) * dim + 0.5).astype(np.uint8)
    for label, color in _COLORS.items():
        out[labels == label] = color
    return out


class ERQA(BaseEstimator):
    """Estimator-style ERQA scorer.

    The metric has nothing to learn: ``fit`` only validates the parameters.
    ``score(X, y)`` takes the ground truth as `X` and the restored frame as
    `y` and returns the F1 value (mean over frames for stacked input).

    Examples
    --------
    >>> import numpy as np
    >>> frame = np.random.default_rng(0).integers(0, 256, (64, 64), dtype=np.uint8)
    >>> ERQA().score(frame, frame)
    1.0
    """

    def __init__(self, version="1.1", global_shift=True, local_tolerance=True,
                 shift_radius=3, low_threshold=100.0, high_threshold=200.0,
                 magnitude_norm="L1"):
        self.version = version
        self.global_shift = global_shift
        self.local_tolerance = local_tolerance
        self.shift_radius = shift_radius
        self.low_threshold = low_threshold
        self.high_threshold = high_threshold
        self.magnitude_norm = magnitude_norm

    def _config(self):
        return ErqaConfig(
            version=self.version,
            enable_global_shift=self.global_shift,
            enable_local_tolerance=self.local_tolerance,
            shift_radius=self.shift_radius,
            canny=CannyParams(self.low_threshold, self.high_threshold, self.magnitude_norm),
        )

    def fit(self, X=None, y=None):
        self.config_ = self._config()
        return self

    def evaluate(self, X, y):
        return erqa(X, y, getattr(self, "config_", None) or self._config())

    def score(self, X, y):
        X = np.asarray(X)
        y = np.asarray(y)
        if X.shape != y.shape:
            raise GeometryError(f"X and y differ in shape: {X.shape} vs {y.shape}")
        is_stack = X.ndim == 4 or (X.ndim == 3 and X.shape[2] != 3)
        if is_stack:
            return float(np.mean([self.evaluate(a, b).f1 for a, b in zip(X, y)]))
        return self.evaluate(X, y).f1

    def __sklearn_is_fitted__(self):
        return True
