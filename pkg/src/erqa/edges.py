"""Canny edge detection tuned to the ERQA configuration (thresholds 100/200).

The detector follows the classic OpenCV layout: 3x3 Sobel derivatives with
replicated borders, L1 (default) or L2 gradient magnitude, non-maximum
suppression over four direction sectors and double-threshold hysteresis with
8-connectivity. There is no built-in Gaussian pre-smoothing unless
``blur_sigma`` is set.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import ConfigError
from .validation import check_frame

TAN_22_5 = np.sqrt(2.0) - 1.0
TAN_67_5 = np.sqrt(2.0) + 1.0

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class CannyParams:
    low_threshold: float = 100.0
    high_threshold: float = 200.0
    magnitude_norm: str = "L1"
    blur_sigma: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.low_threshold <= self.high_threshold:
            raise ConfigError(
                "thresholds must satisfy 0 < low <= high, got "
                f"low={self.low_threshold}, high={self.high_threshold}")
        if self.magnitude_norm not in ("L1", "L2"):
            raise ConfigError(f"magnitude_norm must be 'L1' or 'L2', not {self.magnitude_norm!r}")
        if self.blur_sigma is not None and self.blur_sigma <= 0:
            raise ConfigError("blur_sigma must be positive when given")


def sobel_gradients(plane):
    """3x3 Sobel derivatives (dx, dy) with replicated borders.

    Integer input yields exact int32 derivatives.
    """
    if plane.dtype.kind in "ub":
        plane = plane.astype(np.int32)
    p = np.pad(plane, 1, mode="edge")
    left = p[:-2, :-2] + 2 * p[1:-1, :-2] + p[2:, :-2]
    right = p[:-2, 2:] + 2 * p[1:-1, 2:] + p[2:, 2:]
    top = p[:-2, :-2] + 2 * p[:-2, 1:-1] + p[:-2, 2:]
    bottom = p[2:, :-2] + 2 * p[2:, 1:-1] + p[2:, 2:]
    return right - left, bottom - top


def gradient_magnitude(dx, dy, norm="L1"):
    if norm == "L1":
        return np.abs(dx) + np.abs(dy)
    return np.hypot(dx, dy)


def non_maximum_suppression(mag, dx, dy):
    """Boolean mask of pixels that are local maxima across the edge.

    Comparison follows OpenCV: along the horizontal and vertical sectors the
    pixel must be strictly greater than its left/upper neighbor and at least
    equal to its right/lower one, so a plateau two pixels wide yields a single
    edge pixel. Along diagonals both comparisons are strict. Neighbors outside
    the frame count as zero.
    """
    h, w = mag.shape
    padded = np.zeros((h + 2, w + 2), dtype=mag.dtype)
    padded[1:-1, 1:-1] = mag

    def nb(oy, ox):
        return padded[1 + oy:1 + oy + h, 1 + ox:1 + ox + w]

    ax = np.abs(dx)
    ay = np.abs(dy)
    horiz = ay < TAN_22_5 * ax
    vert = ay > TAN_67_5 * ax
    diag = ~(horiz | vert)
    same_sign = (dx > 0) == (dy > 0)

    keep = np.zeros((h, w), dtype=bool)
    keep |= horiz & (mag > nb(0, -1)) & (mag >= nb(0, 1))
    keep |= vert & (mag > nb(-1, 0)) & (mag >= nb(1, 0))
    keep |= diag & same_sign & (mag > nb(-1, -1)) & (mag > nb(1, 1))
    keep |= diag & ~same_sign & (mag > nb(-1, 1)) & (mag > nb(1, -1))
    return keep & (mag > 0)


def hysteresis(mag, candidates, low, high):
    """Keep candidate pixels >= low that connect to some pixel >= high."""
    weak = candidates & (mag >= low)
    labels, n = ndimage.label(weak, structure=_EIGHT_CONNECTED)
    if n == 0:
        return weak
    strong = weak & (mag >= high)
    seeded = np.zeros(n + 1, dtype=bool)
    seeded[labels[strong]] = True
    seeded[0] = False
    return seeded[labels]


def detect_edges(frame, params=None):
    """Binary Canny edge map of a single-channel frame.

    Parameters
    ----------
    frame : array_like
      ``(H, W)`` uint8 plane, at least 8x8.
    params : CannyParams, optional
      Defaults to thresholds 100/200 with L1 magnitude.

    Returns
    -------
    edges : ndarray of bool, shape ``(H, W)``
    """
    params = params or CannyParams()
    plane = check_frame(frame, gray=True)
    if params.blur_sigma is not None:
        plane = ndimage.gaussian_filter(plane.astype(np.float64), params.blur_sigma,
                                        mode="nearest")
    dx, dy = sobel_gradients(plane)
    mag = gradient_magnitude(dx, dy, params.magnitude_norm)
    keep = non_maximum_suppression(mag, dx, dy)
    return hysteresis(mag, keep, params.low_threshold, params.high_threshold)


class CannyEdgeDetector(TransformerMixin, BaseEstimator):
    """Estimator wrapper around :func:`detect_edges`.

    ``transform`` accepts a single ``(H, W)`` plane or a stack ``(N, H, W)``
    and returns boolean masks of the same shape. The detector is stateless, so
    ``fit`` only validates parameters.
    """

    def __init__(self, low_threshold=100.0, high_threshold=200.0,
                 magnitude_norm="L1", blur_sigma=None):
        self.low_threshold = low_threshold
        self.high_threshold = high_threshold
        self.magnitude_norm = magnitude_norm
        self.blur_sigma = blur_sigma

    def _params(self):
        return CannyParams(self.low_threshold, self.high_threshold,
                           self.magnitude_norm, self.blur_sigma)

    def fit(self, X=None, y=None):
        self.params_ = self._params()
        return self

    def transform(self, X):
        params = getattr(self, "params_", None) or self._params()
        X = np.asarray(X)
        if X.ndim == 3:
            return np.stack([detect_edges(f, params) for f in X])
        return detect_edges(X, params)

    def __sklearn_is_fitted__(self):
        # stateless: usable without fit
        return True
