"""Global integer-shift compensation.

The distorted frame is assumed to be the ground truth translated by a small
integer vector. Every candidate in ``[-radius, radius]^2`` is scored by PSNR
on the overlapping area of the luma planes and the best one wins.
"""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import GeometryError
from .image import ShiftVector, overlap_pair, to_luma
from .validation import check_frame, check_same_shape

MAX_VALUE = 255.0


def mse(a, b):
    diff = a.astype(np.float64) - b.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr(a, b):
    """PSNR in dB of two single-channel 8-bit frames; ``inf`` when identical."""
    a = check_frame(a, "a", gray=True, min_side=1)
    b = check_frame(b, "b", gray=True, min_side=1)
    check_same_shape(a, b)
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(MAX_VALUE ** 2 / err)


@dataclass(frozen=True)
class ShiftSearchResult:
    """Outcome of the exhaustive search.

    ``psnr_grid[dy + radius, dx + radius]`` holds the PSNR of candidate
    ``(dx, dy)``: rows run over dy, columns over dx.
    """

    shift: ShiftVector
    psnr: float
    psnr_grid: np.ndarray

    @property
    def radius(self):
        return self.psnr_grid.shape[0] // 2

    def psnr_at(self, dx, dy):
        r = self.radius
        return float(self.psnr_grid[dy + r, dx + r])


def _tie_key(shift):
    dx, dy = shift
    return (abs(dx) + abs(dy), dy, dx)


def find_global_shift(gt, dist, radius=3):
    """Search integer shifts in ``[-radius, radius]^2`` maximizing PSNR.

    Each candidate is scored on its own overlap region. Ties are broken by
    the smallest ``|dx| + |dy|``, then smallest ``dy``, then smallest ``dx``.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    gt = to_luma(check_frame(gt, "gt", min_side=1))
    dist = to_luma(check_frame(dist, "dist", min_side=1))
    check_same_shape(gt, dist, ("gt", "dist"))
    h, w = gt.shape
    if min(h, w) <= 2 * radius + 8:
        raise GeometryError(
            f"{w}x{h} frames are too small for shift radius {radius}; "
            f"both sides must exceed {2 * radius + 8}")

    size = 2 * radius + 1
    grid = np.empty((size, size), dtype=np.float64)
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            a, b = overlap_pair(gt, dist, (dx, dy))
            grid[dy + radius, dx + radius] = psnr(a, b)

    best = grid.max()
    winners = [ShiftVector(int(dx) - radius, int(dy) - radius)
               for dy, dx in zip(*np.nonzero(grid == best))]
    shift = min(winners, key=_tie_key)
    grid.setflags(write=False)
    return ShiftSearchResult(shift=shift, psnr=float(best), psnr_grid=grid)


def score_with_compensation(metric, gt, dist, radius=3):
    """Apply `metric` to the frames after global shift compensation.

    With a winning shift of (0, 0) the result is exactly ``metric(gt, dist)``.
    """
    shift = find_global_shift(gt, dist, radius).shift
    a, b = overlap_pair(np.asarray(gt), np.asarray(dist), shift)
    return metric(a, b)


class GlobalShiftAligner(BaseEstimator):
    """Estimator form of the shift search.

    ``fit(gt, dist)`` estimates ``shift_``, ``psnr_`` and ``psnr_grid_``;
    ``transform(gt, dist)`` crops any pair of the same size to the overlap
    under the fitted shift.
    """

    def __init__(self, radius=3):
        self.radius = radius

    def fit(self, X, y):
        result = find_global_shift(X, y, self.radius)
        self.shift_ = result.shift
        self.psnr_ = result.psnr
        self.psnr_grid_ = result.psnr_grid
        return self

    def transform(self, X, y):
        check_is_fitted(self, "shift_")
        return overlap_pair(X, y, self.shift_)

    def fit_transform(self, X, y):
        return self.fit(X, y).transform(X, y)
