"""Reference metrics: SSIM, plus a panel comparing raw and shift-compensated scores."""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .exceptions import GeometryError
from .image import to_luma
from .matching import ErqaConfig, erqa
from .shift import psnr, score_with_compensation
from .validation import check_frame, check_same_shape

PANEL_METRICS = ("PSNR", "SSIM", "ERQAv1.0", "ERQAv1.1")
PANEL_COLUMNS = ("raw", "compensated")


@dataclass(frozen=True)
class SsimParams:
    window: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0


def gaussian_window(size, sigma):
    """Normalized 1-D Gaussian taps; the 2-D window is their outer product."""
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _filter_valid(img, taps):
    r = len(taps) // 2
    out = ndimage.correlate1d(img, taps, axis=0, mode="constant")
    out = ndimage.correlate1d(out, taps, axis=1, mode="constant")
    return out[r:img.shape[0] - r, r:img.shape[1] - r]


def ssim_map(a, b, params=None):
    params = params or SsimParams()
    a = check_frame(a, "a", gray=True, min_side=1).astype(np.float64)
    b = check_frame(b, "b", gray=True, min_side=1).astype(np.float64)
    check_same_shape(a, b)
    if min(a.shape) < params.window:
        raise GeometryError(
            f"frames of size {a.shape[1]}x{a.shape[0]} are smaller than the "
            f"{params.window}x{params.window} SSIM window")
    taps = gaussian_window(params.window, params.sigma)
    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2

    mu_a = _filter_valid(a, taps)
    mu_b = _filter_valid(b, taps)
    var_a = _filter_valid(a * a, taps) - mu_a * mu_a
    var_b = _filter_valid(b * b, taps) - mu_b * mu_b
    cov = _filter_valid(a * b, taps) - mu_a * mu_b

    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def ssim(a, b, params=None):
    """Mean SSIM over all window positions fully inside the frame."""
    return float(ssim_map(a, b, params).mean())


def metric_panel(gt, dist, config=None):
    """Raw and globally shift-compensated values of PSNR, SSIM and both ERQA versions.

    Returns ``{metric: {"raw": value, "compensated": value}}`` with metrics in
    the order PSNR, SSIM, ERQAv1.0, ERQAv1.1. For the ERQA rows the raw column
    disables the built-in global stage and the compensated column enables it.
    """
    base = config or ErqaConfig()
    gt = check_frame(gt, "gt")
    dist = check_frame(dist, "dist")
    check_same_shape(gt, dist, ("gt", "dist"))
    radius = base.shift_radius
    gt_y, dist_y = to_luma(gt), to_luma(dist)

    panel = {
        "PSNR": {"raw": psnr(gt_y, dist_y),
                 "compensated": score_with_compensation(psnr, gt_y, dist_y, radius)},
        "SSIM": {"raw": ssim(gt_y, dist_y),
                 "compensated": score_with_compensation(ssim, gt_y, dist_y, radius)},
    }
    for version in ("1.0", "1.1"):
        row = {}
        for column, flag in zip(PANEL_COLUMNS, (False, True)):
            cfg = ErqaConfig(version, enable_global_shift=flag, enable_local_tolerance=True,
                             shift_radius=radius, canny=base.canny)
            row[column] = erqa(gt, dist, cfg).f1
        panel[f"ERQAv{version}"] = row
    return panel
