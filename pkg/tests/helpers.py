"""Synthetic frames shared by the tests."""

import numpy as np
from scipy import ndimage


def textured_frame(seed, shape=(128, 128), sigma=1.5, gain=2500.0):
    """Smoothed noise with stretched contrast: plenty of Canny edges, no flat areas."""
    rng = np.random.default_rng(seed)
    base = ndimage.gaussian_filter(rng.random(shape), sigma, mode="wrap")
    return np.clip((base - base.mean()) * gain + 128, 0, 255).astype(np.uint8)


def translate(gt, dx, dy, seed=0):
    """Distorted frame = gt moved by (dx, dy); uncovered strips filled with noise."""
    rng = np.random.default_rng(seed)
    out = rng.integers(0, 256, gt.shape, dtype=np.uint8)
    h, w = gt.shape[:2]
    ys, yd = slice(max(0, -dy), h - max(0, dy)), slice(max(0, dy), h - max(0, -dy))
    xs, xd = slice(max(0, -dx), w - max(0, dx)), slice(max(0, dx), w - max(0, -dx))
    out[yd, xd] = gt[ys, xs]
    return out

