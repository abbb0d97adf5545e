"""Input validation helpers.

Frames are plain numpy arrays: ``(H, W)`` for a single plane or ``(H, W, 3)``
for interleaved RGB, always ``uint8``.  Edge maps are ``(H, W)`` boolean arrays.
"""

import numpy as np

from .exceptions import GeometryError

MIN_SIDE = 8


def check_frame(frame, name="frame", *, gray=False, min_side=MIN_SIDE):
    """Validate and return `frame` as a uint8 array.

    Integer arrays with values in [0, 255] are accepted and cast; anything
    else (floats, out-of-range values, wrong rank) raises.
    """
    arr = np.asarray(frame)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
        raise GeometryError(
            f"{name} must have shape (H, W) or (H, W, 3), got {arr.shape}")
    if gray and arr.ndim != 2:
        raise GeometryError(f"{name} must be single-channel, got {arr.shape[2]} channels")
    if arr.dtype != np.uint8:
        if arr.dtype.kind not in "iub":
            raise TypeError(f"{name} must hold 8-bit integer samples, got dtype {arr.dtype}")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError(f"{name} samples must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    h, w = arr.shape[:2]
    if h < min_side or w < min_side:
        raise GeometryError(f"{name} is {w}x{h}; both sides must be at least {min_side}")
    return arr


def check_edge_map(edges, name="edges"):
    arr = np.asarray(edges)
    if arr.ndim != 2:
        raise GeometryError(f"{name} must be a 2-D mask, got shape {arr.shape}")
    return arr.astype(bool, copy=False)


def check_same_shape(a, b, names=("a", "b")):
    if a.shape != b.shape:
        raise GeometryError(
            f"{names[0]} and {names[1]} differ in shape: {a.shape} vs {b.shape}")
