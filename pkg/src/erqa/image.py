"""Frame I/O, color conversion, cropping and shift geometry."""

import struct
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image

from .exceptions import DecodeError, GeometryError
from .validation import MIN_SIDE, check_frame, check_same_shape

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_COLOR_TYPES = {0: "grayscale", 2: "RGB", 3: "palette", 4: "grayscale+alpha", 6: "RGBA"}


class Region(NamedTuple):
    """Axis-aligned crop rectangle in pixels; (x, y) is the top-left corner."""

    x: int
    y: int
    w: int
    h: int


class ShiftVector(NamedTuple):
    """Integer displacement of the distorted frame relative to ground truth.

    Positive ``dx`` means distorted content sits to the right, positive ``dy``
    means it sits lower.
    """

    dx: int
    dy: int

    def __neg__(self):
        return ShiftVector(-self.dx, -self.dy)


def _read_ihdr(path):
    with open(path, "rb") as fh:
        head = fh.read(33)
    if len(head) < 33 or not head.startswith(PNG_SIGNATURE) or head[12:16] != b"IHDR":
        raise DecodeError(f"{path}: not a PNG file")
    width, height, bit_depth, color_type = struct.unpack(">IIBB", head[16:26])
    return width, height, bit_depth, color_type


def load_frame(path):
    """Decode an 8-bit grayscale or RGB PNG into a uint8 array.

    Alpha is dropped and palette images are expanded to RGB. Anything that is
    not 8 bits per sample is rejected, so is a non-PNG file.

    Returns
    -------
    frame : ndarray
      ``(H, W)`` for grayscale input, ``(H, W, 3)`` otherwise.
    """
    path = Path(path)
    try:
        _, _, bit_depth, color_type = _read_ihdr(path)
    except OSError as exc:
        if isinstance(exc, DecodeError):
            raise
        raise DecodeError(f"{path}: {exc.strerror or exc}") from exc
    if color_type not in _COLOR_TYPES:
        raise DecodeError(f"{path}: unsupported color type {color_type}")
    if color_type == 3:
        if bit_depth > 8:
            raise DecodeError(f"{path}: unsupported bit depth {bit_depth}")
    elif bit_depth != 8:
        raise DecodeError(f"{path}: unsupported bit depth {bit_depth} "
                          f"({_COLOR_TYPES[color_type]}); only 8-bit samples are supported")
    try:
        with Image.open(path) as im:
            im.load()
            if color_type in (0, 4):
                im = im.convert("L")
            else:
                im = im.convert("RGB")
            return np.array(im, dtype=np.uint8)
    except (OSError, ValueError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc


def save_frame(frame, path):
    """Write a frame (or a 0/1 edge mask, scaled to 0/255) as an 8-bit PNG."""
    arr = np.asarray(frame)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    arr = check_frame(arr, "frame", min_side=1)
    Image.fromarray(arr).save(path, format="PNG")


def to_luma(frame):
    """Rec. 601 luma, rounded half-up; single-plane input is returned as is."""
    frame = check_frame(frame, min_side=1)
    if frame.ndim == 2:
        return frame
    rgb = frame.astype(np.int32)
    # integer weights avoid float rounding at exact .5 boundaries
    y = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
    return np.clip(y, 0, 255).astype(np.uint8)


def check_region(region, shape):
    x, y, w, h = region
    height, width = shape[:2]
    if w < MIN_SIDE or h < MIN_SIDE:
        raise GeometryError(f"region {tuple(region)} smaller than {MIN_SIDE}x{MIN_SIDE}")
    if x < 0 or y < 0 or x + w > width or y + h > height:
        raise GeometryError(
            f"region {tuple(region)} does not fit inside a {width}x{height} frame")
    return Region(int(x), int(y), int(w), int(h))


def crop(frame, region):
    frame = check_frame(frame, min_side=1)
    x, y, w, h = check_region(region, frame.shape)
    return frame[y:y + h, x:x + w].copy()


def _axis_slices(n, d):
    # gt index i corresponds to dist index i + d
    lo = max(0, -d)
    hi = n - max(0, d)
    return slice(lo, hi), slice(lo + d, hi + d)


def overlap_pair(gt, dist, shift):
    """Crop both frames to the area where they overlap under `shift`.

    Under the hypothesis ``dist[y + dy, x + dx] == gt[y, x]`` the two returned
    arrays are pixel-aligned. Both have size ``(H - |dy|, W - |dx|)``; no
    pixels are synthesized.
    """
    gt = np.asarray(gt)
    dist = np.asarray(dist)
    check_same_shape(gt, dist, ("gt", "dist"))
    dx, dy = int(shift[0]), int(shift[1])
    h, w = gt.shape[:2]
    if abs(dx) >= w or abs(dy) >= h:
        raise GeometryError(f"shift ({dx}, {dy}) leaves no overlap for a {w}x{h} frame")
    gy, dy_ = _axis_slices(h, dy)
    gx, dx_ = _axis_slices(w, dx)
    return gt[gy, gx], dist[dy_, dx_]
