"""Equirectangular image container and PNG input/output."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from .errors import BadDimsError, IoError


@dataclass(frozen=True)
class ErpImage:
    """H x W x C float image in [0, 1], equirectangular layout.

    The 2:1 aspect of a full panorama (W = 2H) is enforced by default;
    pass allow_any_aspect=True for crops and synthetic fixtures.
    """

    samples: np.ndarray
    allow_any_aspect: bool = False

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise BadDimsError(f"expected H x W x C samples, got shape {arr.shape}")
        if not self.allow_any_aspect and arr.shape[1] != 2 * arr.shape[0]:
            raise BadDimsError(
                f"ERP images are W = 2H ({arr.shape[1]} != 2*{arr.shape[0]}); "
                "pass allow_any_aspect=True to override")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite samples")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("samples must lie in [0, 1]")
        object.__setattr__(self, "samples", arr)

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def channels(self) -> int:
        return self.samples.shape[2]

    @classmethod
    def from_array(cls, arr, clip: bool = False, allow_any_aspect: bool = False) -> "ErpImage":
        arr = np.asarray(arr, dtype=np.float64)
        if clip:
            arr = np.clip(arr, 0.0, 1.0)
        return cls(arr, allow_any_aspect=allow_any_aspect)


def quantize(img: ErpImage, bit_depth: int = 8) -> np.ndarray:
    """Round-half-up quantization to uint8 or uint16."""
    if bit_depth not in (8, 16):
        raise ValueError("bit_depth must be 8 or 16")
    peak = float(2 ** bit_depth - 1)
    q = np.floor(img.samples * peak + 0.5)
    return q.astype(np.uint8 if bit_depth == 8 else np.uint16)


def save_png(img: ErpImage, path, bit_depth: int = 8) -> None:
    """Encode as PNG; 3-channel images are written as RGB."""
    q = quantize(img, bit_depth)
    if q.shape[2] == 1:
        data = q[:, :, 0]
    elif q.shape[2] == 3:
        data = cv2.cvtColor(q, cv2.COLOR_RGB2BGR)
    else:
        raise BadDimsError(f"PNG output supports 1 or 3 channels, got {q.shape[2]}")
    if not cv2.imwrite(str(path), data):
        raise IoError(f"failed to write {path}")


def load_png(path, allow_any_aspect: bool = True) -> ErpImage:
    """Decode an 8- or 16-bit PNG (or other OpenCV-readable format) to floats."""
    if not Path(path).is_file():
        raise IoError(f"no such file: {path}")
    data = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if data is None:
        raise IoError(f"failed to decode {path}")
    if data.dtype == np.uint8:
        peak = 255.0
    elif data.dtype == np.uint16:
        peak = 65535.0
    else:
        raise IoError(f"unsupported sample type {data.dtype} in {path}")
    if data.ndim == 3:
        if data.shape[2] == 4:
            data = data[:, :, :3]
        data = cv2.cvtColor(data, cv2.COLOR_BGR2RGB)
    return ErpImage.from_array(data.astype(np.float64) / peak,
                               allow_any_aspect=allow_any_aspect)
