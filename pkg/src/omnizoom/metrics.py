"""Sphere-weighted fidelity metrics for ERP images.

Both metrics weight each row by the cosine of its pixel-center latitude,
compensating the oversampling of high latitudes in the equirectangular
layout. WS-PSNR of identical images is the +inf sentinel, serialized as the
string "inf" in JSON reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import BadDimsError, DimMismatchError, TooSmallError
from .image import ErpImage

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
WMSE_FLOOR = 1e-20


@dataclass(frozen=True)
class WeightMap:
    """Per-row cos-latitude weights, broadcast across columns."""

    height: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (self.height,):
            raise BadDimsError(f"weights shape {w.shape} != ({self.height},)")
        if np.any(w <= 0.0):
            raise ValueError("weights must be strictly positive")
        object.__setattr__(self, "weights", w)


def ws_weights(H: int) -> WeightMap:
    """Cos-latitude row weights at the half-pixel-center convention.

    Evaluated as cos((i - H/2 + 0.5) * pi / H): the argument negates exactly
    under i -> H-1-i, so mirrored rows get bit-identical weights.
    """
    if H < 2:
        raise BadDimsError(f"need H >= 2, got {H}")
    arg = (np.arange(H) - H / 2 + 0.5) * (math.pi / H)
    return WeightMap(H, np.cos(arg))


def _check_dims(a: ErpImage, b: ErpImage) -> None:
    if a.samples.shape != b.samples.shape:
        raise DimMismatchError(f"{a.samples.shape} != {b.samples.shape}")


def ws_psnr(a: ErpImage, b: ErpImage, peak: float = 1.0) -> float:
    """Sphere-weighted PSNR in decibels; math.inf when the images coincide."""
    _check_dims(a, b)
    w = ws_weights(a.height).weights[:, None, None]
    diff = a.samples - b.samples
    wmse = float(np.sum(w * diff * diff)) / (a.channels * float(np.sum(w)) * a.width)
    if wmse < WMSE_FLOOR:
        return math.inf
    return 10.0 * math.log10(peak * peak / wmse)


def _windowed(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # wrap across the longitude seam, clamp at the poles
    out = correlate1d(img, kernel, axis=1, mode="wrap")
    return correlate1d(out, kernel, axis=0, mode="nearest")


def ws_ssim(a: ErpImage, b: ErpImage, peak: float = 1.0) -> float:
    """Sphere-weighted SSIM: Gaussian 11x11 window (sigma 1.5), full-map
    cos-latitude weighting, channels averaged."""
    _check_dims(a, b)
    if a.height < SSIM_WINDOW or a.width < SSIM_WINDOW:
        raise TooSmallError(f"need at least {SSIM_WINDOW}x{SSIM_WINDOW}, "
                            f"got {a.height}x{a.width}")
    half = SSIM_WINDOW // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g1 = np.exp(-(x * x) / (2.0 * SSIM_SIGMA ** 2))
    g1 /= g1.sum()

    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    ia, ib = a.samples, b.samples
    mu1 = _windowed(ia, g1)
    mu2 = _windowed(ib, g1)
    s1 = _windowed(ia * ia, g1) - mu1 * mu1
    s2 = _windowed(ib * ib, g1) - mu2 * mu2
    s12 = _windowed(ia * ib, g1) - mu1 * mu2
    ssim_map = ((2.0 * mu1 * mu2 + c1) * (2.0 * s12 + c2)) / (
        (mu1 * mu1 + mu2 * mu2 + c1) * (s1 + s2 + c2))

    w = ws_weights(a.height).weights[:, None, None]
    score = float(np.sum(w * ssim_map) / (np.sum(w) * a.width * a.channels))
    return min(max(score, -1.0), 1.0)  # rounding can land a hair outside


def metric_report(metric: str, value: float, peak: float,
                  dims: tuple[int, int, int]) -> dict:
    """JSON-ready report; +inf serializes as the string "inf"."""
    return {
        "metric": metric,
        "value": "inf" if math.isinf(value) else value,
        "peak": peak,
        "dims": list(dims),
    }
