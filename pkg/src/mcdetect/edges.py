"""Sobel gradients and factor-scaled edge thresholding."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParamError
from .image_io import as_gray

DEFAULT_SOBEL_SCALE = 4.0


@dataclass(frozen=True)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray

    @property
    def shape(self):
        return self.magnitude.shape


@dataclass(frozen=True)
class EdgeThreshold:
    base: float
    factor: float = 1.0

    @property
    def effective(self) -> float:
        return self.base * self.factor


def sobel_gradients(image) -> GradientField:
    """Sobel derivatives with replicate padding.

    With ``z1..z9`` the row-major 3x3 neighbourhood of a pixel, ``gx`` is the
    bottom row minus the top row (weights 1, 2, 1) and ``gy`` the right
    column minus the left column.
    """
    img = as_gray(image, min_size=3).astype(np.int32)
    p = np.pad(img, 1, mode="edge")
    h, w = img.shape

    def z(k):
        r, c = divmod(k - 1, 3)
        return p[r:r + h, c:c + w]

    gx = (z(7) + 2 * z(8) + z(9)) - (z(1) + 2 * z(2) + z(3))
    gy = (z(3) + 2 * z(6) + z(9)) - (z(1) + 2 * z(4) + z(7))
    magnitude = np.sqrt(gx.astype(np.float64) ** 2 + gy.astype(np.float64) ** 2)
    return GradientField(gx, gy, magnitude)


def auto_threshold(field: GradientField, scale: float = DEFAULT_SOBEL_SCALE) -> EdgeThreshold:
    if scale <= 0:
        raise ParamError(f"sobel scale must be positive, got {scale}")
    if field.magnitude.size == 0:
        raise ParamError("empty gradient field")
    return EdgeThreshold(base=scale * float(field.magnitude.mean()))


def _check_factor(factor: float) -> float:
    factor = float(factor)
    if not 0.0 < factor <= 1.0:
        raise ParamError(f"threshold factor must lie in (0, 1], got {factor}")
    return factor


def edge_threshold(field: GradientField, factor: float, scale: float = DEFAULT_SOBEL_SCALE) -> EdgeThreshold:
    return EdgeThreshold(base=auto_threshold(field, scale).base, factor=_check_factor(factor))


def binarize_edges(field: GradientField, factor: float, scale: float = DEFAULT_SOBEL_SCALE) -> np.ndarray:
    """Edge pixels are those with magnitude strictly above ``base * factor``."""
    threshold = edge_threshold(field, factor, scale)
    return field.magnitude > threshold.effective
