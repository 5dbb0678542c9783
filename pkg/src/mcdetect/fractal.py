"""Box-counting fractal dimension and the derived Hurst coefficient."""
from __future__ import annotations

import dataclasses
import io
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError, EmptyInputError, InsufficientScalesError, ParamError
from .image_io import as_gray

MIN_EXTENT = 8
HURST_FLOOR = 0.05
HURST_CEIL = 1.0
GRAY_LEVELS = 256

_DIMENSION_RANGE = {"binary": (0.0, 2.0), "grayscale": (2.0, 3.0)}


@dataclass(frozen=True)
class ScaleSeries:
    """Box counts per box size; ``ratios[i] * base_extent == box_sizes[i]``."""

    box_sizes: tuple[int, ...]
    counts: tuple[int, ...]
    base_extent: int

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(s / self.base_extent for s in self.box_sizes)

    def __len__(self) -> int:
        return len(self.box_sizes)

    def rows(self):
        return list(zip(self.box_sizes, self.ratios, self.counts))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("box_size,ratio,count\n")
        for size, ratio, count in self.rows():
            buf.write(f"{size},{ratio!r},{count}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class FractalEstimate:
    dimension: float
    fit_r2: float
    series: ScaleSeries
    kind: str
    raw_dimension: float
    clamped: bool
    topo_dim: int | None = None
    hurst_raw: float | None = None
    hurst: float | None = None

    @property
    def hurst_clamped(self) -> bool:
        return self.hurst is not None and self.hurst != self.hurst_raw


def box_sizes(base_extent: int) -> list[int]:
    """Dyadic box sides 2, 4, ... not exceeding half the base extent."""
    sizes = []
    s = 2
    while 2 * s <= base_extent:
        sizes.append(s)
        s *= 2
    return sizes


def _check_extent(shape) -> int:
    if min(shape) < MIN_EXTENT:
        raise ParamError(f"box counting needs at least {MIN_EXTENT}x{MIN_EXTENT} pixels, got {shape[1]}x{shape[0]}")
    return max(shape)


def _blocks(arr: np.ndarray, s: int) -> np.ndarray:
    h, w = arr.shape
    return arr.reshape(h // s, s, w // s, s)


def box_count_binary(mask) -> ScaleSeries:
    """Count occupied s x s cells, tiling from the top-left corner.

    Partial cells along the right and bottom edges count as full cells.
    """
    m = np.asarray(mask, dtype=bool)
    if m.ndim != 2:
        raise ParamError("mask must be 2-D")
    base = _check_extent(m.shape)
    if not m.any():
        raise EmptyInputError("mask has no foreground pixels")
    sizes = box_sizes(base)
    counts = []
    for s in sizes:
        h = -(-m.shape[0] // s) * s
        w = -(-m.shape[1] // s) * s
        padded = np.zeros((h, w), dtype=bool)
        padded[: m.shape[0], : m.shape[1]] = m
        counts.append(int(_blocks(padded, s).any(axis=(1, 3)).sum()))
    return ScaleSeries(tuple(sizes), tuple(counts), base)


def differential_box_count(image) -> ScaleSeries:
    """Sarkar-Chaudhuri differential box count of an 8-bit intensity surface.

    Each s x s cell is stacked with boxes of height ``s * 256 / base_extent``
    and contributes ``floor(max/h) - floor(min/h) + 1``. Only complete cells
    are counted; a trailing partial strip is ignored.
    """
    img = as_gray(image)
    base = _check_extent(img.shape)
    sizes = box_sizes(base)
    counts = []
    for s in sizes:
        h_box = s * GRAY_LEVELS / base
        rows = img.shape[0] // s * s
        cols = img.shape[1] // s * s
        cells = _blocks(img[:rows, :cols], s)
        top = np.floor(cells.max(axis=(1, 3)) / h_box)
        bottom = np.floor(cells.min(axis=(1, 3)) / h_box)
        counts.append(int((top - bottom + 1).sum()))
    return ScaleSeries(tuple(sizes), tuple(counts), base)


def fit_dimension(series: ScaleSeries, kind: str = "grayscale") -> FractalEstimate:
    """Least-squares slope of log(count) against log(1/ratio)."""
    if kind not in _DIMENSION_RANGE:
        raise ParamError(f"kind must be 'binary' or 'grayscale', got {kind!r}")
    if len(series) < 3:
        raise InsufficientScalesError(f"need at least 3 scales, got {len(series)}")
    if min(series.counts) < 1:
        raise ParamError("box counts must be positive")
    x = np.log(series.base_extent / np.asarray(series.box_sizes, dtype=np.float64))
    y = np.log(np.asarray(series.counts, dtype=np.float64))
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DegenerateFitError("all scales coincide")
    dy = y - y.mean()
    slope = float(dx @ dy) / sxx
    residual = dy - slope * dx
    ss_res = float(residual @ residual)
    ss_tot = float(dy @ dy)
    if ss_tot <= 1e-12 * max(1.0, float(y @ y)):
        r2 = 1.0 if ss_res <= 1e-12 * max(1.0, float(y @ y)) else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    lo, hi = _DIMENSION_RANGE[kind]
    dimension = min(hi, max(lo, slope))
    return FractalEstimate(
        dimension=dimension,
        fit_r2=r2,
        series=series,
        kind=kind,
        raw_dimension=slope,
        clamped=abs(dimension - slope) > 1e-9,
    )


def hurst_coefficient(estimate: FractalEstimate, topo_dim: int = 3, floor: float = HURST_FLOOR) -> FractalEstimate:
    """Hurst coefficient as topological minus fractal dimension, clamped to [floor, 1]."""
    if topo_dim not in (2, 3):
        raise ParamError(f"topological dimension must be 2 or 3, got {topo_dim}")
    if not 0.0 < floor <= HURST_CEIL:
        raise ParamError(f"hurst floor must lie in (0, 1], got {floor}")
    raw = topo_dim - estimate.dimension
    return dataclasses.replace(estimate, topo_dim=topo_dim, hurst_raw=raw, hurst=min(HURST_CEIL, max(floor, raw)))


def estimate_surface(image, topo_dim: int = 3, floor: float = HURST_FLOOR) -> FractalEstimate:
    """Differential box count, fit and Hurst derivation for a grayscale image."""
    return hurst_coefficient(fit_dimension(differential_box_count(image), "grayscale"), topo_dim, floor)


def estimate_mask(mask, topo_dim: int = 2, floor: float = HURST_FLOOR) -> FractalEstimate:
    return hurst_coefficient(fit_dimension(box_count_binary(mask), "binary"), topo_dim, floor)
