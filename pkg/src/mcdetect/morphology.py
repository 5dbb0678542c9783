"""Flat binary and grayscale morphology, hole filling and component labelling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ParamError
from .image_io import as_gray


@dataclass(frozen=True, eq=False)
class StructuringElement:
    """Odd-sided boolean pattern whose origin is the centre cell."""

    pattern: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        pat = np.array(self.pattern, dtype=bool)
        if pat.ndim != 2 or pat.shape[0] != pat.shape[1]:
            raise ParamError("structuring element must be a square grid")
        side = pat.shape[0]
        if side % 2 == 0 or side > 9:
            raise ParamError(f"structuring element side must be odd and <= 9, got {side}")
        if not pat[side // 2, side // 2]:
            raise ParamError("structuring element origin must be foreground")
        pat.setflags(write=False)
        object.__setattr__(self, "pattern", pat)

    @property
    def radius(self) -> int:
        return self.pattern.shape[0] // 2

    @property
    def offsets(self) -> list[tuple[int, int]]:
        r = self.radius
        return [(int(i) - r, int(j) - r) for i, j in zip(*np.nonzero(self.pattern))]

    def reflect(self) -> "StructuringElement":
        return StructuringElement(self.pattern[::-1, ::-1], name=f"reflect({self.name})")

    def __eq__(self, other):
        if not isinstance(other, StructuringElement):
            return NotImplemented
        return np.array_equal(self.pattern, other.pattern)

    def __hash__(self):
        return hash(self.pattern.tobytes())


def square(side: int = 3) -> StructuringElement:
    return StructuringElement(np.ones((side, side), dtype=bool), name=f"square{side}")


def diamond(radius: int = 1) -> StructuringElement:
    r = np.arange(-radius, radius + 1)
    return StructuringElement(np.abs(r[:, None]) + np.abs(r[None, :]) <= radius, name=f"diamond{radius}")


PRESETS = {"square3": square(3), "diamond1": diamond(1)}


def structuring_element(name: str) -> StructuringElement:
    try:
        return PRESETS[name]
    except KeyError:
        raise ParamError(f"unknown structuring element {name!r}; choose from {sorted(PRESETS)}") from None


def _shifted(a: np.ndarray, dr: int, dc: int, fill) -> np.ndarray:
    # out[r, c] = a[r + dr, c + dc], `fill` where that falls outside the grid
    h, w = a.shape
    out = np.full_like(a, fill)
    if abs(dr) >= h or abs(dc) >= w:
        return out
    out[max(0, -dr):h - max(0, dr), max(0, -dc):w - max(0, dc)] = a[max(0, dr):h - max(0, -dr), max(0, dc):w - max(0, -dc)]
    return out


def _as_mask(mask) -> np.ndarray:
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ParamError("mask must be 2-D")
    return m.astype(bool, copy=False)


def dilate_binary(mask, se: StructuringElement, border_value: bool = False) -> np.ndarray:
    """Set a pixel when the reflected element placed there hits the mask.

    Cells outside the grid read as ``border_value`` (background by default).
    """
    m = _as_mask(mask)
    out = np.zeros(m.shape, dtype=bool)
    for dr, dc in se.offsets:
        out |= _shifted(m, -dr, -dc, border_value)
    return out


def erode_binary(mask, se: StructuringElement, border_value: bool = False) -> np.ndarray:
    """Keep a pixel when every element cell placed there lands on the mask.

    Cells outside the grid read as ``border_value``; the default treats them
    as misses, so objects touching the frame lose their border pixels.
    """
    m = _as_mask(mask)
    out = np.ones(m.shape, dtype=bool)
    for dr, dc in se.offsets:
        out &= _shifted(m, dr, dc, border_value)
    return out


# Closing and opening use the erosion that is adjoint to dilate_binary
# (outside cells read as hits), which makes them extensive/anti-extensive
# and idempotent up to the frame.
def closing_binary(mask, se: StructuringElement) -> np.ndarray:
    return erode_binary(dilate_binary(mask, se), se, border_value=True)


def opening_binary(mask, se: StructuringElement) -> np.ndarray:
    return dilate_binary(erode_binary(mask, se, border_value=True), se)


def morph_gray(image, se: StructuringElement, mode: str) -> np.ndarray:
    """Flat grayscale dilation (max) or erosion (min) with replicate borders."""
    img = as_gray(image)
    r = se.radius
    p = np.pad(img, r, mode="edge")
    h, w = img.shape
    if mode == "dilate":
        out = np.zeros_like(img)
        for dr, dc in se.offsets:
            np.maximum(out, p[r - dr:r - dr + h, r - dc:r - dc + w], out=out)
    elif mode == "erode":
        out = np.full_like(img, 255)
        for dr, dc in se.offsets:
            np.minimum(out, p[r + dr:r + dr + h, r + dc:r + dc + w], out=out)
    else:
        raise ParamError(f"mode must be 'dilate' or 'erode', got {mode!r}")
    return out


def closing_gray(image, se: StructuringElement) -> np.ndarray:
    return morph_gray(morph_gray(image, se, "dilate"), se, "erode")


def fill_holes(mask) -> np.ndarray:
    """Fill background regions that are not 4-connected to the image border."""
    return ndimage.binary_fill_holes(_as_mask(mask), structure=ndimage.generate_binary_structure(2, 1))


def outline(mask, se: StructuringElement | None = None) -> np.ndarray:
    m = _as_mask(mask)
    return m & ~erode_binary(m, se if se is not None else diamond(1))


@dataclass(frozen=True)
class Cluster:
    id: int
    area: int
    centroid: tuple[float, float]
    bbox: tuple[int, int, int, int]  # min_row, min_col, max_row, max_col (inclusive)

    def to_dict(self) -> dict:
        return {"id": self.id, "area": self.area, "centroid": list(self.centroid), "bbox": list(self.bbox)}


@dataclass(frozen=True, eq=False)
class ClusterReport:
    labels: np.ndarray
    clusters: tuple[Cluster, ...]

    def __len__(self) -> int:
        return len(self.clusters)


def connected_components(mask, connectivity: int = 8, min_area: int = 1) -> ClusterReport:
    """Label foreground regions, drop those below ``min_area`` and renumber.

    Clusters are ordered by area (largest first), ties broken by the top-left
    corner of the bounding box; label ``i`` in the grid is ``clusters[i-1]``.
    """
    if connectivity not in (4, 8):
        raise ParamError(f"connectivity must be 4 or 8, got {connectivity}")
    if min_area < 1:
        raise ParamError(f"min_area must be >= 1, got {min_area}")
    m = _as_mask(mask)
    structure = ndimage.generate_binary_structure(2, 1 if connectivity == 4 else 2)
    raw, n = ndimage.label(m, structure=structure)
    labels = np.zeros(m.shape, dtype=np.int32)
    if n == 0:
        return ClusterReport(labels, ())

    found = []
    for index, slc in enumerate(ndimage.find_objects(raw), start=1):
        rows, cols = np.nonzero(raw[slc] == index)
        area = rows.size
        if area < min_area:
            continue
        rows = rows + slc[0].start
        cols = cols + slc[1].start
        bbox = (int(rows.min()), int(cols.min()), int(rows.max()), int(cols.max()))
        found.append((index, area, (float(rows.mean()), float(cols.mean())), bbox))
    found.sort(key=lambda item: (-item[1], item[3][0], item[3][1]))

    clusters = []
    for new_id, (index, area, centroid, bbox) in enumerate(found, start=1):
        labels[raw == index] = new_id
        clusters.append(Cluster(new_id, int(area), centroid, bbox))
    return ClusterReport(labels, tuple(clusters))
