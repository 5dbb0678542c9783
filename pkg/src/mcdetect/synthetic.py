"""Synthetic fixtures with known geometry: carpet, fBm surfaces, phantoms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParamError

FBM_SIZES = (65, 129, 257, 513)


@dataclass(frozen=True)
class PhantomTruth:
    blob_centers: tuple[tuple[int, int], ...]
    blob_radius: int
    background_seed: int

    def to_dict(self) -> dict:
        return {
            "blob_centers": [list(c) for c in self.blob_centers],
            "blob_radius": self.blob_radius,
            "background_seed": self.background_seed,
        }


def generate_sierpinski_carpet(order: int) -> np.ndarray:
    """Boolean carpet of side ``3**order``; a pixel is empty if any base-3 digit pair is (1, 1)."""
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= 7:
        raise ParamError(f"carpet order must be an integer in [1, 7], got {order!r}")
    n = 3 ** order
    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    mask = np.ones((n, n), dtype=bool)
    for _ in range(order):
        mask &= ~((rows % 3 == 1) & (cols % 3 == 1))
        rows = rows // 3
        cols = cols // 3
    return mask


def _normalize(z: np.ndarray) -> np.ndarray:
    lo, hi = z.min(), z.max()
    if hi == lo:
        return np.zeros(z.shape, dtype=np.uint8)
    return np.rint((z - lo) * (255.0 / (hi - lo))).astype(np.uint8)


def generate_fbm_surface(hurst: float, size: int = 257, seed: int = 0) -> np.ndarray:
    """Diamond-square midpoint displacement surface, rescaled to [0, 255].

    The displacement deviation shrinks by ``2 ** (-hurst / 2)`` at every
    half-step (diamond, then square), i.e. by ``2 ** -hurst`` per octave.
    """
    if size not in FBM_SIZES:
        raise ParamError(f"size must be one of {FBM_SIZES}, got {size}")
    if not 0.0 < hurst <= 1.0:
        raise ParamError(f"hurst must lie in (0, 1], got {hurst}")
    rng = np.random.default_rng(seed)
    n = size - 1
    z = np.zeros((size, size))
    z[::n, ::n] = rng.standard_normal((2, 2))
    shrink = 2.0 ** (-hurst / 2)
    sigma = 1.0
    step = n
    while step > 1:
        half = step // 2
        sigma *= shrink
        corners = (z[0:n:step, 0:n:step] + z[0:n:step, step::step]
                   + z[step::step, 0:n:step] + z[step::step, step::step])
        z[half:n:step, half:n:step] = corners / 4 + sigma * rng.standard_normal(corners.shape)

        sigma *= shrink
        for r0, c0 in ((0, half), (half, 0)):
            rr, cc = np.meshgrid(np.arange(r0, size, step), np.arange(c0, size, step), indexing="ij")
            total = np.zeros(rr.shape)
            count = np.zeros(rr.shape)
            for dr, dc in ((-half, 0), (half, 0), (0, -half), (0, half)):
                r2, c2 = rr + dr, cc + dc
                inside = (r2 >= 0) & (r2 <= n) & (c2 >= 0) & (c2 <= n)
                total[inside] += z[r2[inside], c2[inside]]
                count[inside] += 1
            z[rr, cc] = total / count + sigma * rng.standard_normal(rr.shape)
        step = half
    return _normalize(z)


def generate_phantom(k: int, size: int = 256, seed: int = 0,
                     blob_radius: int = 3) -> tuple[np.ndarray, PhantomTruth]:
    """Smooth dim background with ``k`` bright Gaussian spots and light noise."""
    if not 1 <= k <= 20:
        raise ParamError(f"blob count must lie in [1, 20], got {k}")
    if size < 128:
        raise ParamError(f"phantom size must be >= 128, got {size}")
    if not 2 <= blob_radius <= 4:
        raise ParamError(f"blob radius must lie in [2, 4], got {blob_radius}")
    rng = np.random.default_rng(seed)

    yy, xx = np.mgrid[0:size, 0:size] / size
    background = np.zeros((size, size))
    for _ in range(3):
        fy, fx = rng.uniform(0.5, 1.5, size=2)
        py, px = rng.uniform(0, 2 * np.pi, size=2)
        background += np.sin(2 * np.pi * fy * yy + py) * np.cos(2 * np.pi * fx * xx + px)
    background = 50 + 40 * (background - background.min()) / np.ptp(background)

    margin = max(blob_radius + 2, 4 * blob_radius)
    min_sep = 4 * blob_radius
    centers: list[tuple[int, int]] = []
    for _ in range(200 * k):
        if len(centers) == k:
            break
        c = tuple(int(v) for v in rng.integers(margin, size - margin, size=2))
        if all((c[0] - o[0]) ** 2 + (c[1] - o[1]) ** 2 >= min_sep ** 2 for o in centers):
            centers.append(c)
    if len(centers) < k:
        raise ParamError(f"cannot place {k} blobs with separation {min_sep} in a {size}px image")

    image = background
    rows, cols = np.mgrid[0:size, 0:size]
    for r, c in centers:
        spot = np.exp(-((rows - r) ** 2 + (cols - c) ** 2) / (2.0 * (blob_radius / 2.0) ** 2))
        image = np.maximum(image, image + (235 - image[r, c]) * spot)

    image = image + rng.normal(0.0, 1.0, size=image.shape)
    pixels = np.clip(np.rint(image), 0, 255).astype(np.uint8)
    return pixels, PhantomTruth(tuple(centers), blob_radius, seed)
