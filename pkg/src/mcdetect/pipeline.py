"""End-to-end microcalcification cluster detection and threshold comparison."""
from __future__ import annotations

import dataclasses
import json
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import edges, fractal, morphology
from .errors import ParamError
from .fractal import FractalEstimate
from .image_io import as_gray, encode_pgm, mask_to_gray
from .morphology import ClusterReport

MIN_IMAGE_SIZE = 8


@dataclass(frozen=True)
class PipelineConfig:
    threshold_mode: str = "hurst"
    fudge_factor: float = 0.5
    topo_dim: int = 3
    sobel_scale: float = edges.DEFAULT_SOBEL_SCALE
    pre_se: str = "square3"
    post_se: str = "diamond1"
    smooth_se: str = "diamond1"
    outline_se: str = "diamond1"
    min_cluster_area: int = 4
    connectivity: int = 8
    hurst_floor: float = fractal.HURST_FLOOR
    # "raw": dimension of the input image; "closed": of the pre-processed image
    dimension_source: str = "raw"

    def __post_init__(self):
        if self.threshold_mode not in ("hurst", "fudge"):
            raise ParamError(f"threshold_mode must be 'hurst' or 'fudge', got {self.threshold_mode!r}")
        if not 0.0 < self.fudge_factor <= 1.0:
            raise ParamError(f"fudge_factor must lie in (0, 1], got {self.fudge_factor}")
        if self.topo_dim not in (2, 3):
            raise ParamError(f"topo_dim must be 2 or 3, got {self.topo_dim}")
        if self.sobel_scale <= 0:
            raise ParamError(f"sobel_scale must be positive, got {self.sobel_scale}")
        if self.min_cluster_area < 1:
            raise ParamError(f"min_cluster_area must be >= 1, got {self.min_cluster_area}")
        if self.connectivity not in (4, 8):
            raise ParamError(f"connectivity must be 4 or 8, got {self.connectivity}")
        if not 0.0 < self.hurst_floor <= 1.0:
            raise ParamError(f"hurst_floor must lie in (0, 1], got {self.hurst_floor}")
        if self.dimension_source not in ("raw", "closed"):
            raise ParamError(f"dimension_source must be 'raw' or 'closed', got {self.dimension_source!r}")
        for name in ("pre_se", "post_se", "smooth_se", "outline_se"):
            morphology.structuring_element(getattr(self, name))

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True, eq=False)
class DetectionResult:
    estimate: FractalEstimate
    threshold: edges.EdgeThreshold
    edge_mask: np.ndarray
    dilated_mask: np.ndarray
    filled_mask: np.ndarray
    segmented_mask: np.ndarray
    outline_mask: np.ndarray
    clusters: ClusterReport
    overlay: np.ndarray
    config_used: PipelineConfig
    stage_trace: tuple[tuple[str, int | None], ...] = field(default=())

    def report(self) -> dict:
        est = self.estimate
        return {
            "dimension": est.dimension,
            "dimension_raw": est.raw_dimension,
            "hurst": est.hurst,
            "hurst_raw": est.hurst_raw,
            "fit_r2": est.fit_r2,
            "threshold_mode": self.config_used.threshold_mode,
            "threshold_factor": self.threshold.factor,
            "threshold_base": self.threshold.base,
            "effective_threshold": self.threshold.effective,
            "image_size": [int(self.edge_mask.shape[1]), int(self.edge_mask.shape[0])],
            "clusters": [c.to_dict() for c in self.clusters.clusters],
            "stage_trace": [{"stage": name, "foreground": count} for name, count in self.stage_trace],
            "scale_series": [
                {"box_size": s, "ratio": r, "count": n} for s, r, n in est.series.rows()
            ],
            "config": self.config_used.to_dict(),
        }

    def files(self) -> dict[str, bytes]:
        return {
            "edges.pgm": encode_pgm(mask_to_gray(self.edge_mask)),
            "segmented.pgm": encode_pgm(mask_to_gray(self.segmented_mask)),
            "outline.pgm": encode_pgm(mask_to_gray(self.outline_mask)),
            "overlay.pgm": encode_pgm(self.overlay),
            "report.json": _dump_json(self.report()),
        }

    def save(self, directory: str | os.PathLike) -> Path:
        return _write_directory(directory, self.files())


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    hurst_result: DetectionResult
    fudge_result: DetectionResult

    @property
    def xor_pixel_count(self) -> int:
        return int(np.count_nonzero(self.hurst_result.edge_mask ^ self.fudge_result.edge_mask))

    @property
    def edge_pixel_counts(self) -> dict[str, int]:
        return {
            "hurst": int(np.count_nonzero(self.hurst_result.edge_mask)),
            "fudge": int(np.count_nonzero(self.fudge_result.edge_mask)),
        }

    @property
    def cluster_counts(self) -> dict[str, int]:
        return {"hurst": len(self.hurst_result.clusters), "fudge": len(self.fudge_result.clusters)}

    def summary(self) -> dict:
        return {
            "xor_pixel_count": self.xor_pixel_count,
            "edge_pixel_counts": self.edge_pixel_counts,
            "cluster_counts": self.cluster_counts,
            "threshold_factors": {
                "hurst": self.hurst_result.threshold.factor,
                "fudge": self.fudge_result.threshold.factor,
            },
            "effective_thresholds": {
                "hurst": self.hurst_result.threshold.effective,
                "fudge": self.fudge_result.threshold.effective,
            },
        }

    def files(self) -> dict[str, bytes]:
        out = {}
        for method, result in (("hurst", self.hurst_result), ("fudge", self.fudge_result)):
            for name, data in result.files().items():
                out[f"{method}/{name}"] = data
        out["comparison.json"] = _dump_json(self.summary())
        return out

    def save(self, directory: str | os.PathLike) -> Path:
        return _write_directory(directory, self.files())


def _dump_json(obj) -> bytes:
    return (json.dumps(obj, indent=2) + "\n").encode("utf-8")


def _write_directory(directory, files: dict[str, bytes]) -> Path:
    # Everything is staged in a sibling temp dir so a failure leaves no partial output.
    target = Path(directory)
    target.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
    try:
        for name, data in files.items():
            path = staging / name
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
        if not target.exists():
            staging.rename(target)
            return target
        for name in files:
            dest = target / name
            dest.parent.mkdir(parents=True, exist_ok=True)
            os.replace(staging / name, dest)
    finally:
        if staging.exists():
            shutil.rmtree(staging)
    return target


def detect_clusters(image, config: PipelineConfig | None = None) -> DetectionResult:
    """Run the fractal-thresholded Sobel segmentation on one grayscale image."""
    config = config or PipelineConfig()
    img = as_gray(image)
    if min(img.shape) < MIN_IMAGE_SIZE:
        raise ParamError(f"image must be at least {MIN_IMAGE_SIZE}x{MIN_IMAGE_SIZE}, got {img.shape[1]}x{img.shape[0]}")
    se = morphology.structuring_element
    trace: list[tuple[str, int | None]] = [("input", None)]

    closed = morphology.closing_gray(img, se(config.pre_se))
    surface = img if config.dimension_source == "raw" else closed
    estimate = fractal.fit_dimension(fractal.differential_box_count(surface), "grayscale")
    trace.append((f"fractal_dimension[{config.dimension_source}]", None))
    trace.append(("gray_closing", None))
    estimate = fractal.hurst_coefficient(estimate, config.topo_dim, config.hurst_floor)
    trace.append(("hurst", None))

    factor = estimate.hurst if config.threshold_mode == "hurst" else config.fudge_factor
    gradients = edges.sobel_gradients(closed)
    threshold = edges.edge_threshold(gradients, factor, config.sobel_scale)
    edge_mask = gradients.magnitude > threshold.effective
    trace.append((f"sobel[{config.threshold_mode}]", int(edge_mask.sum())))

    dilated = morphology.dilate_binary(edge_mask, se(config.post_se))
    trace.append(("dilate", int(dilated.sum())))
    filled = morphology.fill_holes(dilated)
    trace.append(("fill_holes", int(filled.sum())))
    segmented = morphology.erode_binary(filled, se(config.smooth_se))
    trace.append(("erode", int(segmented.sum())))
    outline_mask = morphology.outline(segmented, se(config.outline_se))
    trace.append(("outline", int(outline_mask.sum())))
    clusters = morphology.connected_components(segmented, config.connectivity, config.min_cluster_area)
    trace.append(("clusters", int((clusters.labels > 0).sum())))

    overlay = img.copy()
    overlay[outline_mask] = 255
    return DetectionResult(
        estimate=estimate,
        threshold=threshold,
        edge_mask=edge_mask,
        dilated_mask=dilated,
        filled_mask=filled,
        segmented_mask=segmented,
        outline_mask=outline_mask,
        clusters=clusters,
        overlay=overlay,
        config_used=config,
        stage_trace=tuple(trace),
    )


def compare_thresholds(image, config: PipelineConfig | None = None) -> ComparisonReport:
    config = config or PipelineConfig()
    return ComparisonReport(
        hurst_result=detect_clusters(image, config.replace(threshold_mode="hurst")),
        fudge_result=detect_clusters(image, config.replace(threshold_mode="fudge")),
    )
