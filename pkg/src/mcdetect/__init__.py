"""Fractal-dimension driven detection of bright microcalcification clusters."""
from .errors import (
    DegenerateFitError,
    EmptyInputError,
    FormatError,
    InputError,
    InsufficientScalesError,
    McdetectError,
    ParamError,
    TruncatedError,
    UnsupportedError,
)
from .image_io import decode_pgm, encode_pgm, read_pgm, write_pgm
from .pipeline import ComparisonReport, DetectionResult, PipelineConfig, compare_thresholds, detect_clusters

__version__ = "0.1.0"
