"""Portable graymap (P2/P5) reading and writing.

Images are plain ``numpy.uint8`` arrays of shape ``(height, width)``;
binary masks are ``bool`` arrays of the same shape.
"""
from __future__ import annotations

import os

import numpy as np

from .errors import FormatError, InputError, ParamError, TruncatedError, UnsupportedError

_WHITESPACE = b" \t\n\r\v\f"


def as_gray(image, min_size: int = 1) -> np.ndarray:
    """Validate ``image`` as a 2-D 8-bit grid and return it as ``uint8``."""
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise ParamError(f"expected a 2-D image, got shape {arr.shape}")
    if min(arr.shape) < min_size:
        raise ParamError(f"image {arr.shape[1]}x{arr.shape[0]} is smaller than {min_size}x{min_size}")
    if arr.dtype == np.uint8:
        return arr
    if arr.dtype == bool:
        return arr.astype(np.uint8) * 255
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise ParamError("pixel values must lie in [0, 255]")
    if np.issubdtype(arr.dtype, np.floating) and not np.all(arr == np.floor(arr)):
        raise ParamError("pixel values must be integers")
    return arr.astype(np.uint8)


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    # Returns the first `count` header tokens and the offset just past the last one.
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in _WHITESPACE:
            pos += 1
        if pos < n and data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        if pos >= n:
            raise FormatError("incomplete PGM header")
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def _header_int(token: bytes, name: str) -> int:
    if not token.isdigit():
        raise FormatError(f"invalid {name} in PGM header: {token!r}")
    return int(token)


def decode_pgm(data: bytes) -> np.ndarray:
    """Decode a binary (P5) or ASCII (P2) graymap with maxval <= 255."""
    if len(data) < 2 or data[:2] not in (b"P5", b"P2"):
        raise FormatError("not a PGM file (expected magic P5 or P2)")
    if len(data) > 2 and data[2] not in _WHITESPACE and data[2] != ord("#"):
        raise FormatError("not a PGM file (expected magic P5 or P2)")
    magic = data[:2]
    (width_tok, height_tok, maxval_tok), pos = _header_tokens(data[2:], 3)
    pos += 2
    width = _header_int(width_tok, "width")
    height = _header_int(height_tok, "height")
    maxval = _header_int(maxval_tok, "maxval")
    if width < 1 or height < 1:
        raise FormatError(f"invalid image size {width}x{height}")
    if maxval < 1:
        raise FormatError(f"invalid maxval {maxval}")
    if maxval > 255:
        raise UnsupportedError(f"maxval {maxval} > 255 (16-bit PGM) is not supported")
    count = width * height

    if magic == b"P5":
        if pos >= len(data) or data[pos] not in _WHITESPACE:
            raise FormatError("missing whitespace after maxval")
        payload = data[pos + 1:]
        if len(payload) < count:
            raise TruncatedError(f"expected {count} pixel bytes, found {len(payload)}")
        pixels = np.frombuffer(payload, dtype=np.uint8, count=count)
    else:
        fields = data[pos:].split()
        if len(fields) < count:
            raise TruncatedError(f"expected {count} pixel values, found {len(fields)}")
        try:
            values = [int(f) for f in fields[:count]]
        except ValueError as exc:
            raise FormatError(f"non-numeric pixel value in P2 payload: {exc}") from None
        pixels = np.array(values, dtype=np.int64)
    if pixels.max() > maxval:
        raise FormatError(f"pixel value exceeds maxval {maxval}")
    return pixels.astype(np.uint8).reshape(height, width)


def encode_pgm(image) -> bytes:
    img = as_gray(image)
    height, width = img.shape
    return b"P5\n%d %d\n255\n" % (width, height) + np.ascontiguousarray(img).tobytes()


def read_pgm(path: str | os.PathLike) -> np.ndarray:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return decode_pgm(data)


def write_pgm(path: str | os.PathLike, image) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pgm(image))


def mask_to_gray(mask) -> np.ndarray:
    return np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)


def rescale_to_gray(values) -> np.ndarray:
    """Linearly map ``values`` so that the maximum becomes 255 (zero stays zero)."""
    arr = np.asarray(values, dtype=np.float64)
    peak = arr.max() if arr.size else 0.0
    if peak <= 0:
        return np.zeros(arr.shape, dtype=np.uint8)
    return np.rint(np.clip(arr, 0, None) * (255.0 / peak)).astype(np.uint8)
