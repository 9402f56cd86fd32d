"""Distance-matrix files and heatmap rendering.

Binary container: magic ``GDM1``, point count as a 64-bit little-endian
unsigned integer, one kind byte, then n*n float64 values row-major
(little-endian). A plain comma-separated text export is available for
interop; it round-trips doubles exactly via repr-style formatting.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .data import DataError
from .manifold import DistanceMatrix, MatrixKind

MAGIC = b"GDM1"

_KIND_TAGS = {
    MatrixKind.L2: 0,
    MatrixKind.CWSSIM: 1,
    MatrixKind.GEO_L2: 2,
    MatrixKind.GCWSSIM: 3,
}
_TAG_KINDS = {tag: kind for kind, tag in _KIND_TAGS.items()}


def write_gdm(matrix: DistanceMatrix, path) -> None:
    """Write the binary matrix container."""
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", matrix.n))
        fh.write(bytes([_KIND_TAGS[matrix.kind]]))
        fh.write(np.ascontiguousarray(matrix.values, dtype="<f8").tobytes())


def read_gdm(path) -> DistanceMatrix:
    """Read a binary matrix container back into a DistanceMatrix."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read matrix file {path}: {exc}") from exc
    header = len(MAGIC) + 8 + 1
    if len(raw) < header or raw[: len(MAGIC)] != MAGIC:
        raise DataError(f"{path} is not a GDM1 matrix file")
    (n,) = struct.unpack_from("<Q", raw, len(MAGIC))
    tag = raw[len(MAGIC) + 8]
    if tag not in _TAG_KINDS:
        raise DataError(f"{path}: unknown matrix kind tag {tag}")
    expected = header + 8 * n * n
    if len(raw) != expected:
        raise DataError(f"{path}: expected {expected} bytes for n={n}, found {len(raw)}")
    values = np.frombuffer(raw, dtype="<f8", offset=header).reshape(n, n)
    try:
        return DistanceMatrix(values.astype(np.float64), _TAG_KINDS[tag])
    except ValueError as exc:
        raise DataError(f"{path}: invalid distance matrix: {exc}") from exc


def write_csv(matrix: DistanceMatrix, path) -> None:
    """Comma-separated text export, one matrix row per line."""
    np.savetxt(path, matrix.values, delimiter=",", fmt="%.17g")


def heatmap_array(matrix: DistanceMatrix, scale: float = 1.0) -> np.ndarray:
    """8-bit grayscale rendering: pixel (i, j) = d[i][j] / max(d), optionally
    multiplied by ``scale`` and clamped at 1. Zero maps to black."""
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    peak = matrix.values.max()
    if peak <= 0.0:
        raise DataError("all-zero matrix cannot be rendered as a heatmap")
    norm = np.clip(matrix.values / peak * scale, 0.0, 1.0)
    return np.round(norm * 255.0).astype(np.uint8)


def write_gray(pixels: np.ndarray, path) -> None:
    """Write an 8-bit grayscale array as PGM (default) or PNG by extension."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        Image.fromarray(pixels, mode="L").save(path)
        return
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (pixels.shape[1], pixels.shape[0]))
        fh.write(pixels.tobytes())
