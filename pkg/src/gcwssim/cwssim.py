"""Structural similarity on complex wavelet coefficients.

The local index compares two coefficient windows:

    (2 * |sum(cx * conj(cy))| + K) / (sum|cx|^2 + sum|cy|^2 + K)

A consistent phase shift of one window (what a small translation does to
oriented wavelet coefficients) leaves the index at 1, which is what makes
the measure robust to small geometric distortions. The global index slides
a square window across every band of both decompositions and averages the
local index over all window positions of all bands.

For pairwise work each image is prepared once: its bands and windowed
energies are packed into flat buffers so that batches of pairs run in a
single kernel call.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .wavelet import PyramidConfig, build_pyramid


@dataclass(frozen=True)
class CwSsimConfig:
    """Index parameters: stabilizer K, window geometry and pyramid shape."""

    K: float = 0.01
    window: int = 7
    stride: int = 1
    pyramid: PyramidConfig = field(default_factory=PyramidConfig)

    def __post_init__(self):
        if not self.K > 0.0:
            raise ValueError("K must be positive")
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be odd and >= 3")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")


def local_cwssim(cx, cy, K: float) -> float:
    """Similarity of two equal-length complex coefficient vectors, in (0, 1]."""
    if not K > 0.0:
        raise ValueError("K must be positive")
    cx = np.asarray(cx, dtype=np.complex128).ravel()
    cy = np.asarray(cy, dtype=np.complex128).ravel()
    if cx.size != cy.size:
        raise ValueError(f"coefficient vectors differ in length: {cx.size} vs {cy.size}")
    if cx.size == 0:
        raise ValueError("coefficient vectors must be non-empty")
    # Energies go through the same complex-product summation as the cross
    # term so that cx == cy yields exactly 1.0.
    num = 2.0 * abs(np.sum(cx * np.conj(cy))) + K
    den = np.sum(cx * np.conj(cx)).real + np.sum(cy * np.conj(cy)).real + K
    return float(num / den)


class BandLayout:
    """Flat-buffer layout of one pyramid shape under a window/stride choice.

    Bands smaller than the window contribute zero windows and are skipped.
    """

    __slots__ = (
        "heights", "widths", "band_offsets", "energy_offsets",
        "rows", "cols", "n_coeffs", "n_energies", "total_windows",
    )

    def __init__(self, band_shapes, window: int, stride: int):
        heights, widths, rows, cols = [], [], [], []
        band_offsets, energy_offsets = [], []
        coeff, energy = 0, 0
        for h, w in band_shapes:
            heights.append(h)
            widths.append(w)
            band_offsets.append(coeff)
            energy_offsets.append(energy)
            r = (h - window) // stride + 1 if h >= window else 0
            c = (w - window) // stride + 1 if w >= window else 0
            if r == 0 or c == 0:
                r = c = 0
            rows.append(r)
            cols.append(c)
            coeff += h * w
            energy += r * c
        self.heights = np.array(heights, dtype=np.int64)
        self.widths = np.array(widths, dtype=np.int64)
        self.band_offsets = np.array(band_offsets, dtype=np.int64)
        self.energy_offsets = np.array(energy_offsets, dtype=np.int64)
        self.rows = np.array(rows, dtype=np.int64)
        self.cols = np.array(cols, dtype=np.int64)
        self.n_coeffs = coeff
        self.n_energies = energy
        self.total_windows = int((self.rows * self.cols).sum())


class PreparedSet:
    """Decompositions and windowed energies of a set of images, packed into
    flat per-image rows for batched pair evaluation.

    Preparing each image exactly once keeps pairwise runs O(pairs) in the
    kernel; instances are read-only after construction and safe to share
    across threads.
    """

    __slots__ = ("cfg", "layout", "bands", "energies")

    def __init__(self, images, cfg: CwSsimConfig):
        self.cfg = cfg
        shape = images[0].pixels.shape
        for img in images:
            if img.pixels.shape != shape:
                raise ValueError(
                    f"image size mismatch: {img.pixels.shape} vs {shape}"
                )
        pyramids = [build_pyramid(img, cfg.pyramid) for img in images]
        self.layout = BandLayout(
            [b.shape for b in pyramids[0].bands], cfg.window, cfg.stride
        )
        if self.layout.total_windows == 0:
            raise ValueError(
                f"window {cfg.window} is larger than every band; "
                "use a smaller window or fewer scales"
            )
        self.bands = np.ascontiguousarray(
            np.stack([np.concatenate([b.ravel() for b in p.bands]) for p in pyramids])
        )
        self.energies = np.ascontiguousarray(
            np.stack(
                [
                    np.concatenate(
                        [
                            _kernels.windowed_energy(b, cfg.window, cfg.stride).ravel()
                            for b in p.bands
                        ]
                    )
                    for p in pyramids
                ]
            )
        )
        self.bands.setflags(write=False)
        self.energies.setflags(write=False)

    def __len__(self) -> int:
        return self.bands.shape[0]

    def similarities(self, ii, jj) -> np.ndarray:
        """Global index for each listed (ii[p], jj[p]) image pair."""
        layout, cfg = self.layout, self.cfg
        ii = np.asarray(ii, dtype=np.int64)
        jj = np.asarray(jj, dtype=np.int64)
        out = np.empty(len(ii), dtype=np.float64)
        _kernels.batch_pair_sums(
            self.bands, self.energies,
            layout.heights, layout.widths, layout.band_offsets, layout.energy_offsets,
            layout.rows, layout.cols,
            cfg.K, cfg.window, cfg.stride, ii, jj, out,
        )
        return out / layout.total_windows

    def distances(self, ii, jj) -> np.ndarray:
        """1 - global index for each listed image pair."""
        return 1.0 - self.similarities(ii, jj)


def global_cwssim(x, y, cfg: CwSsimConfig = CwSsimConfig()) -> float:
    """Mean local index over all windows of all bands; symmetric, in (0, 1]."""
    if x.pixels.shape != y.pixels.shape:
        raise ValueError(f"image size mismatch: {x.pixels.shape} vs {y.pixels.shape}")
    prepared = PreparedSet([x, y], cfg)
    return float(prepared.similarities([0], [1])[0])


def cwssim_distance(x, y, cfg: CwSsimConfig = CwSsimConfig()) -> float:
    """1 - global index: 0 for structurally identical images, < 1 always."""
    return 1.0 - global_cwssim(x, y, cfg)
