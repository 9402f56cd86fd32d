"""Oriented complex wavelet decomposition via frequency-domain filtering.

Each band is the inverse FFT of the image spectrum multiplied by a real
bandpass mask: a raised-cosine window on the log-radial axis times a
cos^(Q-1) angular lobe restricted to a half-plane. The half-plane support
makes the filters analytic, so coefficients are genuinely complex and small
image shifts show up as consistent phase rotations of the coefficients.

Bands at scale s are alias-free subsampled by 2^s (the radial window of
scale s vanishes above pi/2^s, which is exactly the anti-alias condition).
Boundary handling is periodic, a consequence of the FFT implementation.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PyramidConfig:
    """Filter-bank shape: number of dyadic scales and of orientation lobes."""

    n_scales: int = 2
    n_orientations: int = 6

    def __post_init__(self):
        if self.n_scales < 1:
            raise ValueError("n_scales must be >= 1")
        if self.n_orientations < 2:
            raise ValueError("n_orientations must be >= 2")

    @property
    def min_image_side(self) -> int:
        # Coarsest band must keep a usable extent after 2^(n_scales-1)
        # subsampling steps.
        return 2 ** (self.n_scales + 2)


@dataclass(frozen=True)
class ComplexPyramid:
    """Complex coefficient grids indexed by (scale, orientation)."""

    config: PyramidConfig
    bands: tuple[np.ndarray, ...]

    def band(self, scale: int, orientation: int) -> np.ndarray:
        """The stored coefficient grid for one (scale, orientation)."""
        cfg = self.config
        if not (0 <= scale < cfg.n_scales):
            raise IndexError(f"scale {scale} out of range [0, {cfg.n_scales})")
        if not (0 <= orientation < cfg.n_orientations):
            raise IndexError(
                f"orientation {orientation} out of range [0, {cfg.n_orientations})"
            )
        return self.bands[scale * cfg.n_orientations + orientation]

    @property
    def band_dims(self) -> tuple[tuple[int, int], ...]:
        return tuple(b.shape for b in self.bands)


_filter_cache: dict = {}
_filter_lock = threading.Lock()


def _radial_window(r: np.ndarray, scale: int) -> np.ndarray:
    """Raised cosine on log2(r), peaking at pi/2^(scale+1), one octave wide
    on each side: support is the open interval (pi/2^(scale+2), pi/2^scale)."""
    out = np.zeros_like(r)
    valid = r > 0.0
    center = math.log2(math.pi) - (scale + 1)
    octaves = np.empty_like(r)
    octaves[valid] = np.log2(r[valid]) - center
    inside = valid & (np.abs(octaves) < 1.0)
    out[inside] = np.cos(0.5 * np.pi * octaves[inside])
    return out


def _angular_window(theta: np.ndarray, orientation: int, n_orientations: int) -> np.ndarray:
    """cos^(Q-1) lobe around orientation o*pi/Q, zero outside its half-plane."""
    order = n_orientations - 1
    gain = 2.0 * math.sqrt(
        2 ** (2 * order)
        * math.factorial(order) ** 2
        / (n_orientations * math.factorial(2 * order))
    )
    delta = np.mod(theta - np.pi * orientation / n_orientations + np.pi, 2.0 * np.pi) - np.pi
    lobe = np.abs(delta) < np.pi / 2.0
    out = np.zeros_like(theta)
    out[lobe] = gain * np.cos(delta[lobe]) ** order
    return out


def _filter_bank(shape: tuple[int, int], cfg: PyramidConfig) -> list[np.ndarray]:
    key = (shape, cfg)
    bank = _filter_cache.get(key)
    if bank is not None:
        return bank
    with _filter_lock:
        bank = _filter_cache.get(key)
        if bank is not None:
            return bank
        h, w = shape
        wy = 2.0 * np.pi * np.fft.fftfreq(h)[:, None]
        wx = 2.0 * np.pi * np.fft.fftfreq(w)[None, :]
        r = np.hypot(wy, wx)
        theta = np.arctan2(wy, wx)
        bank = []
        for scale in range(cfg.n_scales):
            radial = _radial_window(r, scale)
            for orientation in range(cfg.n_orientations):
                bank.append(radial * _angular_window(theta, orientation, cfg.n_orientations))
        _filter_cache[key] = bank
        return bank


def build_pyramid(img, cfg: PyramidConfig = PyramidConfig()) -> ComplexPyramid:
    """Decompose an image into oriented complex bands.

    Odd dimensions are zero-padded to the next even size before the FFT.
    The band at scale s is subsampled by 2^s, giving ceil(side / 2^s) samples
    per axis of the padded image.
    """
    pixels = np.asarray(img.pixels if hasattr(img, "pixels") else img, dtype=np.float64)
    h, w = pixels.shape
    if h % 2 or w % 2:
        pixels = np.pad(pixels, ((0, h % 2), (0, w % 2)))
        h, w = pixels.shape
    if min(h, w) < cfg.min_image_side:
        raise ValueError(
            f"image {w}x{h} too small for {cfg.n_scales} scales "
            f"(needs at least {cfg.min_image_side} per side)"
        )
    spectrum = np.fft.fft2(pixels)
    bands = []
    for scale_orient, mask in enumerate(_filter_bank((h, w), cfg)):
        scale = scale_orient // cfg.n_orientations
        full = np.fft.ifft2(spectrum * mask)
        step = 2**scale
        bands.append(np.ascontiguousarray(full[::step, ::step]))
    return ComplexPyramid(config=cfg, bands=tuple(bands))
