"""NumPy implementation of the sliding-window similarity kernels.

This is the portable fallback for the compiled extension in ``_ckernels``.
Both backends compute the same quantities with the same summation layout
(column-then-row prefix sums, inclusion-exclusion window sums), so their
results agree to floating-point roundoff.

The batch interface works on flattened per-image buffers: row i of
``bands`` holds every complex band of image i back to back, row i of
``energies`` the matching precomputed windowed energy grids. ``heights``,
``widths``, ``rows``, ``cols`` and the two offset vectors describe the
per-band layout shared by all images.
"""

from __future__ import annotations

import numpy as np


def _window_sums(a: np.ndarray, window: int, stride: int) -> np.ndarray:
    """Sums of ``a`` over every window x window patch fully inside ``a``,
    stepping by ``stride``. Returns a (rows, cols) grid of window sums."""
    h, w = a.shape
    if h < window or w < window:
        return np.zeros((0, 0), dtype=a.dtype)
    c = np.cumsum(np.cumsum(a, axis=0), axis=1)
    padded = np.zeros((h + 1, w + 1), dtype=c.dtype)
    padded[1:, 1:] = c
    sums = (
        padded[window:, window:]
        - padded[:-window, window:]
        - padded[window:, :-window]
        + padded[:-window, :-window]
    )
    return np.ascontiguousarray(sums[::stride, ::stride])


def windowed_energy(band: np.ndarray, window: int, stride: int) -> np.ndarray:
    """Windowed sums of squared coefficient magnitudes for one band."""
    return _window_sums(band.real**2 + band.imag**2, window, stride)


def batch_pair_sums(
    bands: np.ndarray,
    energies: np.ndarray,
    heights: np.ndarray,
    widths: np.ndarray,
    band_offsets: np.ndarray,
    energy_offsets: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
    K: float,
    window: int,
    stride: int,
    ii: np.ndarray,
    jj: np.ndarray,
    out: np.ndarray,
) -> None:
    """For each pair (ii[p], jj[p]) write the sum of local similarity indices
    over all windows of all bands into ``out[p]``."""
    n_bands = len(heights)
    for p in range(len(ii)):
        a, b = bands[ii[p]], bands[jj[p]]
        ea, eb = energies[ii[p]], energies[jj[p]]
        total = 0.0
        for q in range(n_bands):
            if rows[q] == 0 or cols[q] == 0:
                continue
            h, w = heights[q], widths[q]
            off = band_offsets[q]
            ba = a[off : off + h * w].reshape(h, w)
            bb = b[off : off + h * w].reshape(h, w)
            cross = _window_sums(ba * np.conj(bb), window, stride)
            eoff = energy_offsets[q]
            grid = rows[q] * cols[q]
            ex = ea[eoff : eoff + grid].reshape(rows[q], cols[q])
            ey = eb[eoff : eoff + grid].reshape(rows[q], cols[q])
            total += float(((2.0 * np.abs(cross) + K) / (ex + ey + K)).sum())
        out[p] = total
