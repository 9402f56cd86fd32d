# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled sliding-window similarity kernels.

Mirrors ``_pykernels`` exactly: column-then-row prefix sums over the band
product, inclusion-exclusion window sums, then the stabilized local index.
The whole pair batch runs without the GIL, so chunked callers scale across
threads.
"""

import numpy as np

from libc.math cimport sqrt


def windowed_energy(band, int window, int stride):
    """Windowed sums of squared coefficient magnitudes for one band."""
    grid = np.ascontiguousarray(band, dtype=np.complex128)
    cdef Py_ssize_t h = grid.shape[0], w = grid.shape[1]
    if h < window or w < window:
        return np.zeros((0, 0), dtype=np.float64)
    cdef Py_ssize_t rows = (h - window) // stride + 1
    cdef Py_ssize_t cols = (w - window) // stride + 1
    padded_arr = np.zeros((h + 1, w + 1), dtype=np.float64)
    out_arr = np.empty((rows, cols), dtype=np.float64)
    cdef double complex[:, ::1] c = grid
    cdef double[:, ::1] padded = padded_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, yi, xi, y0, x0
    cdef double re, im
    with nogil:
        for i in range(h):
            for j in range(w):
                re = c[i, j].real
                im = c[i, j].imag
                padded[i + 1, j + 1] = re * re + im * im
        for i in range(2, h + 1):
            for j in range(1, w + 1):
                padded[i, j] = padded[i, j] + padded[i - 1, j]
        for i in range(1, h + 1):
            for j in range(2, w + 1):
                padded[i, j] = padded[i, j] + padded[i, j - 1]
        for yi in range(rows):
            y0 = yi * stride
            for xi in range(cols):
                x0 = xi * stride
                out[yi, xi] = (
                    padded[y0 + window, x0 + window]
                    - padded[y0, x0 + window]
                    - padded[y0 + window, x0]
                    + padded[y0, x0]
                )
    return out_arr


def batch_pair_sums(
    bands,
    energies,
    heights,
    widths,
    band_offsets,
    energy_offsets,
    rows,
    cols,
    double K,
    int window,
    int stride,
    ii,
    jj,
    out,
):
    """For each pair (ii[p], jj[p]) write the sum of local similarity indices
    over all windows of all bands into ``out[p]``."""
    cdef const double complex[:, ::1] vb = bands
    cdef const double[:, ::1] ve = energies
    cdef const long long[::1] vh = np.ascontiguousarray(heights, dtype=np.int64)
    cdef const long long[::1] vw = np.ascontiguousarray(widths, dtype=np.int64)
    cdef const long long[::1] vbo = np.ascontiguousarray(band_offsets, dtype=np.int64)
    cdef const long long[::1] veo = np.ascontiguousarray(energy_offsets, dtype=np.int64)
    cdef const long long[::1] vr = np.ascontiguousarray(rows, dtype=np.int64)
    cdef const long long[::1] vc = np.ascontiguousarray(cols, dtype=np.int64)
    cdef const long long[::1] vi = np.ascontiguousarray(ii, dtype=np.int64)
    cdef const long long[::1] vj = np.ascontiguousarray(jj, dtype=np.int64)
    cdef double[::1] vo = out

    cdef Py_ssize_t n_bands = vh.shape[0], n_pairs = vi.shape[0]
    cdef Py_ssize_t max_h = 0, max_w = 0
    cdef Py_ssize_t q
    for q in range(n_bands):
        if vh[q] > max_h:
            max_h = vh[q]
        if vw[q] > max_w:
            max_w = vw[q]
    scratch_arr = np.zeros((max_h + 1, max_w + 1), dtype=np.complex128)
    cdef double complex[:, ::1] pad = scratch_arr

    cdef Py_ssize_t p, i, j, h, w, off, eoff, r, c, yi, xi, y0, x0
    cdef Py_ssize_t ia, ib
    cdef double complex cross
    cdef double total
    with nogil:
        for p in range(n_pairs):
            ia = vi[p]
            ib = vj[p]
            total = 0.0
            for q in range(n_bands):
                r = vr[q]
                c = vc[q]
                if r == 0 or c == 0:
                    continue
                h = vh[q]
                w = vw[q]
                off = vbo[q]
                eoff = veo[q]
                for i in range(h + 1):
                    pad[i, 0] = 0.0
                for j in range(w + 1):
                    pad[0, j] = 0.0
                for i in range(h):
                    for j in range(w):
                        pad[i + 1, j + 1] = (
                            vb[ia, off + i * w + j] * vb[ib, off + i * w + j].conjugate()
                        )
                for i in range(2, h + 1):
                    for j in range(1, w + 1):
                        pad[i, j] = pad[i, j] + pad[i - 1, j]
                for i in range(1, h + 1):
                    for j in range(2, w + 1):
                        pad[i, j] = pad[i, j] + pad[i, j - 1]
                for yi in range(r):
                    y0 = yi * stride
                    for xi in range(c):
                        x0 = xi * stride
                        cross = (
                            pad[y0 + window, x0 + window]
                            - pad[y0, x0 + window]
                            - pad[y0 + window, x0]
                            + pad[y0, x0]
                        )
                        total += (
                            2.0 * sqrt(cross.real * cross.real + cross.imag * cross.imag) + K
                        ) / (ve[ia, eoff + yi * c + xi] + ve[ib, eoff + yi * c + xi] + K)
            vo[p] = total
