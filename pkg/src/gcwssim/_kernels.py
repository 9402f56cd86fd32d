"""Kernel backend selection: compiled extension when available, NumPy otherwise.

The active backend can be forced with the ``GCWSSIM_KERNEL`` environment
variable (``auto``, ``compiled`` or ``numpy``) or at runtime with ``use()``.
"""

from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

_BACKENDS = {"numpy": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

_active_name = "numpy"
_active = _pykernels


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def use(name: str = "auto") -> str:
    """Select the kernel backend; returns the name actually selected."""
    global _active_name, _active
    if name == "auto":
        name = "compiled" if "compiled" in _BACKENDS else "numpy"
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; have {available_backends()}")
    _active_name = name
    _active = _BACKENDS[name]
    return name


def active_backend() -> str:
    return _active_name


def windowed_energy(band, window, stride):
    return _active.windowed_energy(band, window, stride)


def batch_pair_sums(
    bands, energies, heights, widths, band_offsets, energy_offsets,
    rows, cols, K, window, stride, ii, jj, out,
):
    return _active.batch_pair_sums(
        bands, energies, heights, widths, band_offsets, energy_offsets,
        rows, cols, K, window, stride, ii, jj, out,
    )


use(os.environ.get("GCWSSIM_KERNEL", "auto"))
