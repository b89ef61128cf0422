"""Extension of boundary data into the half-plane y > 0.

Each spectral bin is carried to height ``y`` by

    exp(+i sqrt(k^2 - kx^2) y)   in D1, D2  (outgoing, unimodular)
    exp(-sqrt(kx^2 - k^2) y)     in D3, D4  (evanescent)

with the non-negative real root on both branches.  Light-cone bins are
passed through unchanged; sector masks have already zeroed them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import (SECTORS, BoundarySignal, Grid2D, Spectrum, forward_fourier,
                      inverse_fourier, sector_index, sector_mask)

__all__ = ["FieldSlice", "vertical_propagator", "propagate", "solve_halfplane",
           "wave_residual", "wave_residual_spectrum", "extrapolated_wave_residual"]


@dataclass(frozen=True)
class FieldSlice:
    """u_j(ct, x; y) on the boundary grid; ``sector=0`` marks a summed field."""

    y: float
    grid: Grid2D
    values: np.ndarray = field(repr=False)
    sector: int = 0

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.complex128)
        if arr.shape != self.grid.shape:
            raise ValueError("slice values do not match the grid")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell))

    def as_signal(self):
        return BoundarySignal(self.grid, self.values)


def vertical_propagator(grid, y):
    """Per-bin factor carrying a boundary spectrum to height ``y >= 0``."""
    if y < 0:
        raise ValueError("only y >= 0 is admissible: incoming solutions are excluded")
    k, kx = grid.dual_mesh()
    m2 = k * k - kx * kx
    idx = sector_index(k, kx)
    prop = np.where(idx <= 2, 1.0 + 0j, 0j)
    with np.errstate(invalid="ignore"):
        osc = np.exp(1j * np.sqrt(np.where(m2 > 0, m2, 0.0)) * y)
        dec = np.exp(-np.sqrt(np.where(m2 < 0, -m2, 0.0)) * y)
    prop = np.where((idx == 1) | (idx == 2), osc, prop)
    prop = np.where((idx == 3) | (idx == 4), dec, prop)
    return np.broadcast_to(prop, grid.shape)


def propagate(spectrum, y):
    """Fourier-domain solution at height ``y`` for a sector-masked spectrum."""
    return spectrum.with_values(spectrum.values * vertical_propagator(spectrum.grid, y))


def solve_halfplane(f, y_list):
    """Per-sector field slices ``{j: [FieldSlice at each y]}``.

    At y = 0 the four slices sum to ``f`` minus its light-cone bins.
    """
    spectrum = forward_fourier(f) if isinstance(f, BoundarySignal) else f
    out = {}
    for j in SECTORS:
        sj = sector_mask(spectrum, j)
        out[j] = [FieldSlice(float(y), spectrum.grid, inverse_fourier(propagate(sj, y)).values, j)
                  for y in y_list]
    return out


def wave_residual_spectrum(lower, mid, upper, delta):
    """Fourier transform of ``u_{ct ct} - u_xx - u_yy`` at the middle slice.

    Time and x derivatives are spectral; ``u_yy`` is the central second
    difference over ``delta``, the only source of discretization error.
    Returns ``(residual_hat, reference_hat)`` where the reference is the
    spectral ``u_{ct ct}``.
    """
    grid = mid.grid
    if not (lower.grid == grid == upper.grid):
        raise ValueError("slices must share a grid")
    if delta <= 0:
        raise ValueError("delta must be positive")
    k, kx = grid.dual_mesh()
    um = forward_fourier(mid.as_signal()).values
    ul = forward_fourier(lower.as_signal()).values
    uu = forward_fourier(upper.as_signal()).values
    u_tt = -(k * k) * um
    u_xx = -(kx * kx) * um
    u_yy = (uu - 2 * um + ul) / (delta * delta)
    return u_tt - u_xx - u_yy, u_tt


def wave_residual(lower, mid, upper, delta=None):
    """Relative L2 residual of the wave equation for three equally spaced slices.

    The residual is O(delta^2); if it does not shrink by ~4 when ``delta``
    halves, ``delta`` is too large to resolve the field's y-variation.
    """
    if delta is None:
        delta = mid.y - lower.y
        if not np.isclose(upper.y - mid.y, delta):
            raise ValueError("slices are not equally spaced")
    res, ref = wave_residual_spectrum(lower, mid, upper, delta)
    scale = np.linalg.norm(ref)
    if scale == 0:
        return 0.0 if np.linalg.norm(res) == 0 else float("inf")
    return float(np.linalg.norm(res) / scale)


def _slices_at(spectrum, ys):
    return [FieldSlice(float(y), spectrum.grid, inverse_fourier(propagate(spectrum, y)).values) for y in ys]


def extrapolated_wave_residual(spectrum, y, delta):
    """Richardson-extrapolated (delta -> 0) relative residual at height ``y``.

    Combines the residual fields at ``delta`` and ``delta/2`` as
    ``(4 R(delta/2) - R(delta)) / 3``, cancelling the O(delta^2) term.
    Returns ``(r_delta, r_half, r_extrapolated)``.
    """
    if y - delta < 0:
        raise ValueError("y - delta must be >= 0")
    out = []
    for d in (delta, delta / 2):
        lo, mi, hi = _slices_at(spectrum, (y - d, y, y + d))
        out.append(wave_residual_spectrum(lo, mi, hi, d))
    (r1, ref), (r2, _) = out
    scale = np.linalg.norm(ref)
    ext = (4 * r2 - r1) / 3
    return (float(np.linalg.norm(r1) / scale), float(np.linalg.norm(r2) / scale),
            float(np.linalg.norm(ext) / scale))
