"""Uniform space-time grids, the Minkowski-sign 2D Fourier transform and
the four cone sectors of the (omega/c, k_x) plane.

Conventions
-----------
Signals are sampled as ``values[m, n] = f(ct_m, x_n)``: rows are time
(in length units, ``ct``), columns are space.  The Fourier kernel is
``exp(-i (sigma, chi))`` with the Minkowski product
``(sigma, chi) = -omega t + k_x x = -k ct + k_x x`` where ``k = omega / c``.
Expanded, the kernel is ``exp(+i k ct) exp(-i k_x x)``, so the time axis
is transformed with the *inverse* DFT sign and the space axis with the
forward DFT sign::

    fhat[p, q] = dt dx * sum_{m,n} f[m, n] exp(+i k_p ct_m) exp(-i kx_q x_n)
               = dt dx * n_t * ifft(fft(f, axis=1), axis=0) * phase

Spectra are stored in numpy's ``fftfreq`` ordering on both axes; use
:attr:`Spectrum.k` and :attr:`Spectrum.kx` for the bin coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid2D",
    "BoundarySignal",
    "Spectrum",
    "LIGHT_CONE",
    "SECTORS",
    "forward_fourier",
    "inverse_fourier",
    "sector_index",
    "sector_mask",
    "sector_support",
]

SECTORS = (1, 2, 3, 4)
#: label returned by :func:`sector_index` for bins on omega = +-c k_x
LIGHT_CONE = 0

# relative tolerance used to put a bin exactly on the light cone
_CONE_RTOL = 1e-12


@dataclass(frozen=True)
class Grid2D:
    """Uniform sampling of the (ct, x) plane.

    Parameters
    ----------
    n_t, n_x : int
        number of ct and x samples (>= 2, any parity)
    dt, dx : float
        sample spacings in length units (c = 1 is folded into ``dt``)
    origin : tuple of float
        ``(ct0, x0)``, coordinates of sample ``[0, 0]``
    """

    n_t: int
    n_x: int
    dt: float
    dx: float
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        if int(self.n_t) != self.n_t or int(self.n_x) != self.n_x:
            raise ValueError("sample counts must be integers")
        if self.n_t < 2 or self.n_x < 2:
            raise ValueError(f"grid needs at least 2x2 samples, got {self.n_t}x{self.n_x}")
        if not (self.dt > 0 and self.dx > 0):
            raise ValueError(f"spacings must be positive, got dt={self.dt}, dx={self.dx}")
        if not np.all(np.isfinite([self.dt, self.dx, *self.origin])):
            raise ValueError("grid parameters must be finite")
        object.__setattr__(self, "n_t", int(self.n_t))
        object.__setattr__(self, "n_x", int(self.n_x))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "dx", float(self.dx))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def symmetric(cls, half_width, step, half_width_x=None, step_x=None):
        """Grid running from ``-half_width`` to ``+half_width`` inclusive.

        ``Grid2D.symmetric(128, 0.5)`` is the 513 x 513 mesh used for the
        moving-source experiment.
        """
        hx = half_width if half_width_x is None else half_width_x
        sx = step if step_x is None else step_x
        n_t = int(round(2 * half_width / step)) + 1
        n_x = int(round(2 * hx / sx)) + 1
        return cls(n_t, n_x, step, sx, (-half_width, -hx))

    @property
    def shape(self):
        return (self.n_t, self.n_x)

    @property
    def ct(self):
        return self.origin[0] + self.dt * np.arange(self.n_t)

    @property
    def x(self):
        return self.origin[1] + self.dx * np.arange(self.n_x)

    @property
    def cell(self):
        """Area element ``dt * dx``."""
        return self.dt * self.dx

    @property
    def dk(self):
        """Dual spacing along omega/c."""
        return 2 * np.pi / (self.n_t * self.dt)

    @property
    def dkx(self):
        """Dual spacing along k_x."""
        return 2 * np.pi / (self.n_x * self.dx)

    @property
    def dual_cell(self):
        return self.dk * self.dkx

    @property
    def k(self):
        """omega/c bin centres in fftfreq order."""
        return 2 * np.pi * np.fft.fftfreq(self.n_t, self.dt)

    @property
    def kx(self):
        """k_x bin centres in fftfreq order."""
        return 2 * np.pi * np.fft.fftfreq(self.n_x, self.dx)

    def dual_mesh(self):
        """``(K, KX)`` broadcastable meshes of the spectral bins."""
        return self.k[:, None], self.kx[None, :]

    def mesh(self):
        """``(CT, X)`` broadcastable meshes of the sample coordinates."""
        return self.ct[:, None], self.x[None, :]


def _as_complex_matrix(values, grid):
    arr = np.array(values, dtype=np.complex128)
    if arr.shape != grid.shape:
        raise ValueError(f"values shape {arr.shape} does not match grid {grid.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BoundarySignal:
    """Complex samples of the boundary trace f(ct, x)."""

    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _as_complex_matrix(self.values, self.grid))

    def norm2(self):
        """Squared L2 norm, ``sum |f|^2 dt dx``."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.cell)

    def norm(self):
        return np.sqrt(self.norm2())

    def __add__(self, other):
        _check_same_grid(self.grid, other.grid)
        return BoundarySignal(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self.grid, other.grid)
        return BoundarySignal(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return BoundarySignal(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Spectrum:
    """Samples of fhat(omega/c, k_x) on the dual of ``grid`` (fftfreq order)."""

    grid: Grid2D
    values: np.ndarray = field(repr=False)
    convention: str = "minkowski:-wt+kx.x"

    def __post_init__(self):
        object.__setattr__(self, "values", _as_complex_matrix(self.values, self.grid))

    @property
    def k(self):
        return self.grid.k

    @property
    def kx(self):
        return self.grid.kx

    def norm2(self):
        """``sum |fhat|^2 dk dkx`` (equals ``(2 pi)^2`` times the signal norm)."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.dual_cell)

    def with_values(self, values):
        return Spectrum(self.grid, values, self.convention)

    def __add__(self, other):
        _check_same_grid(self.grid, other.grid)
        return self.with_values(self.values + other.values)


def _check_same_grid(a, b):
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def _phase_factors(grid):
    ct0, x0 = grid.origin
    return np.exp(1j * grid.k * ct0)[:, None] * np.exp(-1j * grid.kx * x0)[None, :]


def forward_fourier(signal):
    """Minkowski-sign Fourier transform of a boundary signal.

    Parameters
    ----------
    signal : BoundarySignal

    Returns
    -------
    Spectrum
        ``fhat = integral f(chi) exp(-i(sigma, chi)) d^2 chi`` sampled on the
        dual grid, in fftfreq order.
    """
    f = signal.values
    if not np.all(np.isfinite(f)):
        bad = np.argwhere(~np.isfinite(f))
        raise ValueError(f"signal has {len(bad)} non-finite samples, first at index {tuple(int(i) for i in bad[0])}")
    grid = signal.grid
    # +i k ct on axis 0 -> inverse DFT sign; -i kx x on axis 1 -> forward DFT sign
    fhat = np.fft.ifft(np.fft.fft(f, axis=1), axis=0) * (grid.n_t * grid.cell)
    return Spectrum(grid, fhat * _phase_factors(grid))


def inverse_fourier(spectrum, grid=None):
    """Inverse of :func:`forward_fourier`.

    ``f(chi) = (2 pi)^-2 integral fhat(sigma) exp(+i(sigma, chi)) d^2 sigma``.
    """
    if grid is not None:
        _check_same_grid(grid, spectrum.grid)
    if spectrum.convention != Spectrum.convention:
        raise ValueError(f"unsupported spectrum convention {spectrum.convention!r}")
    grid = spectrum.grid
    g = spectrum.values * np.conj(_phase_factors(grid))
    f = np.fft.fft(np.fft.ifft(g, axis=1), axis=0) / (grid.n_t * grid.cell)
    return BoundarySignal(grid, f)


def sector_index(k, kx):
    """Sector label (1..4) of each spectral point, :data:`LIGHT_CONE` on the cone.

    D1: k > |kx|, D2: -k > |kx|, D3: kx > |k|, D4: -kx > |k|.
    """
    k, kx = np.broadcast_arrays(np.asarray(k, float), np.asarray(kx, float))
    ak, akx = np.abs(k), np.abs(kx)
    on_cone = np.abs(ak - akx) <= _CONE_RTOL * (ak + akx)
    out = np.where(ak > akx, np.where(k > 0, 1, 2), np.where(kx > 0, 3, 4))
    return np.where(on_cone, LIGHT_CONE, out).astype(np.int8)


def sector_support(grid, j):
    """Boolean mask of the bins of ``grid``'s dual lying in sector ``j``."""
    if j not in SECTORS:
        raise ValueError(f"sector must be one of {SECTORS}, got {j!r}")
    k, kx = grid.dual_mesh()
    return sector_index(k, kx) == j


def sector_mask(spectrum, j):
    """Zero every bin outside the open sector D_j (light-cone bins included)."""
    keep = sector_support(spectrum.grid, j)
    return spectrum.with_values(np.where(keep, spectrum.values, 0))
