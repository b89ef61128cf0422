"""Gaussian-packet mother solutions and the affine Poincare wavelet family.

A mother solution is fixed by its Fourier transform in the boundary
variables ``sigma = (k, kx)`` with ``k = omega/c``.  For the propagating
sector 1, with ``ky = sqrt(k^2 - kx^2)``::

    Psi1_hat(sigma; y) = (k / ky) exp(-sp^2 (ky - kappa)^2 / 2 - so^2 kx^2 / 2 - 1/ky)
                         * exp(i ky y)

and for the evanescent sector 3, with ``q = sqrt(kx^2 - k^2)``::

    Psi3_hat(sigma; y) = (kx / q) exp(-sp^2 (q - kappa)^2 / 2 - so^2 k^2 / 2 - 1/q)
                         * exp(-q y)

(sp = sigma_par, so = sigma_perp).  Sector 2 is the time reversal of
sector 1 and sector 4 the mirror ``x -> -x`` of sector 3.  The factor
``exp(-1/ky)`` vanishes to all orders on the light cone and is what makes
the admissibility integral finite.  The area element is
``d^2 sigma = dk dkx`` throughout.

The family member for ``mu = {b, a, phi}`` is

    Psi_mu(chi, y) = (1/a) Psi(Lambda_phi (chi - b) / a, y / a)

whose boundary spectrum is ``a Psi_hat(a Lambda_phi sigma; y/a) exp(-i(sigma, b))``.
Its spectral centre sits at ``(kappa/a) (cosh phi, sinh phi)`` and in the
coordinate domain it drifts along x with speed ``c tanh(phi)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import from_hyperbolic, spectral_boost_scale
from .lattice import SECTORS, Grid2D, sector_index

__all__ = [
    "MotherSpec",
    "WaveletPoint",
    "AdmissibilityConstant",
    "mother_hat",
    "family_hat",
    "family_spectrum",
    "admissibility_integrand",
    "admissibility_constant",
    "mother_time_slice",
    "closed_form_t0",
    "packet_window",
]


@dataclass(frozen=True)
class MotherSpec:
    """Gaussian-packet mother solution in sector ``sector``.

    Parameters
    ----------
    sector : int
        1..4
    kappa : float
        central spatial frequency (inverse length)
    sigma_par, sigma_perp : float
        packet widths along and across the propagation direction
    """

    sector: int
    kappa: float
    sigma_par: float
    sigma_perp: float

    def __post_init__(self):
        if self.sector not in SECTORS:
            raise ValueError(f"sector must be one of {SECTORS}, got {self.sector!r}")
        for name in ("kappa", "sigma_par", "sigma_perp"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if self.kappa * self.sigma_par <= 2:
            warnings.warn(
                f"kappa*sigma_par = {self.kappa * self.sigma_par:.3g} <= 2: the packet is poorly "
                "localized and the ky > 0 truncation is a strong perturbation",
                stacklevel=3,
            )

    @property
    def quality(self):
        """Localization quality ``p = (kappa sigma_par)^2``."""
        return (self.kappa * self.sigma_par) ** 2

    def to_dict(self):
        return {"sector": self.sector, "kappa": self.kappa,
                "sigma_par": self.sigma_par, "sigma_perp": self.sigma_perp}

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - {"sector", "kappa", "sigma_par", "sigma_perp"}
        if unknown:
            raise ValueError(f"unknown mother keys: {sorted(unknown)}")
        try:
            return cls(int(d["sector"]), float(d["kappa"]), float(d["sigma_par"]), float(d["sigma_perp"]))
        except KeyError as err:
            raise ValueError(f"mother spec is missing key {err.args[0]!r}") from None


@dataclass(frozen=True)
class WaveletPoint:
    """Transform parameters ``mu = {b, a, phi}`` with ``b = (c tau, b_x)``."""

    b: tuple = (0.0, 0.0)
    a: float = 1.0
    phi: float = 0.0

    def __post_init__(self):
        if not (self.a > 0):
            raise ValueError(f"scale must be positive, got {self.a!r}")


@dataclass(frozen=True)
class AdmissibilityConstant:
    sector: int
    value: float
    quadrature_error: float
    converged: bool = True


# below this radius exp(-1/r) underflows to zero in double precision
_R_UNDERFLOW = 1.0 / 740.0


def _cone_factor(num, r, regularized):
    """``num / r * exp(-1/r)`` (or without the exponential), finite everywhere.

    ``r`` may underflow to 0 next to the light cone; the regularised factor is
    exactly 0 there.
    """
    if regularized:
        tiny = r < _R_UNDERFLOW
        rs = np.where(tiny, 1.0, r)
        return np.where(tiny, 0.0, num / rs * np.exp(-1.0 / rs))
    return num / r


def _propagating_hat(spec, k, kx, y, regularized=True):
    inside = sector_index(k, kx) == 1
    ks = np.where(inside, k, 1.0)
    kxs = np.where(inside, kx, 0.0)
    ky = np.sqrt((ks - kxs) * (ks + kxs))
    expo = -0.5 * (spec.sigma_par * (ky - spec.kappa)) ** 2 - 0.5 * (spec.sigma_perp * kxs) ** 2
    val = _cone_factor(ks, ky, regularized) * np.exp(expo + 1j * ky * y)
    return np.where(inside, val, 0.0)


def _evanescent_hat(spec, k, kx, y, regularized=True):
    inside = sector_index(k, kx) == 3
    ks = np.where(inside, k, 0.0)
    kxs = np.where(inside, kx, 1.0)
    q = np.sqrt((kxs - ks) * (kxs + ks))
    expo = -0.5 * (spec.sigma_par * (q - spec.kappa)) ** 2 - 0.5 * (spec.sigma_perp * ks) ** 2 - q * y
    val = _cone_factor(kxs, q, regularized) * np.exp(expo).astype(np.complex128)
    return np.where(inside, val, 0.0)


def _mother_hat(spec, sigma, y, regularized):
    k, kx = np.broadcast_arrays(np.asarray(sigma[0], float), np.asarray(sigma[1], float))
    j = spec.sector
    if j in (3, 4) and np.any(np.asarray(y) < 0):
        raise ValueError("evanescent mother solutions grow exponentially for y < 0")
    with np.errstate(over="ignore", under="ignore"):
        if j == 1:
            out = _propagating_hat(spec, k, kx, y, regularized)
        elif j == 2:
            out = _propagating_hat(spec, -k, kx, y, regularized)
        elif j == 3:
            out = _evanescent_hat(spec, k, kx, y, regularized)
        else:
            out = _evanescent_hat(spec, k, -kx, y, regularized)
    return out[()] if out.ndim == 0 else out


def mother_hat(spec, sigma, y=0.0):
    """Mother spectrum ``Psi_j_hat(sigma; y)``; exactly zero outside D_j.

    ``sigma`` is a pair ``(k, kx)`` of scalars or broadcastable arrays.
    """
    return _mother_hat(spec, sigma, y, True)


def family_hat(spec, mu, sigma, y=0.0):
    """Spectrum of the family member ``Psi_mu`` at height ``y``."""
    k, kx = np.asarray(sigma[0], float), np.asarray(sigma[1], float)
    ct_b, x_b = mu.b
    boosted = spectral_boost_scale((k, kx), mu.a, mu.phi)
    shift = np.exp(1j * (k * ct_b - kx * x_b))
    return mu.a * mother_hat(spec, boosted, y / mu.a) * shift


def family_spectrum(spec, grid, a, phi, y=0.0, b=(0.0, 0.0)):
    """:func:`family_hat` sampled on the dual of ``grid`` (fftfreq order)."""
    k, kx = grid.dual_mesh()
    return family_hat(spec, WaveletPoint(b, a, phi), (k, kx), y)


# ---------------------------------------------------------------- admissibility

def admissibility_integrand(spec, rho, phi0, regularized=True):
    """``|psi_hat|^2 / rho`` in hyperbolic coordinates of sector ``spec.sector``.

    With ``d^2 sigma = rho drho dphi0`` and ``|k^2 - kx^2| = rho^2`` the
    admissibility integral becomes ``int int |psi_hat|^2 / rho drho dphi0``.
    ``regularized=False`` drops the ``exp(-1/ky)`` factor; it exists only to
    demonstrate that the integral then diverges at the cone.
    """
    rho = np.asarray(rho, float)
    phi0 = np.asarray(phi0, float)
    sigma = from_hyperbolic(rho, phi0, spec.sector)
    return np.abs(_mother_hat(spec, sigma, 0.0, regularized)) ** 2 / rho


def _support_box(spec, tol):
    """Bounding box in (rho, phi0) where the integrand exceeds ``tol * peak``."""
    rho = np.geomspace(1e-3, spec.kappa + 60.0 / spec.sigma_par, 1500)
    phi = np.linspace(-15, 15, 1201)
    val = admissibility_integrand(spec, rho[:, None], phi[None, :])
    big = val > tol * val.max()
    ri = np.flatnonzero(big.any(axis=1))
    pj = np.flatnonzero(big.any(axis=0))
    r_lo = rho[max(ri[0] - 1, 0)]
    r_hi = rho[min(ri[-1] + 1, rho.size - 1)]
    p_hi = max(abs(phi[max(pj[0] - 1, 0)]), abs(phi[min(pj[-1] + 1, phi.size - 1)]))
    return r_lo, r_hi, p_hi


def _trapezoid_2d(spec, r_lo, r_hi, p_hi, n_rho, n_phi):
    rho = np.linspace(r_lo, r_hi, n_rho)
    phi = np.linspace(-p_hi, p_hi, n_phi)
    val = admissibility_integrand(spec, rho[:, None], phi[None, :])
    return np.trapezoid(np.trapezoid(val, phi, axis=1), rho)


def admissibility_constant(spec, n_rho=257, n_phi=257, rtol=1e-10, max_doublings=6, tol=1e-13):
    """Admissibility constant ``C_j = int_{D_j} |psi_hat|^2 / |k^2 - kx^2| d^2 sigma``.

    Tensor-product trapezoid rule in hyperbolic coordinates over the box
    where the integrand exceeds ``tol`` times its peak, refined by doubling
    until successive values agree to ``rtol``.  The returned
    ``quadrature_error`` is the last refinement difference.
    """
    if max_doublings < 1:
        raise ValueError("max_doublings must be >= 1 to estimate the quadrature error")
    r_lo, r_hi, p_hi = _support_box(spec, tol)
    prev = _trapezoid_2d(spec, r_lo, r_hi, p_hi, n_rho, n_phi)
    errs = []
    for _ in range(max_doublings):
        n_rho, n_phi = 2 * n_rho - 1, 2 * n_phi - 1
        cur = _trapezoid_2d(spec, r_lo, r_hi, p_hi, n_rho, n_phi)
        errs.append(abs(cur - prev))
        prev = cur
        if errs[-1] <= rtol * abs(cur):
            return AdmissibilityConstant(spec.sector, float(cur), float(errs[-1]))
    converged = len(errs) < 2 or errs[-1] < errs[-2]
    warnings.warn(f"admissibility quadrature did not reach rtol={rtol}; refinement errors {errs}",
                  stacklevel=2)
    return AdmissibilityConstant(spec.sector, float(prev), float(errs[-1]), converged)


# ---------------------------------------------------------------- coordinate domain

def closed_form_t0(spec, window):
    """Gaussian packet at t = 0 without the ``exp(-1/ky)`` factor and ky > 0 cut.

    ``(2 pi sp so)^-1 exp(i kappa y - y^2 / (2 sp^2) - x^2 / (2 so^2))`` on a
    window whose rows are y and columns are x.
    """
    y, x = window.mesh()
    sp, so = spec.sigma_par, spec.sigma_perp
    return np.exp(1j * spec.kappa * y - y * y / (2 * sp * sp) - x * x / (2 * so * so)) / (2 * np.pi * sp * so)


def _check_leakage(psi, frac=0.05):
    n0, n1 = psi.shape
    b0, b1 = max(1, int(frac * n0)), max(1, int(frac * n1))
    e = np.abs(psi) ** 2
    total = e.sum()
    if total == 0:
        return 0.0
    inner = e[b0:n0 - b0, b1:n1 - b1].sum()
    return float(1 - inner / total)


def _slice_propagating(spec, ct, window, time_sign):
    ny, nx = window.shape
    ky = 2 * np.pi * np.fft.fftfreq(ny, window.dt)[:, None]
    kx = 2 * np.pi * np.fft.fftfreq(nx, window.dx)[None, :]
    pos = ky > 0
    kys = np.where(pos, ky, 1.0)
    with np.errstate(under="ignore"):
        g = np.exp(-0.5 * (spec.sigma_par * (kys - spec.kappa)) ** 2 - 0.5 * (spec.sigma_perp * kx) ** 2 - 1.0 / kys)
    k = np.sqrt(kx * kx + ky * ky)
    g = np.where(pos, g, 0.0) * np.exp(-1j * k * (time_sign * ct))
    y0, x0 = window.origin
    g = g * np.exp(1j * (ky * y0 + kx * x0))
    return np.fft.ifft2(g) / window.cell


def _slice_evanescent(spec, ct, window, x_sign):
    ny, nx = window.shape
    y = window.ct
    x = window.x
    kx = 2 * np.pi * np.fft.fftfreq(nx, window.dx)
    dkx = 2 * np.pi / (nx * window.dx)
    # k quadrature: the packet is Gaussian in k with width 1/sigma_perp
    kmax = 12.0 / spec.sigma_perp
    nk = max(65, int(np.ceil(2 * kmax / dkx)) | 1)
    k = np.linspace(-kmax, kmax, nk)
    dk = k[1] - k[0]
    kk, kxx = np.meshgrid(k, kx, indexing="ij")
    base = spec if spec.sector == 3 else MotherSpec(3, spec.kappa, spec.sigma_par, spec.sigma_perp)
    tphase = np.exp(-1j * kk * ct) * dk
    out = np.empty((ny, nx), complex)
    xphase = np.exp(1j * kx * x[0])
    for i, yi in enumerate(y):
        m = mother_hat(base, (kk, kxx), yi)
        w = (m * tphase).sum(axis=0) * xphase
        row = np.fft.ifft(w) * nx * dkx / (2 * np.pi) ** 2
        out[i] = row
    if x_sign < 0:
        out = out[:, ::-1]
    return out


def mother_time_slice(spec, ct, window):
    """Mother solution ``Psi_j(ct, x, y)`` on a spatial window at fixed ``ct``.

    Parameters
    ----------
    spec : MotherSpec
    ct : float
    window : Grid2D
        spatial grid; rows are y (``n_t``, ``dt``, ``origin[0]``) and
        columns are x (``n_x``, ``dx``, ``origin[1]``).

    Returns
    -------
    numpy.ndarray
        complex matrix indexed ``[y, x]``.

    Sectors 1-2 are evaluated by a 2D inverse FFT over ``(kx, ky)`` with
    ``omega = c |k|``.  Sectors 3-4 use the ``(k, kx)`` representation with
    the ``exp(-q y)`` decay applied row by row; the sector-4 window must be
    symmetric in x.
    """
    j = spec.sector
    if j in (1, 2):
        psi = _slice_propagating(spec, ct, window, 1 if j == 1 else -1)
    else:
        if np.any(window.ct < 0):
            raise ValueError("evanescent solutions are only defined for y >= 0")
        if j == 4 and not np.allclose(window.x, -window.x[::-1]):
            raise ValueError("sector-4 slices need an x-symmetric window")
        psi = _slice_evanescent(spec, ct, window, 1 if j == 3 else -1)
    leak = _check_leakage(psi)
    if leak > 0.01:
        warnings.warn(f"{100 * leak:.1f}% of the packet energy lies in the window border; "
                      "enlarge the window", stacklevel=2)
    return psi


def packet_window(n_y, n_x, dy, dx, y0=None, x0=None):
    """Spatial window helper: rows are y, columns are x, centred unless given."""
    y0 = -0.5 * (n_y - 1) * dy if y0 is None else y0
    x0 = -0.5 * (n_x - 1) * dx if x0 is None else x0
    return Grid2D(n_y, n_x, dy, dx, (y0, x0))
