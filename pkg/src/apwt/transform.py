"""Forward affine Poincare wavelet transform, Plancherel check, reconstruction
and the scale-rapidity diagram.

All transforms go through the Fourier domain.  For fixed ``(a, phi)`` the
dependence on the shift ``b`` is the phase ``exp(-i(sigma, b))``, so the
whole ``b``-plane of coefficients is one inverse transform::

    F(b; a, phi) = (2 pi)^-2 int fhat(sigma) conj(a psi_hat(a Lambda_phi sigma)) exp(+i(sigma, b)) d^2 sigma

and its ``b``-energy follows from Parseval without forming it::

    int |F|^2 d^2 b = a^2 (2 pi)^-2 int |fhat|^2 |psi_hat(a Lambda_phi sigma)|^2 d^2 sigma

The shift lattice is the signal grid, with periodic wrap.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .field import FieldSlice, vertical_propagator
from .geometry import spectral_boost_scale
from .lattice import BoundarySignal, Spectrum, forward_fourier, inverse_fourier, sector_index
from .wavelets import WaveletPoint, admissibility_constant, family_hat, mother_hat

__all__ = [
    "CoefficientGrid",
    "Diagram",
    "Peak",
    "PeakReport",
    "PlancherelResult",
    "log_axis",
    "scale_weights",
    "rapidity_weights",
    "default_sampling",
    "apwt_point",
    "apwt_slab",
    "apwt",
    "plancherel_check",
    "plancherel_refinement",
    "reconstruct",
    "synthesize",
    "scale_rapidity_diagram",
    "detect_peaks",
]

_TWO_PI_SQ = (2 * np.pi) ** 2
# sector energy below this fraction of the total counts as zero
_DEGENERATE_REL = 1e-24


# ---------------------------------------------------------------- sampling

def log_axis(center, octaves, n):
    """``n`` log-uniform scales spanning ``octaves`` octaves centred on ``center``."""
    half = 0.5 * octaves * np.log(2)
    return center * np.exp(np.linspace(-half, half, n))


def _cell_edges(axis, log=False):
    v = np.log(axis) if log else np.asarray(axis, float)
    if v.size == 1:
        raise ValueError("an axis needs at least two samples to define cells")
    mid = 0.5 * (v[1:] + v[:-1])
    edges = np.concatenate(([v[0] - (mid[0] - v[0])], mid, [v[-1] + (v[-1] - mid[-1])]))
    return np.exp(edges) if log else edges


def scale_weights(a_axis):
    """Exact ``int da / a^3`` over the log-cell around each scale."""
    e = _cell_edges(a_axis, log=True)
    return 0.5 * (e[:-1] ** -2 - e[1:] ** -2)


def rapidity_weights(phi_axis):
    return np.diff(_cell_edges(phi_axis))


def _sector_bins(spectrum, j):
    """Flattened (k, kx, fhat) of the bins inside D_j."""
    k, kx = np.broadcast_arrays(*spectrum.grid.dual_mesh())
    inside = sector_index(k, kx) == j
    return k[inside], kx[inside], spectrum.values[inside], inside


def default_sampling(f, spec, n_phi=61, phi_max=1.5, octaves=4.0, n_a=65):
    """Production (a, phi) axes: phi uniform on [-phi_max, phi_max], a log-uniform
    over ``octaves`` octaves centred on the scale matching the signal's dominant
    hyperbolic radius in the mother's sector."""
    spectrum = f if isinstance(f, Spectrum) else forward_fourier(f)
    k, kx, v, _ = _sector_bins(spectrum, spec.sector)
    w = np.abs(v) ** 2
    if w.sum() == 0:
        raise ValueError(f"signal has no energy in sector {spec.sector}")
    rho = np.sqrt(np.abs(k * k - kx * kx))
    rho_dom = np.exp(np.sum(w * np.log(rho)) / w.sum())
    return log_axis(spec.kappa / rho_dom, octaves, n_a), np.linspace(-phi_max, phi_max, n_phi)


# ---------------------------------------------------------------- containers

@dataclass(frozen=True)
class CoefficientGrid:
    """F_j(phi, a, c tau, b_x) on a (phi, a, b) lattice; ``b_grid`` is the signal grid."""

    mother: object
    phi_axis: np.ndarray
    a_axis: np.ndarray
    b_grid: object
    values: np.ndarray = field(repr=False)

    @property
    def sector(self):
        return self.mother.sector

    def __post_init__(self):
        shape = (len(self.phi_axis), len(self.a_axis), *self.b_grid.shape)
        if self.values.shape != shape:
            raise ValueError(f"coefficient array {self.values.shape} does not match axes {shape}")


@dataclass(frozen=True)
class Diagram:
    """S(a, phi) >= 0, indexed ``values[i_a, i_phi]``."""

    a_axis: np.ndarray
    phi_axis: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != (len(self.a_axis), len(self.phi_axis)):
            raise ValueError("diagram values do not match its axes")


# ---------------------------------------------------------------- forward transform

def _spectrum(f):
    return f if isinstance(f, Spectrum) else forward_fourier(f)


def _scaled_mother(spec, k, kx, a, phi, y=0.0):
    """``a psi_hat(a Lambda_phi sigma; y/a)`` on arbitrary bins."""
    return a * mother_hat(spec, spectral_boost_scale((k, kx), a, phi), y / a)


def apwt_point(f, spec, mu):
    """Single coefficient ``F_j(mu) = (2 pi)^-2 (fhat, psi_mu_hat)``.

    ``f`` need not be projected onto D_j first: the wavelet spectrum vanishes
    outside it.
    """
    spectrum = _spectrum(f)
    k, kx = spectrum.grid.dual_mesh()
    psi = family_hat(spec, mu, (k, kx))
    return complex(np.sum(spectrum.values * np.conj(psi)) * spectrum.grid.dual_cell / _TWO_PI_SQ)


def apwt_slab(f, spec, a, phi):
    """All coefficients ``F_j(b; a, phi)`` for ``b`` on the signal grid.

    Returns an ``(n_t, n_x)`` complex matrix; entry ``[m, n]`` is the shift
    ``b = (ct_m, x_n)``.
    """
    spectrum = _spectrum(f)
    k, kx = spectrum.grid.dual_mesh()
    prod = spectrum.values * np.conj(_scaled_mother(spec, k, kx, a, phi))
    return inverse_fourier(spectrum.with_values(prod)).values


def apwt(f, spec, a_axis, phi_axis):
    """Full coefficient grid ``F_j(phi, a, b)``."""
    spectrum = _spectrum(f)
    a_axis = np.asarray(a_axis, float)
    phi_axis = np.asarray(phi_axis, float)
    out = np.empty((phi_axis.size, a_axis.size, *spectrum.grid.shape), complex)
    for i, phi in enumerate(phi_axis):
        for j, a in enumerate(a_axis):
            out[i, j] = apwt_slab(spectrum, spec, a, phi)
    return CoefficientGrid(spec, phi_axis, a_axis, spectrum.grid, out)


# ---------------------------------------------------------------- Plancherel

@dataclass(frozen=True)
class PlancherelResult:
    ratio: float
    numerator: float
    denominator: float
    degenerate: bool = False


def _b_energy(spectrum, spec, a, phi):
    """``int |F(b; a, phi)|^2 d^2 b`` via Parseval."""
    k, kx, v, _ = _sector_bins(spectrum, spec.sector)
    psi = mother_hat(spec, spectral_boost_scale((k, kx), a, phi))
    return a * a * np.sum(np.abs(v) ** 2 * np.abs(psi) ** 2) * spectrum.grid.dual_cell / _TWO_PI_SQ


def _b_energy_direct(spectrum, spec, a, phi):
    slab = apwt_slab(spectrum, spec, a, phi)
    return np.sum(np.abs(slab) ** 2) * spectrum.grid.cell


def plancherel_check(f, spec, a_axis, phi_axis, C=None, method="parseval"):
    """Ratio ``[int dphi int da/a^3 int d^2b |F_j|^2] / (C_j ||f_j||^2)``.

    ``method="parseval"`` evaluates the b-integral exactly in the Fourier
    domain; ``"direct"`` sums the slabs.  The ratio is 1 in the continuum;
    on a lattice only the (a, phi) quadrature error remains.
    """
    spectrum = _spectrum(f)
    if C is None:
        C = admissibility_constant(spec).value
    C = getattr(C, "value", C)
    _, _, v, _ = _sector_bins(spectrum, spec.sector)
    norm_fj = np.sum(np.abs(v) ** 2) * spectrum.grid.dual_cell / _TWO_PI_SQ
    total = np.sum(np.abs(spectrum.values) ** 2) * spectrum.grid.dual_cell / _TWO_PI_SQ
    # energy at round-off level (FFT leakage of a signal living in another sector)
    if norm_fj <= _DEGENERATE_REL * total:
        return PlancherelResult(float("nan"), 0.0, 0.0, degenerate=True)
    energy = {"parseval": _b_energy, "direct": _b_energy_direct}[method]
    wa = scale_weights(a_axis)
    wp = rapidity_weights(phi_axis)
    num = 0.0
    for phi, w_phi in zip(phi_axis, wp):
        for a, w_a in zip(a_axis, wa):
            num += w_phi * w_a * energy(spectrum, spec, a, phi)
    den = C * norm_fj
    return PlancherelResult(float(num / den), float(num), float(den))


def plancherel_refinement(f, spec, samplings, C=None):
    """Ratios for a sequence of samplings and whether they approach 1 monotonically.

    Returns ``(ratios, monotone)``; ``monotone`` is False when some refinement
    moves the ratio away from 1, which signals under-resolved or truncated
    (a, phi) sampling.
    """
    if C is None:
        C = admissibility_constant(spec).value
    ratios = [plancherel_check(f, spec, a, p, C).ratio for a, p in samplings]
    dev = np.abs(np.asarray(ratios) - 1)
    monotone = bool(np.all(np.diff(dev) <= 0))
    if not monotone:
        warnings.warn(f"Plancherel ratio not converging monotonically: {ratios}", stacklevel=2)
    return ratios, monotone


# ---------------------------------------------------------------- reconstruction

def reconstruct(coeffs, spec, C, y=0.0, out_grid=None):
    """Synthesis ``u_j(chi, y) = C_j^-1 sum_mu dmu F_j(mu) Psi_{j mu}(chi, y)``.

    Each (a, phi) slab is transformed once, multiplied by the member's
    spectrum at height ``y`` and accumulated; a single inverse transform
    finishes the sum.
    """
    if C is None:
        raise ValueError("reconstruction needs the admissibility constant C_j")
    C = getattr(C, "value", C)
    if coeffs.mother != spec:
        raise ValueError(f"coefficients were computed with {coeffs.mother}, not {spec}")
    grid = coeffs.b_grid
    if out_grid is not None and out_grid != grid:
        raise ValueError("output grid must equal the coefficient shift grid")
    if y < 0:
        raise ValueError("height must be non-negative")
    k, kx = grid.dual_mesh()
    wa = scale_weights(coeffs.a_axis)
    wp = rapidity_weights(coeffs.phi_axis)
    acc = np.zeros(grid.shape, complex)
    for i, (phi, w_phi) in enumerate(zip(coeffs.phi_axis, wp)):
        for j, (a, w_a) in enumerate(zip(coeffs.a_axis, wa)):
            slab_hat = forward_fourier(BoundarySignal(grid, coeffs.values[i, j])).values
            acc += (w_phi * w_a) * slab_hat * _scaled_mother(spec, k, kx, a, phi, y)
    u = inverse_fourier(Spectrum(grid, acc / C))
    return FieldSlice(float(y), grid, u.values, spec.sector)


def synthesize(f, spec, a_axis, phi_axis, C, y=0.0, threads=1):
    """Analysis followed by synthesis without storing the coefficient grid.

    Equivalent to ``reconstruct(apwt(f, ...), ...)`` but memory-bounded: the
    per-slab product ``fhat conj(psi) psi`` is accumulated directly.
    """
    C = getattr(C, "value", C)
    spectrum = _spectrum(f)
    grid = spectrum.grid
    k, kx, v, inside = _sector_bins(spectrum, spec.sector)
    wa = scale_weights(a_axis)
    wp = rapidity_weights(phi_axis)

    def one_phi(args):
        phi, w_phi = args
        acc = np.zeros(k.shape)
        for a, w_a in zip(a_axis, wa):
            acc += w_phi * w_a * a * a * np.abs(mother_hat(spec, spectral_boost_scale((k, kx), a, phi))) ** 2
        return acc

    with ThreadPoolExecutor(max(1, threads)) as pool:
        parts = list(pool.map(one_phi, zip(phi_axis, wp)))
    gain = np.sum(parts, axis=0)
    out = np.zeros(grid.shape, complex)
    out[inside] = v * gain / C
    if y:
        out = out * vertical_propagator(grid, y)
    u = inverse_fourier(Spectrum(grid, out))
    return FieldSlice(float(y), grid, u.values, spec.sector)


# ---------------------------------------------------------------- diagram

def scale_rapidity_diagram(f, spec, a_axis, phi_axis, method="fast", threads=1):
    """``S_j(a, phi) = a^-3 int |F_j(b; a, phi)|^2 d^2 b`` over an (a, phi) lattice.

    ``method="fast"`` uses the Parseval identity (no b-loop);
    ``method="direct"`` forms every slab and sums it, for cross-checking.
    Only the propagating sectors 1 and 2 are supported.
    """
    if spec.sector not in (1, 2):
        raise ValueError("scale-rapidity diagrams are defined for the propagating sectors 1 and 2 only")
    spectrum = _spectrum(f)
    a_axis = np.asarray(a_axis, float)
    phi_axis = np.asarray(phi_axis, float)
    if method == "direct":
        vals = np.array([[_b_energy_direct(spectrum, spec, a, p) / a ** 3 for p in phi_axis] for a in a_axis])
        return Diagram(a_axis, phi_axis, vals)
    if method != "fast":
        raise ValueError(f"unknown method {method!r}")
    k, kx, v, _ = _sector_bins(spectrum, spec.sector)
    power = np.abs(v) ** 2
    nz = power > 0
    k, kx, power = k[nz], kx[nz], power[nz] * (spectrum.grid.dual_cell / _TWO_PI_SQ)

    def row(a):
        return [np.dot(power, np.abs(mother_hat(spec, spectral_boost_scale((k, kx), a, p))) ** 2) / a
                for p in phi_axis]

    with ThreadPoolExecutor(max(1, threads)) as pool:
        vals = np.array(list(pool.map(row, a_axis)), float).reshape(a_axis.size, phi_axis.size)
    return Diagram(a_axis, phi_axis, vals)


@dataclass(frozen=True)
class Peak:
    a: float
    phi: float
    height: float
    omega: float
    v: float
    index: tuple


@dataclass(frozen=True)
class PeakReport:
    peaks: list
    complete: bool

    def __len__(self):
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    def __getitem__(self, i):
        return self.peaks[i]


def local_maxima(values):
    """Interior grid points not exceeded by any of their 8 neighbours (strictly
    above at least one)."""
    v = np.asarray(values, float)
    core = v[1:-1, 1:-1]
    ge = np.ones(core.shape, bool)
    gt = np.zeros(core.shape, bool)
    n0, n1 = v.shape
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            nb = v[1 + di:n0 - 1 + di, 1 + dj:n1 - 1 + dj]
            ge &= core >= nb
            gt |= core > nb
    idx = np.argwhere(ge & gt) + 1
    return [tuple(map(int, ij)) for ij in idx]


_DESIGN = np.array([[1, u, w, u * u, u * w, w * w] for u in (-1, 0, 1) for w in (-1, 0, 1)], float)
_DESIGN_PINV = np.linalg.pinv(_DESIGN)


def _quadratic_refine(v, i, j):
    """Sub-grid stationary point of a least-squares quadratic on the 3x3 block."""
    block = v[i - 1:i + 2, j - 1:j + 2].reshape(-1)
    c0, cu, cw, cuu, cuw, cww = _DESIGN_PINV @ block
    hess = np.array([[2 * cuu, cuw], [cuw, 2 * cww]])
    if np.linalg.det(hess) <= 0 or hess[0, 0] >= 0:
        return 0.0, 0.0, float(v[i, j])
    du, dw = np.linalg.solve(hess, [-cu, -cw])
    if abs(du) > 1 or abs(dw) > 1:
        return 0.0, 0.0, float(v[i, j])
    height = c0 + cu * du + cw * dw + cuu * du * du + cuw * du * dw + cww * dw * dw
    return float(du), float(dw), float(height)


def _interp_axis(axis, pos, log=False):
    vals = np.log(axis) if log else np.asarray(axis, float)
    i0 = int(np.clip(np.floor(pos), 0, len(axis) - 2))
    t = pos - i0
    out = vals[i0] + t * (vals[i0 + 1] - vals[i0])
    return float(np.exp(out) if log else out)


def detect_peaks(d, count, kappa_eff=1.0, c=1.0, min_rel_height=0.0):
    """Largest ``count`` local maxima of a diagram with sub-grid refinement.

    Maxima are ranked by height, ties broken by ``(a, phi)`` ascending.  The
    scale is converted to a frequency with the calibrated map
    ``omega = kappa_eff / a`` and the rapidity to a speed ``v = c tanh(phi)``.
    Returns a :class:`PeakReport` whose ``complete`` flag is False when fewer
    than ``count`` maxima exist.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    v = np.asarray(d.values, float)
    peak_min = min_rel_height * v.max() if v.size else 0.0
    found = []
    for i, j in local_maxima(v):
        if v[i, j] <= 0 or v[i, j] < peak_min:
            continue
        du, dw, h = _quadratic_refine(v, i, j)
        a = _interp_axis(d.a_axis, i + du, log=True)
        phi = _interp_axis(d.phi_axis, j + dw)
        found.append(Peak(a, phi, h, kappa_eff / a, c * np.tanh(phi), (i, j)))
    found.sort(key=lambda p: (-v[p.index], d.a_axis[p.index[0]], d.phi_axis[p.index[1]]))
    return PeakReport(found[:count], len(found) >= count)
