"""Built-in numerical self-verification.

``run("quick")`` finishes in seconds and covers the Fourier identity, the
boost group law, the boosted-packet ellipse, the propagator and a small
Plancherel balance.  ``run("full")`` adds the production-size Plancherel
plateau, the reconstruction round trip, the coordinate-space transform
oracle, the wave-equation residual, packet kinematics and the six-group
moving-source experiment.

Every check returns a :class:`CheckResult`; ``run`` collects them into a
JSON-serialisable report.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .field import extrapolated_wave_residual, propagate, vertical_propagator
from .geometry import boost, packet_ellipse, packet_form_matrix, spectral_boost_scale
from .lattice import BoundarySignal, Grid2D, Spectrum, forward_fourier, inverse_fourier, sector_mask
from .wavelets import (MotherSpec, WaveletPoint, admissibility_constant, closed_form_t0, family_spectrum,
                       mother_time_slice, packet_window)

__all__ = ["CheckResult", "run", "QUICK", "FULL", "packet_signal", "band_limited_field", "REFERENCE_MOTHER"]

#: mother used by the moving-source experiment
REFERENCE_MOTHER = MotherSpec(1, 4.0, 2 * np.sqrt(55.0), 8.0)
_PLANCHEREL_MOTHER = MotherSpec(1, 4.0, 1.0, 2.0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: object
    tolerance: object
    seconds: float = 0.0
    detail: str = ""


def packet_signal(grid, center=(2.0, 0.0), width=0.2):
    """Band-limited sector-1 signal: a Gaussian spectral bump masked to D1."""
    k, kx = grid.dual_mesh()
    bump = np.exp(-((k - center[0]) ** 2 + (kx - center[1]) ** 2) / (2 * width ** 2))
    return inverse_fourier(sector_mask(Spectrum(grid, bump + 0j), 1))


def band_limited_field(grid, seed=0, rho=(1.0, 2.5), opening=0.5):
    """Random D1 field with support ``rho_lo < sqrt(k^2-kx^2) < rho_hi``, ``|kx| < opening k``."""
    rng = np.random.default_rng(seed)
    k, kx = np.broadcast_arrays(*grid.dual_mesh())
    r2 = k * k - kx * kx
    band = (k > 0) & (np.abs(kx) < opening * k) & (r2 > rho[0] ** 2) & (r2 < rho[1] ** 2)
    vals = np.where(band, rng.normal(size=k.shape) + 1j * rng.normal(size=k.shape), 0)
    return inverse_fourier(Spectrum(grid, vals))


# ---------------------------------------------------------------- quick checks

def check_parseval(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (64, 513):
        g = Grid2D(n, n, 0.5, 0.5, (-0.25 * (n - 1), -0.25 * (n - 1)))
        f = BoundarySignal(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
        s = forward_fourier(f)
        worst = max(worst, abs(s.norm2() / ((2 * np.pi) ** 2 * f.norm2()) - 1))
    return CheckResult("parseval", worst < 1e-12, worst, 1e-12)


def check_group_law(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p1, p2, a in zip(rng.uniform(-2, 2, 50), rng.uniform(-2, 2, 50), rng.uniform(0.2, 5, 50)):
        m = boost(p1).matrix @ boost(p2).matrix
        worst = max(worst, np.abs(m - boost(p1 + p2).matrix).max())
        sig = rng.normal(size=2)
        two = spectral_boost_scale(spectral_boost_scale(sig, a, p1), 1.0, p2)
        one = spectral_boost_scale(sig, a, p1 + p2)
        worst = max(worst, np.abs(np.subtract(two, one)).max() / (1 + np.abs(one).max()))
    return CheckResult("group_law", worst < 1e-12, worst, 1e-12)


def check_ellipse(seed=0, n=200):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for al, be, ph in zip(rng.uniform(0.2, 5, n), rng.uniform(0.2, 5, n), rng.uniform(-2, 2, n)):
        e = packet_ellipse(al, be, ph)
        ref = np.linalg.eigvalsh(packet_form_matrix(al, be, ph))[::-1]
        worst = max(worst, abs(e.lambda1 - ref[0]) / ref[0], abs(e.lambda2 - ref[1]) / ref[0])
        worst = max(worst, abs(e.lambda1 * e.lambda2 / (al * al * be * be * np.cosh(ph) ** 2) - 1))
    return CheckResult("ellipse_identity", worst < 1e-10, worst, 1e-10)


def check_propagator(seed=0):
    rng = np.random.default_rng(seed)
    g = Grid2D(64, 64, 0.5, 0.5)
    s = Spectrum(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
    worst = 0.0
    for j in (1, 2, 3, 4):
        sj = sector_mask(s, j)
        two = propagate(propagate(sj, 0.7), 1.3).values
        one = propagate(sj, 2.0).values
        worst = max(worst, np.abs(two - one).max() / np.abs(sj.values).max())
    p = vertical_propagator(g, 3.0)
    k, kx = g.dual_mesh()
    inside = np.abs(k) > np.abs(kx)
    worst = max(worst, np.abs(np.abs(p[inside]) - 1).max())
    return CheckResult("propagator", worst < 1e-12, worst, 1e-12)


def check_plancherel_quick(tamper=1.0):
    """Plancherel balance on a 128 x 128 grid at production sampling.

    ``tamper`` rescales the mother's amplitude after C was computed (a
    negative control: any value but 1 must fail).
    """
    g = Grid2D(128, 128, 0.5, 0.5, (-31.75, -31.75))
    from .transform import plancherel_check
    C = admissibility_constant(_PLANCHEREL_MOTHER).value
    phi = np.linspace(-1.5, 1.5, 61)
    a = 2.0 * np.exp(np.linspace(-2 * np.log(2), 2 * np.log(2), 65))
    r = plancherel_check(packet_signal(g), _PLANCHEREL_MOTHER, a, phi, C / tamper ** 2).ratio
    return CheckResult("plancherel_quick", abs(r - 1) <= 0.02, r, [0.98, 1.02])


QUICK = ("parseval", "group_law", "ellipse_identity", "propagator", "plancherel_quick")

# ---------------------------------------------------------------- full checks


def check_plancherel(tamper=1.0):
    from .transform import plancherel_refinement
    g = Grid2D(256, 256, 0.5, 0.5, (-63.75, -63.75))
    C = admissibility_constant(_PLANCHEREL_MOTHER).value / tamper ** 2
    samplings = []
    for n_phi, n_a in ((31, 33), (61, 65), (121, 129)):
        samplings.append((2.0 * np.exp(np.linspace(-2 * np.log(2), 2 * np.log(2), n_a)),
                          np.linspace(-1.5, 1.5, n_phi)))
    ratios, monotone = plancherel_refinement(packet_signal(g), _PLANCHEREL_MOTHER, samplings, C)
    ok = abs(ratios[1] - 1) <= 0.02 and monotone
    return CheckResult("plancherel", ok, ratios, "[0.98, 1.02], monotone")


def check_reconstruction():
    from .transform import default_sampling, synthesize
    g = Grid2D(64, 64, 0.5, 0.5)
    f = band_limited_field(g)
    f1 = inverse_fourier(sector_mask(forward_fourier(f), 1))
    C = admissibility_constant(_PLANCHEREL_MOTHER).value
    errs = []
    for n_phi, n_a in ((31, 33), (61, 65), (121, 129)):
        a, phi = default_sampling(f, _PLANCHEREL_MOTHER, n_phi=n_phi, n_a=n_a)
        u = synthesize(f, _PLANCHEREL_MOTHER, a, phi, C)
        errs.append(float(np.linalg.norm(u.values - f1.values) / np.linalg.norm(f1.values)))
    ok = errs[1] < 0.05 and bool(np.all(np.diff(errs) < 0))
    return CheckResult("reconstruction", ok, errs, "< 0.05, decreasing")


def check_oracle(seed=0):
    """Transform slab vs the coordinate-space inner product with the wavelet
    synthesised by an explicit (non-FFT) Fourier sum."""
    from .transform import apwt_slab
    rng = np.random.default_rng(seed)
    g = Grid2D(64, 64, 0.5, 0.5, (-15.75, -15.75))
    f = band_limited_field(g, seed)
    spec = _PLANCHEREL_MOTHER
    k, kx = g.k, g.kx
    et = np.exp(1j * np.outer(g.ct, k))      # exp(+i k ct)
    ex = np.exp(-1j * np.outer(kx, g.x))     # exp(-i kx x)
    worst = 0.0
    for _ in range(16):
        a, phi = rng.uniform(1.5, 3), rng.uniform(-0.5, 0.5)
        m, n = rng.integers(0, 64, 2)
        b = (g.ct[m], g.x[n])
        psi_hat = family_spectrum(spec, g, a, phi, b=b)
        psi = et.conj() @ psi_hat @ ex.conj() * (g.dk * g.dkx / (2 * np.pi) ** 2)
        ref = np.sum(f.values * np.conj(psi)) * g.cell
        got = apwt_slab(f, spec, a, phi)[m, n]
        worst = max(worst, abs(got - ref) / abs(ref))
    return CheckResult("oracle_equivalence", worst < 1e-9, worst, 1e-9)


def check_wave_residual():
    g = Grid2D(64, 64, 0.5, 0.5)
    k, kx = np.broadcast_arrays(*g.dual_mesh())
    fields = {
        1: sector_mask(forward_fourier(band_limited_field(g)), 1),
        3: sector_mask(Spectrum(g, np.where((np.abs(kx) > np.abs(k) + 0.2) & (np.abs(kx) < 2.5), 1.0 + 0j, 0)), 3),
    }
    worst = max(extrapolated_wave_residual(sj, 1.0, 0.02)[2] for sj in fields.values())
    return CheckResult("wave_residual", worst < 1e-8, worst, 1e-8)


def check_kinematics():
    """Mother slice at ct = 0 against the Gaussian closed form times the
    constant ``exp(-1/kappa)`` that the regularising factor contributes near
    ``ky = kappa``; the unscaled difference is reported alongside."""
    spec = MotherSpec(1, 16.0, np.sqrt(2), np.sqrt(2))
    win = packet_window(256, 128, 0.125, 0.125, y0=-12.0)
    s0 = mother_time_slice(spec, 0.0, win)
    closed = closed_form_t0(spec, win)
    ref = closed * np.exp(-1.0 / spec.kappa)
    err = float(np.linalg.norm(s0 - ref) / np.linalg.norm(ref))
    raw = float(np.linalg.norm(s0 - closed) / np.linalg.norm(closed))
    s1 = mother_time_slice(spec, 7.5, win)
    y = win.ct
    cy = [np.sum(y[:, None] * np.abs(s) ** 2) / np.sum(np.abs(s) ** 2) for s in (s0, s1)]
    speed = (cy[1] - cy[0]) / 7.5
    ok = err < 0.03 and abs(speed - 1) < 0.05
    return CheckResult("packet_kinematics", ok,
                       {"slice_error_scaled": err, "slice_error_unscaled": raw, "centroid_speed": float(speed)},
                       {"slice_error_scaled": 0.03, "centroid_speed": "1 +- 0.05"},
                       detail="slice compared with closed form x exp(-1/kappa)")


def check_experiment(seed=0):
    from .sources import EXPERIMENT_GROUPS, calibrate_kappa_eff, experiment_field, reference_config
    from .transform import detect_peaks, scale_rapidity_diagram
    cfg = reference_config(seed)
    f = experiment_field(cfg)
    kappa_eff = calibrate_kappa_eff(REFERENCE_MOTHER, cfg.grid)
    d = scale_rapidity_diagram(f, REFERENCE_MOTHER, np.geomspace(3.6, 5.0, 70), np.linspace(0.1, 0.9, 81))
    peaks = detect_peaks(d, 12, kappa_eff=kappa_eff, min_rel_height=0.05)
    found = [(p.omega, p.phi) for p in peaks]
    ok = len(found) == len(EXPERIMENT_GROUPS) and _matches(found, EXPERIMENT_GROUPS)
    return CheckResult("moving_sources", ok, found, "6 peaks, phi +-0.05, omega +-5%")


def _matches(found, truth):
    """One-to-one assignment of recovered (omega, phi) to the configured groups."""
    left = list(truth)
    for om, ph in found:
        hit = next((t for t in left if abs(ph - t[1]) <= 0.05 and abs(om / t[0] - 1) <= 0.05), None)
        if hit is None:
            return False
        left.remove(hit)
    return not left


FULL = QUICK + ("plancherel", "reconstruction", "oracle_equivalence", "wave_residual",
                "packet_kinematics", "moving_sources")

_CHECKS = {
    "parseval": check_parseval,
    "group_law": check_group_law,
    "ellipse_identity": check_ellipse,
    "propagator": check_propagator,
    "plancherel_quick": check_plancherel_quick,
    "plancherel": check_plancherel,
    "reconstruction": check_reconstruction,
    "oracle_equivalence": check_oracle,
    "wave_residual": check_wave_residual,
    "packet_kinematics": check_kinematics,
    "moving_sources": check_experiment,
}
_TAMPERABLE = ("plancherel_quick", "plancherel")


def run(level="quick", tamper=1.0, only=None):
    """Run a check level and return the report dict.

    Parameters
    ----------
    level : {"quick", "full"}
    tamper : float
        test hook: mother amplitude factor applied after C is computed;
        anything but 1 must make the Plancherel checks fail.
    only : iterable of str, optional
        restrict to these check names.
    """
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    names = QUICK if level == "quick" else FULL
    if only is not None:
        unknown = set(only) - set(_CHECKS)
        if unknown:
            raise ValueError(f"unknown checks: {sorted(unknown)}")
        names = tuple(n for n in names if n in set(only))
    results = []
    for name in names:
        t0 = time.perf_counter()
        kw = {"tamper": tamper} if name in _TAMPERABLE else {}
        try:
            res = _CHECKS[name](**kw)
        except Exception as err:  # a crashing check is a failed check
            res = CheckResult(name, False, None, None, detail=f"{type(err).__name__}: {err}")
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return {
        "level": level,
        "version": __version__,
        "passed": all(r.passed for r in results),
        "checks": [_jsonable(asdict(r)) for r in results],
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj
