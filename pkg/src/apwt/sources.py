"""Boundary traces of monochromatic point sources moving along x.

Each source is a rest-frame outgoing cylindrical wave at depth ``depth``
(below the observation line y = 0), evaluated with the far-field
asymptotic

    u(t', x') = sqrt(2 c / (pi omega r')) exp(-i pi/4) exp(i (omega/c) r' - i omega t'),
    r' = sqrt(x'^2 + depth^2),

in the source frame ``(ct', x') = Lambda_phi (ct, x - x_s)`` moving with
speed ``c tanh(phi)``.  y is unchanged by a boost along x.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .lattice import BoundarySignal, Grid2D

__all__ = ["SourceGroup", "ExperimentConfig", "single_source_trace", "draw_rapidities",
           "experiment_field", "EXPERIMENT_GROUPS", "reference_config", "calibrate_kappa_eff"]

log = logging.getLogger(__name__)

#: (omega, mean rapidity) of the six source groups of the moving-source experiment
EXPERIMENT_GROUPS = ((1.0, 0.4), (1.0, 0.7), (1.0, 0.5), (0.9, 0.3), (0.95, 0.5), (0.95, 0.4))

# far-field asymptotic is trusted only beyond this many radians of phase
_MIN_KR = 20.0


@dataclass(frozen=True)
class SourceGroup:
    """A group of sources sharing one frequency and a mean speed.

    ``x_offsets=None`` spreads the ``n_sources`` sources uniformly over
    ``[-spread, spread]``.  The default ``spread=0`` co-locates them: sources
    spread by hundreds of wavelengths interfere with random relative phases,
    and the resulting spectral speckle splits one group into several
    scale-rapidity maxima.
    """

    omega: float
    phi_mean: float
    speed_sigma: float = 0.01
    n_sources: int = 32
    depth: float = -5000.0
    x_offsets: tuple | None = None
    spread: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"omega must be positive, got {self.omega!r}")
        if not np.isfinite(self.phi_mean):
            raise ValueError(f"phi_mean must be finite, got {self.phi_mean!r}")
        if self.speed_sigma < 0:
            raise ValueError("speed_sigma must be non-negative")
        if self.n_sources < 1:
            raise ValueError("n_sources must be at least 1")
        if not self.depth < 0:
            raise ValueError(f"depth must be negative, got {self.depth!r}")
        if self.x_offsets is not None:
            offs = tuple(float(v) for v in self.x_offsets)
            if len(offs) != self.n_sources:
                raise ValueError(f"x_offsets has {len(offs)} entries for {self.n_sources} sources")
            object.__setattr__(self, "x_offsets", offs)

    def positions(self):
        if self.x_offsets is not None:
            return np.asarray(self.x_offsets)
        if self.n_sources == 1:
            return np.zeros(1)
        return np.linspace(-self.spread, self.spread, self.n_sources)


@dataclass(frozen=True)
class ExperimentConfig:
    groups: tuple
    grid: Grid2D
    seed: int = 0
    c: float = 1.0

    def __post_init__(self):
        if len(self.groups) == 0:
            raise ValueError("groups: at least one source group is required")
        object.__setattr__(self, "groups", tuple(self.groups))

    def to_dict(self):
        g = self.grid
        return {
            "seed": self.seed,
            "c": self.c,
            "grid": {"n_t": g.n_t, "n_x": g.n_x, "dt": g.dt, "dx": g.dx, "origin": list(g.origin)},
            "groups": [{k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(gr).items()}
                       for gr in self.groups],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ValueError("config must be a JSON object")
        if "groups" not in d:
            raise ValueError("groups: missing")
        if "grid" not in d:
            raise ValueError("grid: missing")
        gd = d["grid"]
        try:
            if "half_width" in gd:
                grid = Grid2D.symmetric(float(gd["half_width"]), float(gd["step"]))
            else:
                grid = Grid2D(int(gd["n_t"]), int(gd["n_x"]), float(gd["dt"]), float(gd["dx"]),
                              tuple(gd.get("origin", (0.0, 0.0))))
        except (KeyError, TypeError) as err:
            raise ValueError(f"grid: invalid ({err})") from None
        groups = []
        for i, gr in enumerate(d["groups"]):
            try:
                groups.append(SourceGroup(**gr))
            except (TypeError, ValueError) as err:
                raise ValueError(f"groups[{i}]: {err}") from None
        return cls(tuple(groups), grid, int(d.get("seed", 0)), float(d.get("c", 1.0)))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def reference_config(seed=0, **group_kw):
    """The six-group configuration on the 513 x 513 mesh (-128..128, step 0.5)."""
    groups = tuple(SourceGroup(omega=w, phi_mean=p, seed=i, **group_kw)
                   for i, (w, p) in enumerate(EXPERIMENT_GROUPS))
    return ExperimentConfig(groups, Grid2D.symmetric(128.0, 0.5), seed)


def single_source_trace(omega, phi, x_s, depth, grid, c=1.0):
    """Boundary trace of one moving monochromatic point source.

    Parameters
    ----------
    omega : float
        rest-frame angular frequency
    phi : float
        source rapidity, speed ``c tanh(phi)`` along +x
    x_s : float
        source position at t = 0
    depth : float
        source plane ``y_s < 0``
    grid : Grid2D

    Returns
    -------
    BoundarySignal
    """
    if depth >= 0:
        raise ValueError(f"depth must be negative, got {depth!r}")
    if not np.isfinite(phi):
        raise ValueError("rapidity must be finite (|v| < c)")
    kw = omega / c
    ct, x = grid.mesh()
    ch, sh = np.cosh(phi), np.sinh(phi)
    ct_rest = ch * ct - sh * (x - x_s)
    x_rest = ch * (x - x_s) - sh * ct
    r = np.hypot(x_rest, depth)
    if kw * r.min() < _MIN_KR:
        raise ValueError(f"near field: (omega/c) r' = {kw * r.min():.3g} < {_MIN_KR}, far-field asymptotic invalid")
    amp = np.sqrt(2 * c / (np.pi * omega * r)) * np.exp(-0.25j * np.pi)
    return BoundarySignal(grid, amp * np.exp(1j * kw * (r - ct_rest)))


def draw_rapidities(group, rng, c=1.0):
    """Per-source rapidities: speeds ~ N(c tanh(phi_mean), speed_sigma c), |v| < c.

    Returns ``(phis, n_rejected)``; draws with ``|v| >= c`` are redrawn.
    """
    mean = c * np.tanh(group.phi_mean)
    if group.speed_sigma == 0:
        return np.full(group.n_sources, float(group.phi_mean)), 0
    out = np.empty(group.n_sources)
    rejected = 0
    for i in range(group.n_sources):
        v = rng.normal(mean, group.speed_sigma * c)
        while abs(v) >= c:
            rejected += 1
            v = rng.normal(mean, group.speed_sigma * c)
        out[i] = np.arctanh(v / c)
    return out, rejected


def experiment_field(config):
    """Sum of all source traces of all groups; bitwise reproducible per seed."""
    total = np.zeros(config.grid.shape, complex)
    rejected = 0
    for gi, group in enumerate(config.groups):
        rng = np.random.default_rng([config.seed, gi, group.seed])
        phis, nrej = draw_rapidities(group, rng, config.c)
        rejected += nrej
        for phi, xs in zip(phis, group.positions()):
            total += single_source_trace(group.omega, phi, xs, group.depth, config.grid, config.c).values
    if rejected:
        log.warning("redrew %d speed samples with |v| >= c", rejected)
    return BoundarySignal(config.grid, total)


def calibrate_kappa_eff(spec, grid, omega=1.0, phi=0.0, depth=-5000.0, c=1.0, n_a=81, octaves=1.0,
                        n_phi=21, phi_halfwidth=0.2):
    """Measure the constant in the frequency map ``omega = kappa_eff / a``.

    A single monochromatic source of known ``omega`` and rapidity ``phi`` is
    run through the scale-rapidity diagram; the refined scale of the diagram
    maximum gives ``kappa_eff = omega * a_peak``.  For a Gaussian-packet mother
    this is close to, but not exactly, ``kappa``: the weighting of the
    source's spectral line by the packet's radial profile and the source
    amplitude moves the maximum slightly.

    Returns
    -------
    float
    """
    from .transform import detect_peaks, log_axis, scale_rapidity_diagram

    f = single_source_trace(omega, phi, 0.0, depth, grid, c)
    a_axis = log_axis(spec.kappa * c / omega, octaves, n_a)
    phi_axis = np.linspace(phi - phi_halfwidth, phi + phi_halfwidth, n_phi)
    d = scale_rapidity_diagram(f, spec, a_axis, phi_axis)
    peaks = detect_peaks(d, 1)
    if not peaks.complete:
        raise ValueError("calibration diagram has no interior maximum; widen the scale range")
    return float(omega * peaks[0].a)
