"""Command-line front end.

::

    apwt [--threads N] [--seed S] [--config PATH] <command> ...

    gen-sources  --out FIELD                         synthesise the moving-source field
    transform    FIELD --out COEFFS                  coefficient grid F(phi, a, b)
    diagram      FIELD --csv D.csv --pgm D.pgm --peaks P.csv
    reconstruct  COEFFS --out SLICE [--y Y]          synthesis at height y
    propagate    FIELD --y Y [Y ...] --out-dir DIR   per-sector and total slices
    selfcheck    [--level quick|full] [--report R.json]

Exit codes: 0 success, 2 validation error, 3 numerical-check failure, 4 I/O error.
Every command that writes files also writes a JSON run manifest (default
``<first output>.manifest.json``) with sha256 digests of inputs and outputs.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import resource
import sys
import time
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, apwf, export
from .lattice import forward_fourier
from .sources import ExperimentConfig, calibrate_kappa_eff, experiment_field
from .wavelets import MotherSpec, admissibility_constant

__all__ = ["main", "RunManifest", "load_config", "CONFIG_KEYS"]

log = logging.getLogger("apwt")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

#: top-level keys accepted in a config document
CONFIG_KEYS = {"seed", "c", "grid", "groups", "mother", "sampling", "peaks"}
_SAMPLING_KEYS = {"a_min", "a_max", "n_a", "phi_min", "phi_max", "n_phi", "octaves"}
_PEAK_KEYS = {"count", "min_rel_height", "kappa_eff"}
DEFAULT_MOTHER = {"sector": 1, "kappa": 4.0, "sigma_par": 2 * np.sqrt(55.0), "sigma_perp": 8.0}
# refuse to materialise coefficient grids larger than this (bytes)
MAX_COEFF_BYTES = 2 * 1024 ** 3


class NumericFailure(RuntimeError):
    """A numerical self-check failed."""


# ---------------------------------------------------------------- config

def _bundled(name):
    ref = resources.files("apwt") / "data" / name
    return ref if ref.is_file() else None


def load_config(path):
    """Read a JSON config; a bare bundled name such as ``moving_sources.json`` also works."""
    p = Path(path)
    if p.is_file():
        text = p.read_text()
    else:
        ref = _bundled(p.name) if p.parent == Path(".") else None
        if ref is None:
            raise FileNotFoundError(f"config not found: {path}")
        text = ref.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ValueError(f"config: invalid JSON ({err})") from None
    if not isinstance(doc, dict):
        raise ValueError("config: top level must be an object")
    unknown = set(doc) - CONFIG_KEYS
    if unknown:
        raise ValueError(f"config: unknown keys {sorted(unknown)}")
    for key, allowed in (("sampling", _SAMPLING_KEYS), ("peaks", _PEAK_KEYS)):
        extra = set(doc.get(key, {})) - allowed
        if extra:
            raise ValueError(f"{key}: unknown keys {sorted(extra)}")
    return doc


def _mother(doc):
    try:
        return MotherSpec.from_dict(doc.get("mother", DEFAULT_MOTHER))
    except ValueError as err:
        raise ValueError(f"mother: {err}") from None


def _sampling(doc, f, spec):
    from .transform import default_sampling
    s = doc.get("sampling")
    if not s or "a_min" not in s:
        s = s or {}
        return default_sampling(f, spec, n_phi=int(s.get("n_phi", 61)), phi_max=float(s.get("phi_max", 1.5)),
                                octaves=float(s.get("octaves", 4.0)), n_a=int(s.get("n_a", 65)))
    try:
        a = np.geomspace(float(s["a_min"]), float(s["a_max"]), int(s["n_a"]))
        phi = np.linspace(float(s.get("phi_min", -s["phi_max"])), float(s["phi_max"]), int(s["n_phi"]))
    except KeyError as err:
        raise ValueError(f"sampling: missing {err.args[0]!r}") from None
    if a[0] <= 0 or a.size < 3 or phi.size < 3:
        raise ValueError("sampling: need a_min > 0 and at least 3 samples per axis")
    return a, phi


# ---------------------------------------------------------------- manifest

def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class RunManifest:
    """Provenance record of one command run."""

    def __init__(self, command, argv, config=None):
        self.command = command
        self.argv = list(argv)
        self.config_digest = (hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()
                              if config is not None else None)
        self.inputs = []
        self.outputs = []
        self.extra = {}
        self._t0 = time.perf_counter()
        self._c0 = time.process_time()

    def add_input(self, path):
        self.inputs.append({"path": str(path), "sha256": _sha256(path)})

    def add_output(self, path):
        self.outputs.append({"path": str(path), "sha256": _sha256(path), "bytes": os.path.getsize(path)})

    def to_dict(self):
        return {
            "command": self.command,
            "argv": self.argv,
            "version": __version__,
            "config_digest": self.config_digest,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "timing": {"wall_s": time.perf_counter() - self._t0, "cpu_s": time.process_time() - self._c0},
            "resources": {"max_rss_kb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss},
            "extra": self.extra,
        }

    def write(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj).__name__)


def _finish(manifest, args, first_output):
    path = args.manifest or f"{first_output}.manifest.json"
    manifest.write(path)
    log.info("manifest written to %s", path)


# ---------------------------------------------------------------- commands

def _read_field(path):
    try:
        obj = apwf.read_signal(path)
    except OSError as err:
        raise OSError(f"cannot read {path}: {err.strerror or err}") from None
    from .field import FieldSlice
    return obj.as_signal() if isinstance(obj, FieldSlice) else obj


def cmd_gen_sources(args, doc):
    if doc is None:
        raise ValueError("gen-sources needs --config (e.g. --config moving_sources.json)")
    exp_doc = {k: doc[k] for k in ("seed", "c", "grid", "groups") if k in doc}
    if args.seed is not None:
        exp_doc["seed"] = args.seed
    cfg = ExperimentConfig.from_dict(exp_doc)
    m = RunManifest("gen-sources", args.argv, cfg.to_dict())
    f = experiment_field(cfg)
    apwf.write_signal(args.out, f)
    m.add_output(args.out)
    _finish(m, args, args.out)


def cmd_transform(args, doc):
    from .transform import apwt
    doc = doc or {}
    spec = _mother(doc)
    f = _read_field(args.field)
    a, phi = _sampling(doc, f, spec)
    size = 16 * a.size * phi.size * f.grid.n_t * f.grid.n_x
    if size > args.max_bytes:
        raise ValueError(f"coefficient grid would need {size / 2 ** 30:.1f} GiB (> --max-bytes); "
                         "reduce the sampling or the signal grid")
    m = RunManifest("transform", args.argv, doc)
    m.add_input(args.field)
    coeffs = apwt(f, spec, a, phi)
    apwf.write_coefficients(args.out, coeffs)
    m.add_output(args.out)
    _finish(m, args, args.out)


def cmd_diagram(args, doc):
    from .transform import detect_peaks, scale_rapidity_diagram
    doc = doc or {}
    spec = _mother(doc)
    if spec.sector not in (1, 2):
        raise ValueError("mother: diagrams are only defined for sectors 1 and 2")
    f = _read_field(args.field)
    m = RunManifest("diagram", args.argv, doc)
    m.add_input(args.field)
    peak_cfg = doc.get("peaks", {})
    count = int(args.count or peak_cfg.get("count", 6))
    zero = not np.any(forward_fourier(f).values)
    if zero:
        warnings.warn("input field is identically zero: the diagram is zero and has no peaks", stacklevel=2)
        a, phi = _sampling(doc, f, spec) if "a_min" in doc.get("sampling", {}) else \
            (np.geomspace(spec.kappa / 2, spec.kappa * 2, 65), np.linspace(-1.5, 1.5, 61))
    else:
        a, phi = _sampling(doc, f, spec)
    d = scale_rapidity_diagram(f, spec, a, phi, threads=args.threads)
    kappa_eff = args.kappa_eff if args.kappa_eff is not None else peak_cfg.get("kappa_eff", "calibrate")
    if kappa_eff == "calibrate":
        kappa_eff = calibrate_kappa_eff(spec, f.grid)
    kappa_eff = float(kappa_eff)
    peaks = [] if zero else detect_peaks(d, count, kappa_eff=kappa_eff,
                                         min_rel_height=float(peak_cfg.get("min_rel_height", 0.05)))
    if not zero and not peaks.complete:
        warnings.warn(f"only {len(peaks)} maxima found, {count} requested", stacklevel=2)
    export.write_diagram_csv(args.csv, d)
    scaling = export.write_pgm(args.pgm, d.values)
    export.write_peaks_csv(args.peaks, peaks)
    outs = [args.csv, args.pgm, args.peaks]
    if args.apwf:
        apwf.write_diagram(args.apwf, d)
        outs.append(args.apwf)
    for p in outs:
        m.add_output(p)
    m.extra.update({"pgm_scaling": scaling, "pgm_layout": "rows=a ascending, columns=phi ascending",
                    "kappa_eff": kappa_eff, "n_peaks": len(peaks)})
    _finish(m, args, args.csv)
    for p in peaks:
        print(f"a={p.a:.5f} phi={p.phi:.4f} omega={p.omega:.4f} v/c={p.v:.4f}")


def cmd_reconstruct(args, doc):
    from .transform import reconstruct
    if args.y < 0:
        raise ValueError("y must be >= 0")
    try:
        coeffs = apwf.read_coefficients(args.coeffs)
    except OSError as err:
        raise OSError(f"cannot read {args.coeffs}: {err.strerror or err}") from None
    m = RunManifest("reconstruct", args.argv, doc)
    m.add_input(args.coeffs)
    C = admissibility_constant(coeffs.mother)
    if not C.converged:
        raise NumericFailure(f"admissibility constant did not converge ({C.quadrature_error:.2e})")
    u = reconstruct(coeffs, coeffs.mother, C, y=args.y)
    apwf.write_signal(args.out, u)
    m.add_output(args.out)
    m.extra["C"] = C.value
    _finish(m, args, args.out)


def cmd_propagate(args, doc):
    from .field import FieldSlice, solve_halfplane
    ys = [float(y) for y in args.y]
    if any(y < 0 for y in ys):
        raise ValueError("y: heights must be >= 0 (incoming solutions are excluded)")
    f = _read_field(args.field)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    m = RunManifest("propagate", args.argv, doc)
    m.add_input(args.field)
    slices = solve_halfplane(f, ys)
    for i, y in enumerate(ys):
        total = sum(slices[j][i].values for j in slices)
        for j in slices:
            p = out / f"sector{j}_y{i:03d}.apwf"
            apwf.write_signal(p, slices[j][i])
            m.add_output(p)
        p = out / f"total_y{i:03d}.apwf"
        apwf.write_signal(p, FieldSlice(y, f.grid, total, 0))
        m.add_output(p)
    m.extra["y"] = ys
    _finish(m, args, out / "propagate")


def cmd_selfcheck(args, doc):
    from .selfcheck import run
    report = run(args.level, tamper=args.tamper_normalization, only=args.only)
    text = json.dumps(report, indent=2, default=_json_default)
    if args.report:
        Path(args.report).write_text(text + "\n")
    print(text)
    if not report["passed"]:
        failed = [c["name"] for c in report["checks"] if not c["passed"]]
        raise NumericFailure(f"failed checks: {', '.join(failed)}")


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="apwt", description="Affine Poincare wavelet transform tools.")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $APWT_THREADS or 1)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--config", default=None, help="JSON config (bundled: moving_sources.json)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def with_manifest(sp):
        sp.add_argument("--manifest", default=None, help="manifest path (default: <output>.manifest.json)")
        return sp

    g = with_manifest(sub.add_parser("gen-sources", help="synthesise the moving-source boundary field"))
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_sources)

    t = with_manifest(sub.add_parser("transform", help="forward transform to a coefficient grid"))
    t.add_argument("field")
    t.add_argument("--out", required=True)
    t.add_argument("--max-bytes", type=int, default=MAX_COEFF_BYTES)
    t.set_defaults(func=cmd_transform)

    d = with_manifest(sub.add_parser("diagram", help="scale-rapidity diagram and peaks"))
    d.add_argument("field")
    d.add_argument("--csv", required=True)
    d.add_argument("--pgm", required=True)
    d.add_argument("--peaks", required=True)
    d.add_argument("--apwf", default=None, help="also write the diagram as APWF/1")
    d.add_argument("--count", type=int, default=None)
    d.add_argument("--kappa-eff", type=float, default=None, help="skip calibration and use this value")
    d.set_defaults(func=cmd_diagram)

    r = with_manifest(sub.add_parser("reconstruct", help="synthesise a field slice from coefficients"))
    r.add_argument("coeffs")
    r.add_argument("--out", required=True)
    r.add_argument("--y", type=float, default=0.0)
    r.set_defaults(func=cmd_reconstruct)

    q = with_manifest(sub.add_parser("propagate", help="extend boundary data to heights y"))
    q.add_argument("field")
    q.add_argument("--y", nargs="+", required=True)
    q.add_argument("--out-dir", required=True)
    q.set_defaults(func=cmd_propagate)

    s = sub.add_parser("selfcheck", help="run the numerical self-verification suite")
    s.add_argument("--level", choices=("quick", "full"), default="quick")
    s.add_argument("--report", default=None)
    s.add_argument("--only", nargs="+", default=None)
    s.add_argument("--tamper-normalization", type=float, default=1.0,
                   help="test hook: rescale the mother after C is computed (must fail if != 1)")
    s.set_defaults(func=cmd_selfcheck)
    return p


def _threads(value):
    if value is None:
        env = os.environ.get("APWT_THREADS")
        if env is None:
            return 1
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"APWT_THREADS must be an integer, got {env!r}") from None
    if value < 1:
        raise ValueError("--threads must be >= 1")
    return value


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = ["apwt", *(sys.argv[1:] if argv is None else argv)]
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="apwt: %(levelname)s: %(message)s")
    logging.captureWarnings(True)
    try:
        args.threads = _threads(args.threads)
        doc = load_config(args.config) if args.config else None
        args.func(args, doc)
    except NumericFailure as err:
        print(f"apwt: numerical check failed: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except (apwf.APWFError, OSError) as err:
        print(f"apwt: I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except ValueError as err:
        print(f"apwt: invalid input: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
