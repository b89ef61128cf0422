"""APWF/1 binary array container.

Layout::

    64-byte ASCII header   "APWF/1 <tag> <n_t> <n_x> <dt> <dx> <ct0> <x0> <n_ext>"
                           space padded, last byte "\\n"
    n_ext x 64-byte ASCII  extension records, same padding
    float64 axis blocks    one per "axis <name> <n>" extension, in order
    payload                row-major little-endian complex128 (re, im pairs)

Tags: ``TX`` boundary signal f(ct, x); ``KK`` spectrum (fftfreq order on both
axes, grid fields describe the *primal* grid); ``FS`` field slice (extensions
``y <value>`` and ``sector <j>``); ``CG`` coefficient grid (extensions
``axis phi <n>``, ``axis a <n>``, ``mother <sector> <kappa> <sigma_par>
<sigma_perp>``; payload shape ``(n_phi, n_a, n_t, n_x)``); ``DG``
scale-rapidity diagram (extensions ``axis a <n>``, ``axis phi <n>``; the
grid fields are ``n_a n_phi 1.0 1.0 0.0 0.0`` and the payload is real-valued
S stored with zero imaginary part).

The header prints grid numbers with ``repr``.  When that overflows the 64
bytes, the header carries 9-significant-digit values and an ``axis _grid 4``
block holds the exact ``dt dx ct0 x0``, which :func:`read` prefers.
"""
from __future__ import annotations

import numpy as np

from .lattice import BoundarySignal, Grid2D, Spectrum

__all__ = ["write", "read", "write_signal", "read_signal", "write_coefficients", "read_coefficients",
           "write_diagram", "read_diagram", "APWFError", "TAGS"]

MAGIC = "APWF/1"
RECORD = 64
TAGS = ("TX", "KK", "FS", "CG", "DG")


class APWFError(ValueError):
    pass


def _record(text):
    raw = text.encode("ascii")
    if len(raw) > RECORD - 1:
        raise APWFError(f"header record too long ({len(raw)} > {RECORD - 1} bytes): {text!r}")
    return raw.ljust(RECORD - 1, b" ") + b"\n"


def _num(v):
    return repr(float(v))


def _head(tag, grid, nums, n_ext):
    return f"{MAGIC} {tag} {grid.n_t} {grid.n_x} {' '.join(nums)} {n_ext}"


def write(path, tag, grid, values, ext=(), axes=()):
    """Write one array.  ``ext`` are extra text records; ``axes`` is a list of
    ``(name, values)`` whose records and blocks are appended."""
    if tag not in TAGS:
        raise APWFError(f"unknown tag {tag!r}")
    nums = (grid.dt, grid.dx, grid.origin[0], grid.origin[1])
    axes = list(axes)
    head = _head(tag, grid, [_num(v) for v in nums], len(ext) + len(axes))
    if len(head) > RECORD - 1:
        axes.append(("_grid", np.array(nums, float)))
        head = _head(tag, grid, [f"{float(v):.9g}" for v in nums], len(ext) + len(axes))
    records = list(ext) + [f"axis {name} {len(vals)}" for name, vals in axes]
    data = np.ascontiguousarray(values, dtype="<c16")
    if data.shape[-2:] != grid.shape:
        raise APWFError(f"array shape {data.shape} does not end with grid shape {grid.shape}")
    with open(path, "wb") as fh:
        fh.write(_record(head))
        for r in records:
            fh.write(_record(r))
        for _, vals in axes:
            fh.write(np.ascontiguousarray(vals, dtype="<f8").tobytes())
        fh.write(data.tobytes())


def read(path):
    """Return ``(tag, grid, values, ext, axes)``; ``axes`` maps name -> array."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < RECORD or not blob.startswith(MAGIC.encode()):
        raise APWFError(f"{path}: not an APWF/1 file")
    try:
        parts = blob[:RECORD].decode("ascii").split()
        _, tag, n_t, n_x, dt, dx, ct0, x0, n_ext = parts
        grid = Grid2D(int(n_t), int(n_x), float(dt), float(dx), (float(ct0), float(x0)))
        n_ext = int(n_ext)
    except (ValueError, UnicodeDecodeError) as err:
        raise APWFError(f"{path}: malformed header ({err})") from None
    if tag not in TAGS:
        raise APWFError(f"{path}: unknown tag {tag!r}")
    pos = RECORD
    ext, axis_specs = [], []
    for _ in range(n_ext):
        rec = blob[pos:pos + RECORD].decode("ascii").strip()
        pos += RECORD
        if rec.startswith("axis "):
            _, name, n = rec.split()
            axis_specs.append((name, int(n)))
        else:
            ext.append(rec)
    axes = {}
    for name, n in axis_specs:
        axes[name] = np.frombuffer(blob, "<f8", n, pos).copy()
        pos += 8 * n
    exact = axes.pop("_grid", None)
    if exact is not None:
        grid = Grid2D(grid.n_t, grid.n_x, exact[0], exact[1], (exact[2], exact[3]))
    lead = tuple(axes[name].size for name, _ in axis_specs if name != "_grid") if tag == "CG" else ()
    shape = lead + grid.shape
    count = int(np.prod(shape))
    if len(blob) - pos != 16 * count:
        raise APWFError(f"{path}: payload has {len(blob) - pos} bytes, expected {16 * count}")
    values = np.frombuffer(blob, "<c16", count, pos).reshape(shape).astype(np.complex128)
    return tag, grid, values, ext, axes


def write_signal(path, obj):
    """Write a BoundarySignal, Spectrum or FieldSlice."""
    from .field import FieldSlice
    if isinstance(obj, FieldSlice):
        write(path, "FS", obj.grid, obj.values, ext=[f"y {_num(obj.y)}", f"sector {obj.sector}"])
    elif isinstance(obj, Spectrum):
        write(path, "KK", obj.grid, obj.values)
    elif isinstance(obj, BoundarySignal):
        write(path, "TX", obj.grid, obj.values)
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def read_signal(path):
    """Read a TX/KK/FS file back into its object."""
    from .field import FieldSlice
    tag, grid, values, ext, _ = read(path)
    if tag == "TX":
        return BoundarySignal(grid, values)
    if tag == "KK":
        return Spectrum(grid, values)
    if tag == "FS":
        meta = dict(r.split(None, 1) for r in ext)
        return FieldSlice(float(meta["y"]), grid, values, int(meta.get("sector", 0)))
    raise APWFError(f"{path}: tag {tag} is not a 2D signal")


def write_coefficients(path, coeffs):
    m = coeffs.mother
    write(path, "CG", coeffs.b_grid, coeffs.values,
          ext=[f"mother {m.sector} {_num(m.kappa)} {_num(m.sigma_par)} {_num(m.sigma_perp)}"],
          axes=[("phi", coeffs.phi_axis), ("a", coeffs.a_axis)])


def read_coefficients(path):
    from .transform import CoefficientGrid
    from .wavelets import MotherSpec
    tag, grid, values, ext, axes = read(path)
    if tag != "CG":
        raise APWFError(f"{path}: expected a coefficient grid, found {tag}")
    rec = next((r for r in ext if r.startswith("mother ")), None)
    if rec is None:
        raise APWFError(f"{path}: missing mother record")
    _, j, kappa, sp, so = rec.split()
    mother = MotherSpec(int(j), float(kappa), float(sp), float(so))
    return CoefficientGrid(mother, axes["phi"], axes["a"], grid, values)


def write_diagram(path, d):
    grid = Grid2D(len(d.a_axis), len(d.phi_axis), 1.0, 1.0, (0.0, 0.0))
    write(path, "DG", grid, np.asarray(d.values, float), axes=[("a", d.a_axis), ("phi", d.phi_axis)])


def read_diagram(path):
    from .transform import Diagram
    tag, _, values, _, axes = read(path)
    if tag != "DG":
        raise APWFError(f"{path}: expected a diagram, found {tag}")
    return Diagram(axes["a"], axes["phi"], values.real.copy())
