"""Plot-ready text and image outputs: diagram and peak CSV, 16-bit PGM heatmaps."""
from __future__ import annotations

import csv

import numpy as np

__all__ = ["write_diagram_csv", "read_diagram_csv", "write_peaks_csv", "write_pgm", "read_pgm"]


def write_diagram_csv(path, d):
    """Long-format CSV with columns ``a, phi, S``, ``a`` varying slowest."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "phi", "S"])
        for i, a in enumerate(d.a_axis):
            for j, phi in enumerate(d.phi_axis):
                w.writerow([repr(float(a)), repr(float(phi)), repr(float(d.values[i, j]))])


def read_diagram_csv(path):
    from .transform import Diagram
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    a_axis = np.unique(rows[:, 0])
    phi_axis = np.unique(rows[:, 1])
    if len(rows) != a_axis.size * phi_axis.size:
        raise ValueError(f"{path}: rows do not form a full (a, phi) lattice")
    return Diagram(a_axis, phi_axis, rows[:, 2].reshape(a_axis.size, phi_axis.size))


def write_peaks_csv(path, peaks):
    """Columns ``a, phi, omega, v_over_c``; ``peaks`` items need ``a, phi, omega, v``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "phi", "omega", "v_over_c"])
        for p in peaks:
            w.writerow([repr(float(p.a)), repr(float(p.phi)), repr(float(p.omega)), repr(float(p.v))])


def write_pgm(path, values, maxval=65535):
    """Binary 16-bit PGM of a real matrix with a linear min-max mapping.

    Rows of ``values`` become image rows top to bottom.  Returns the mapping
    ``{"min": ..., "max": ..., "maxval": ...}``: pixel ``p`` stands for
    ``min + p / maxval * (max - min)``.  A constant matrix maps to all zeros.
    """
    v = np.asarray(values, float)
    if v.ndim != 2:
        raise ValueError("PGM needs a 2D array")
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot map non-finite values to grey levels")
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        pix = np.rint((v - lo) / (hi - lo) * maxval)
    else:
        pix = np.zeros_like(v)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{v.shape[1]} {v.shape[0]}\n{maxval}\n".encode("ascii"))
        fh.write(pix.astype(">u2").tobytes())
    return {"min": lo, "max": hi, "maxval": maxval}


def read_pgm(path):
    """Read a binary 16-bit PGM written by :func:`write_pgm` (no comments)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    fields = blob.split(maxsplit=4)
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    data = blob[len(blob) - 2 * width * height:]
    return np.frombuffer(data, ">u2").reshape(height, width).astype(int), maxval
