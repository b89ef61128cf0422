import numpy as np
import pytest

from apwt import apwf
from apwt.export import read_diagram_csv, read_pgm, write_diagram_csv, write_peaks_csv, write_pgm
from apwt.field import FieldSlice
from apwt.lattice import BoundarySignal, Grid2D, forward_fourier
from apwt.transform import CoefficientGrid, Diagram
from apwt.wavelets import MotherSpec

GRID = Grid2D(6, 5, 0.25, 0.5, (-1.25, 3.0))


def _values(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_header_layout(tmp_path, rng):
    p = tmp_path / "f.apwf"
    apwf.write_signal(p, BoundarySignal(GRID, _values(rng, GRID.shape)))
    blob = p.read_bytes()
    head = blob[:64]
    assert head.endswith(b"\n") and head.split() == [b"APWF/1", b"TX", b"6", b"5", b"0.25", b"0.5",
                                                     b"-1.25", b"3.0", b"0"]
    assert len(blob) == 64 + 16 * 30


def test_signal_round_trip_is_bitwise(tmp_path, rng):
    f = BoundarySignal(GRID, _values(rng, GRID.shape))
    apwf.write_signal(tmp_path / "t.apwf", f)
    g = apwf.read_signal(tmp_path / "t.apwf")
    assert isinstance(g, BoundarySignal) and g.grid == GRID and g.values.tobytes() == f.values.tobytes()


def test_spectrum_round_trip(tmp_path, rng):
    s = forward_fourier(BoundarySignal(GRID, _values(rng, GRID.shape)))
    apwf.write_signal(tmp_path / "k.apwf", s)
    back = apwf.read_signal(tmp_path / "k.apwf")
    assert type(back) is type(s) and np.array_equal(back.values, s.values)


def test_field_slice_round_trip(tmp_path, rng):
    fs = FieldSlice(2.5, GRID, _values(rng, GRID.shape), sector=2)
    apwf.write_signal(tmp_path / "s.apwf", fs)
    back = apwf.read_signal(tmp_path / "s.apwf")
    assert back.y == 2.5 and back.sector == 2 and np.array_equal(back.values, fs.values)


def test_coefficient_round_trip(tmp_path, rng):
    m = MotherSpec(2, 4.0, 1.5, 2.0)
    cg = CoefficientGrid(m, np.array([-0.1, 0.0, 0.3]), np.array([1.0, 2.0]), GRID,
                         _values(rng, (3, 2, *GRID.shape)))
    apwf.write_coefficients(tmp_path / "c.apwf", cg)
    back = apwf.read_coefficients(tmp_path / "c.apwf")
    assert back.mother == m and back.b_grid == GRID
    assert np.array_equal(back.phi_axis, cg.phi_axis) and np.array_equal(back.a_axis, cg.a_axis)
    assert np.array_equal(back.values, cg.values)


def test_diagram_round_trip(tmp_path, rng):
    d = Diagram(np.geomspace(1, 4, 4), np.linspace(-1, 1, 7), rng.random((4, 7)))
    apwf.write_diagram(tmp_path / "d.apwf", d)
    back = apwf.read_diagram(tmp_path / "d.apwf")
    assert np.array_equal(back.values, d.values) and np.array_equal(back.a_axis, d.a_axis)
    with pytest.raises(apwf.APWFError, match="expected a coefficient grid"):
        apwf.read_coefficients(tmp_path / "d.apwf")


def test_full_precision_grid_numbers(tmp_path):
    g = Grid2D(2, 2, 0.1, 1 / 3, (np.pi, -np.e))
    apwf.write(tmp_path / "p.apwf", "TX", g, np.zeros((2, 2)))
    assert apwf.read(tmp_path / "p.apwf")[1] == g


def test_write_errors(tmp_path):
    with pytest.raises(apwf.APWFError, match="tag"):
        apwf.write(tmp_path / "x", "ZZ", GRID, np.zeros(GRID.shape))
    with pytest.raises(apwf.APWFError, match="too long"):
        apwf.write(tmp_path / "x", "TX", GRID, np.zeros(GRID.shape), ext=["y" * 70])
    with pytest.raises(apwf.APWFError, match="shape"):
        apwf.write(tmp_path / "x", "TX", GRID, np.zeros((2, 2)))
    with pytest.raises(TypeError):
        apwf.write_signal(tmp_path / "x", np.zeros(3))


def test_read_errors(tmp_path, rng):
    bad = tmp_path / "bad"
    bad.write_bytes(b"hello")
    with pytest.raises(apwf.APWFError, match="not an APWF"):
        apwf.read(bad)
    bad.write_bytes(b"APWF/1 TX six 5 1 1 0 0 0".ljust(63) + b"\n")
    with pytest.raises(apwf.APWFError, match="malformed"):
        apwf.read(bad)
    good = tmp_path / "good"
    apwf.write_signal(good, BoundarySignal(GRID, _values(rng, GRID.shape)))
    bad.write_bytes(good.read_bytes()[:-8])
    with pytest.raises(apwf.APWFError, match="payload"):
        apwf.read(bad)
    with pytest.raises(ValueError):          # APWFError is a ValueError
        apwf.read(bad)


def test_diagram_csv_round_trip(tmp_path, rng):
    d = Diagram(np.geomspace(1, 4, 3), np.linspace(-1, 1, 5), rng.random((3, 5)))
    write_diagram_csv(tmp_path / "d.csv", d)
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "a,phi,S" and len(lines) == 16
    assert float(lines[1].split(",")[0]) == float(lines[5].split(",")[0])   # a varies slowest
    back = read_diagram_csv(tmp_path / "d.csv")
    assert np.array_equal(back.values, d.values) and np.array_equal(back.phi_axis, d.phi_axis)


def test_peaks_csv(tmp_path):
    from types import SimpleNamespace as P
    write_peaks_csv(tmp_path / "p.csv", [P(a=4.0, phi=0.4, omega=1.0, v=np.tanh(0.4))])
    rows = np.loadtxt(tmp_path / "p.csv", delimiter=",", skiprows=1, ndmin=2)
    assert (tmp_path / "p.csv").read_text().startswith("a,phi,omega,v_over_c")
    assert rows.shape == (1, 4) and rows[0, 3] == np.tanh(0.4)


def test_pgm_round_trip_and_scaling(tmp_path, rng):
    v = rng.random((4, 7)) * 10 - 3
    info = write_pgm(tmp_path / "d.pgm", v)
    pix, maxval = read_pgm(tmp_path / "d.pgm")
    assert pix.shape == (4, 7) and maxval == 65535 and pix.min() == 0 and pix.max() == 65535
    recovered = info["min"] + pix / maxval * (info["max"] - info["min"])
    assert np.max(np.abs(recovered - v)) <= 0.5 / maxval * (info["max"] - info["min"]) + 1e-12
    assert (tmp_path / "d.pgm").read_bytes().startswith(b"P5\n7 4\n65535\n")


def test_pgm_constant_and_invalid(tmp_path):
    info = write_pgm(tmp_path / "c.pgm", np.full((2, 3), 5.0))
    assert info["min"] == info["max"] == 5.0 and np.all(read_pgm(tmp_path / "c.pgm")[0] == 0)
    with pytest.raises(ValueError, match="non-finite"):
        write_pgm(tmp_path / "n.pgm", np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError, match="2D"):
        write_pgm(tmp_path / "n.pgm", np.zeros(3))
