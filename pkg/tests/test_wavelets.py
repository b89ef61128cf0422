import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from apwt.geometry import packet_ellipse
from apwt.lattice import Grid2D, sector_index
from apwt.wavelets import (MotherSpec, WaveletPoint, admissibility_constant, admissibility_integrand,
                           closed_form_t0, family_hat, family_spectrum, mother_hat, mother_time_slice,
                           packet_window)

SPEC = MotherSpec(1, 4.0, 1.0, 2.0)
# C_1 for SPEC; cross-checked below against scipy.integrate.dblquad
C_SPEC = 0.06307010179309357


# ---------------------------------------------------------------- MotherSpec

@pytest.mark.parametrize("kw", [dict(sector=0), dict(kappa=0.0), dict(sigma_par=-1.0), dict(sigma_perp=np.nan)])
def test_motherspec_validation(kw):
    args = dict(sector=1, kappa=4.0, sigma_par=1.0, sigma_perp=1.0) | kw
    with pytest.raises(ValueError):
        MotherSpec(**args)


def test_poor_localization_warns():
    with pytest.warns(UserWarning, match="kappa\\*sigma_par"):
        MotherSpec(1, 1.0, 1.5, 1.0)
    assert MotherSpec(1, 16.0, np.sqrt(2), 1.0).quality == pytest.approx(512.0)


def test_motherspec_dict_round_trip():
    assert MotherSpec.from_dict(SPEC.to_dict()) == SPEC
    with pytest.raises(ValueError, match="unknown"):
        MotherSpec.from_dict(SPEC.to_dict() | {"width": 1})
    with pytest.raises(ValueError, match="missing"):
        MotherSpec.from_dict({"sector": 1})


def test_wavelet_point_requires_positive_scale():
    with pytest.raises(ValueError):
        WaveletPoint((0, 0), 0.0, 0.1)


# ---------------------------------------------------------------- mother spectrum

def test_peak_value_sector1():
    assert mother_hat(SPEC, (4.0, 0.0)) == pytest.approx(np.exp(-0.25), rel=1e-15)
    assert mother_hat(SPEC, (4.0, 0.0)) == pytest.approx(0.7788007830714049)


def test_finite_next_to_the_cone():
    for j in (1, 2, 3, 4):
        spec = MotherSpec(j, 4.0, 1.0, 2.0)
        for sigma in [(0.0, 6e-202), (6e-202, 0.0), (0.0, -6e-202), (-6e-202, 0.0), (1.0, 1.0 - 1e-15)]:
            assert mother_hat(spec, sigma) == 0


def test_outside_sector_is_exact_zero():
    for sigma in [(1.0, 1.0), (2.0, -2.0), (-3.0, 0.0), (0.0, 2.0), (0.0, 0.0)]:
        assert mother_hat(SPEC, sigma) == 0


def test_evanescent_peak():
    spec3 = MotherSpec(3, 4.0, 1.0, 2.0)
    assert mother_hat(spec3, (0.0, 4.0), y=1.0) == pytest.approx(np.exp(-0.25) * np.exp(-4.0), rel=1e-14)


@pytest.mark.parametrize("j", [3, 4])
def test_evanescent_rejects_negative_height(j):
    with pytest.raises(ValueError):
        mother_hat(MotherSpec(j, 4.0, 1.0, 2.0), (0.0, 4.0), y=-0.5)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0, 3))
def test_mirror_symmetries(k, kx, y):
    m1 = mother_hat(SPEC, (k, kx), y)
    assert mother_hat(MotherSpec(2, 4.0, 1.0, 2.0), (-k, kx), y) == m1
    m3 = mother_hat(MotherSpec(3, 4.0, 1.0, 2.0), (k, kx), y)
    assert mother_hat(MotherSpec(4, 4.0, 1.0, 2.0), (k, -kx), y) == m3


def test_height_enters_as_phase_in_propagating_sector():
    k, kx = 4.2, 1.1
    ky = np.sqrt(k * k - kx * kx)
    assert mother_hat(SPEC, (k, kx), 2.0) == pytest.approx(mother_hat(SPEC, (k, kx)) * np.exp(2j * ky), rel=1e-14)


# ---------------------------------------------------------------- family

def test_identity_member_is_mother(grid64):
    k, kx = grid64.dual_mesh()
    assert np.array_equal(family_hat(SPEC, WaveletPoint(), (k, kx)), mother_hat(SPEC, (k, kx)) * 1.0)


@given(st.floats(-20, 20), st.floats(-20, 20))
def test_shift_is_a_pure_phase(tau, bx):
    k, kx = 4.3, -0.7
    base = family_hat(SPEC, WaveletPoint((0, 0), 1.3, 0.2), (k, kx))
    moved = family_hat(SPEC, WaveletPoint((tau, bx), 1.3, 0.2), (k, kx))
    assert moved == pytest.approx(base * np.exp(1j * (k * tau - kx * bx)), rel=1e-12)


def test_support_center_is_boosted_kappa_over_a():
    g = Grid2D(512, 512, 0.1, 0.1)
    psi = np.abs(family_spectrum(SPEC, g, 0.5, 0.3))
    i, j = np.unravel_index(psi.argmax(), psi.shape)
    assert g.k[i] == pytest.approx(8 * np.cosh(0.3), abs=g.dk)
    assert g.kx[j] == pytest.approx(8 * np.sinh(0.3), abs=g.dkx)


@given(st.floats(0.2, 5), st.floats(-2, 2), st.sampled_from([1, 2, 3, 4]))
def test_sector_confinement(a, phi, j):
    g = Grid2D(32, 32, 0.4, 0.4)
    spec = MotherSpec(j, 4.0, 1.0, 2.0)
    k, kx = np.broadcast_arrays(*g.dual_mesh())
    psi = family_hat(spec, WaveletPoint((1.0, -2.0), a, phi), (k, kx))
    assert not np.any(psi[sector_index(k, kx) != j])


@pytest.mark.parametrize("a,phi", [(1.0, 0.0), (0.8, 0.4), (1.4, -0.5), (1.1, 0.25)])
def test_family_is_isometric(a, phi):
    g = Grid2D(256, 256, 0.2, 0.2)
    ref = np.sum(np.abs(family_spectrum(SPEC, g, 1.0, 0.0)) ** 2)
    got = np.sum(np.abs(family_spectrum(SPEC, g, a, phi, b=(3.0, -1.0))) ** 2)
    assert got == pytest.approx(ref, rel=0.01)


# ---------------------------------------------------------------- admissibility

def test_admissibility_matches_dblquad():
    r_hi = SPEC.kappa + 12.0 / SPEC.sigma_par
    ref, err = integrate.dblquad(lambda phi, rho: float(admissibility_integrand(SPEC, rho, phi)),
                                 1e-3, r_hi, -6.0, 6.0, epsabs=1e-13, epsrel=1e-11)
    C = admissibility_constant(SPEC)
    assert C.converged and C.value > 0
    assert C.value == pytest.approx(ref, rel=1e-9)
    assert C.value == pytest.approx(C_SPEC, rel=1e-12)


def test_admissibility_matches_cartesian_sum():
    """The defining integral of the constant taken literally: sum |psi|^2 / |k^2-kx^2| over a fine (k, kx) grid."""
    g = Grid2D(1024, 1024, 0.2, 0.2)
    k, kx = g.dual_mesh()
    m = np.abs(mother_hat(SPEC, (k, kx))) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.where(m > 0, m / np.abs(k * k - kx * kx), 0.0)
    assert np.sum(dens) * g.dual_cell == pytest.approx(C_SPEC, rel=2e-3)


def test_admissibility_same_in_all_sectors():
    values = [admissibility_constant(MotherSpec(j, 4.0, 1.0, 2.0)).value for j in (1, 2, 3, 4)]
    assert values == pytest.approx([C_SPEC] * 4, rel=1e-10)


def test_admissibility_stable_under_mesh_doubling():
    one = admissibility_constant(SPEC, n_rho=65, n_phi=65, max_doublings=1, rtol=1.0)
    assert one.quadrature_error < 5e-4 * one.value
    assert one.value == pytest.approx(C_SPEC, rel=5e-4)
    with pytest.raises(ValueError):
        admissibility_constant(SPEC, max_doublings=0)


def test_dropping_the_regularizer_diverges_at_the_cone():
    """Without exp(-1/ky) the integral grows without bound as the lower radius
    cut-off approaches the light cone; with it the value saturates."""
    def partial(rho_min, regularized):
        rho = np.geomspace(rho_min, 20.0, 4000)
        phi = np.linspace(-40, 40, 8001)
        with np.errstate(over="ignore", under="ignore"):
            v = admissibility_integrand(SPEC, rho[:, None], phi[None, :], regularized=regularized)
        return np.trapezoid(np.trapezoid(v, phi, axis=1), rho)

    cuts = [1e-3, 1e-4, 1e-5]
    raw = [partial(r, False) for r in cuts]
    reg = [partial(r, True) for r in cuts]
    assert raw[1] > 5 * raw[0] and raw[2] > 5 * raw[1]
    assert reg[2] == pytest.approx(reg[1], rel=1e-5)
    assert reg[2] == pytest.approx(C_SPEC, rel=1e-3)


# ---------------------------------------------------------------- coordinate domain

KIN = MotherSpec(1, 16.0, np.sqrt(2), np.sqrt(2))
WINDOW = packet_window(256, 128, 0.125, 0.125, y0=-12.0)


def test_t0_slice_is_closed_form_times_regularizer_factor():
    got = mother_time_slice(KIN, 0.0, WINDOW)
    ref = closed_form_t0(KIN, WINDOW)
    raw = np.linalg.norm(got - ref) / np.linalg.norm(ref)
    # the regulariser contributes a near-constant factor exp(-1/ky) ~ exp(-1/kappa)
    scaled = np.linalg.norm(got - ref * np.exp(-1 / KIN.kappa)) / np.linalg.norm(ref)
    assert scaled < 0.03
    assert raw == pytest.approx(1 - np.exp(-1 / KIN.kappa), abs=0.005)


def test_packet_moves_along_y_with_speed_c():
    y = WINDOW.ct[:, None]
    cents = []
    for ct in (0.0, 2.5, 7.5):
        e = np.abs(mother_time_slice(KIN, ct, WINDOW)) ** 2
        cents.append(np.sum(y * e) / np.sum(e))
    assert cents[2] - cents[0] == pytest.approx(7.5, rel=0.05)
    assert cents[1] - cents[0] == pytest.approx(2.5, rel=0.05)


def test_slice_norm_conserved():
    n = [np.linalg.norm(mother_time_slice(KIN, ct, WINDOW)) for ct in (0.0, 3.0, 7.5)]
    assert n == pytest.approx([n[0]] * 3, rel=1e-6)


def test_time_reversed_sector():
    s1 = mother_time_slice(KIN, 2.0, WINDOW)
    s2 = mother_time_slice(MotherSpec(2, 16.0, np.sqrt(2), np.sqrt(2)), -2.0, WINDOW)
    assert np.allclose(s1, s2, atol=1e-12 * np.abs(s1).max())


def test_small_window_warns():
    with pytest.warns(UserWarning, match="border"):
        mother_time_slice(KIN, 0.0, packet_window(32, 16, 0.125, 0.125))


def test_evanescent_slice_decays_in_y():
    spec = MotherSpec(3, 2.0, 2.0, 2.0)
    win = packet_window(24, 96, 0.25, 0.5, y0=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s = mother_time_slice(spec, 0.0, win)
    rows = np.linalg.norm(s, axis=1)
    assert np.all(np.diff(rows) < 0)
    with pytest.raises(ValueError):
        mother_time_slice(spec, 0.0, packet_window(24, 96, 0.25, 0.5))


def test_sector4_slice_is_x_mirror_of_sector3():
    win = packet_window(8, 64, 0.25, 0.5, y0=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s3 = mother_time_slice(MotherSpec(3, 2.0, 2.0, 2.0), 0.5, win)
        s4 = mother_time_slice(MotherSpec(4, 2.0, 2.0, 2.0), 0.5, win)
    assert np.allclose(s4, s3[:, ::-1], atol=1e-13 * np.abs(s3).max())


def _member_slice_t0(spec, a, phi, win):
    """Psi_mu(ct=0, x, y) by an inverse FFT over (kx, ky), independent of the
    library's slice routine: d(omega/c) = (ky/k) dky with omega/c = |(kx, ky)|."""
    ny, nx = win.shape
    ky = 2 * np.pi * np.fft.fftfreq(ny, win.dt)[:, None]
    kx = 2 * np.pi * np.fft.fftfreq(nx, win.dx)[None, :]
    pos = ky > 0
    k = np.sqrt(kx * kx + ky * ky)
    psi = np.where(pos, family_hat(spec, WaveletPoint((0, 0), a, phi), (k, kx)) * ky / np.where(pos, k, 1), 0)
    psi = psi * np.exp(1j * (ky * win.origin[0] + kx * win.origin[1]))
    return np.fft.ifft2(psi) / win.cell


@pytest.mark.parametrize("phi", [0.5, -0.7])
def test_boosted_packet_ellipse_orientation(phi):
    spec = MotherSpec(1, 16.0, 1.5, 3.0)
    win = packet_window(256, 256, 0.125, 0.125)
    e2 = np.abs(_member_slice_t0(spec, 1.0, phi, win)) ** 2
    y, x = win.mesh()
    w = e2 / e2.sum()
    mx, my = np.sum(w * x), np.sum(w * y)
    cov = np.array([[np.sum(w * (x - mx) ** 2), np.sum(w * (x - mx) * (y - my))],
                    [np.sum(w * (x - mx) * (y - my)), np.sum(w * (y - my) ** 2)]])
    _, vecs = np.linalg.eigh(cov)
    short = vecs[:, 0]   # narrowest direction <-> largest form eigenvalue
    # the member with rapidity phi is the rest packet seen with ct' = -sinh(phi) x
    ell = packet_ellipse(1 / spec.sigma_perp, 1 / spec.sigma_par, -phi)
    angle = np.degrees(np.arccos(min(1.0, abs(np.dot(short, ell.axis1)))))
    assert angle < 10
