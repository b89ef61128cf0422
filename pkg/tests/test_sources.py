import json
import logging

import numpy as np
import pytest

from apwt.lattice import Grid2D, forward_fourier, sector_index
from apwt.sources import (EXPERIMENT_GROUPS, ExperimentConfig, SourceGroup, calibrate_kappa_eff, draw_rapidities,
                          experiment_field, reference_config, single_source_trace)
from apwt.wavelets import MotherSpec

SMALL = Grid2D.symmetric(64.0, 0.5)     # 257 x 257


def test_reference_configuration():
    cfg = reference_config()
    assert cfg.grid.shape == (513, 513)
    assert [(g.omega, g.phi_mean) for g in cfg.groups] == list(EXPERIMENT_GROUPS)
    assert all(g.depth == -5000 and g.speed_sigma == 0.01 for g in cfg.groups)


def test_rest_source_is_mirror_symmetric():
    f = single_source_trace(1.0, 0.0, 3.0, -5000.0, Grid2D(16, 41, 0.5, 0.5, (0.0, -7.0))).values
    # x_s = 3 sits at column 20; columns 20 +- d are mirror images
    assert np.allclose(f[:, 20 + np.arange(1, 21)], f[:, 20 - np.arange(1, 21)], rtol=1e-14, atol=0)


def test_rest_source_is_monochromatic():
    g = Grid2D(64, 8, 2 * np.pi * 8 / 64, 0.5)     # omega = 1 is bin 8
    f = single_source_trace(1.0, 0.0, 0.0, -5000.0, g)
    col = np.abs(np.fft.ifft(f.values[:, 0])) ** 2
    assert col.argmax() == 8 and col[8] / col.sum() > 1 - 1e-12


def test_moving_source_doppler_point():
    phi, omega = 0.4, 1.0
    s = forward_fourier(single_source_trace(omega, phi, 0.0, -5000.0, SMALL))
    p = np.abs(s.values)
    i, j = np.unravel_index(p.argmax(), p.shape)
    assert s.k[i] == pytest.approx(omega * np.cosh(phi), abs=SMALL.dk)
    assert s.kx[j] == pytest.approx(omega * np.sinh(phi), abs=SMALL.dkx)


def test_trace_validation():
    with pytest.raises(ValueError, match="depth"):
        single_source_trace(1.0, 0.0, 0.0, 10.0, SMALL)
    with pytest.raises(ValueError, match="near field"):
        single_source_trace(1.0, 0.0, 0.0, -5.0, SMALL)
    with pytest.raises(ValueError, match="finite"):
        single_source_trace(1.0, np.inf, 0.0, -5000.0, SMALL)


@pytest.mark.parametrize("kw,msg", [(dict(omega=0.0), "omega"), (dict(phi_mean=np.nan), "phi_mean"),
                                    (dict(n_sources=0), "n_sources"), (dict(depth=1.0), "depth"),
                                    (dict(speed_sigma=-0.1), "speed_sigma"),
                                    (dict(x_offsets=(1.0, 2.0)), "x_offsets")])
def test_group_validation(kw, msg):
    with pytest.raises(ValueError, match=msg):
        SourceGroup(**(dict(omega=1.0, phi_mean=0.3) | kw))


def test_positions():
    assert np.all(SourceGroup(1.0, 0.3).positions() == 0)
    assert np.array_equal(SourceGroup(1.0, 0.3, n_sources=3, spread=10).positions(), [-10, 0, 10])
    assert np.array_equal(SourceGroup(1.0, 0.3, n_sources=2, x_offsets=[4, 5]).positions(), [4.0, 5.0])


def test_degenerate_group_equals_single_trace():
    cfg = ExperimentConfig((SourceGroup(0.9, 0.3, speed_sigma=0.0, n_sources=1),), SMALL)
    ref = single_source_trace(0.9, 0.3, 0.0, -5000.0, SMALL)
    assert np.array_equal(experiment_field(cfg).values, ref.values)


def test_superposition():
    g1, g2 = SourceGroup(1.0, 0.4, n_sources=4, seed=1), SourceGroup(0.95, 0.5, n_sources=4, seed=2)
    both = experiment_field(ExperimentConfig((g1, g2), SMALL, seed=3)).values
    # group gi of a config draws from rng([seed, gi, group.seed]); rebuild each alone at its index
    alone1 = experiment_field(ExperimentConfig((g1,), SMALL, seed=3)).values
    pad = SourceGroup(1.0, 0.0, n_sources=1, speed_sigma=0.0)
    with_pad = experiment_field(ExperimentConfig((pad, g2), SMALL, seed=3)).values
    pad_only = experiment_field(ExperimentConfig((pad,), SMALL, seed=3)).values
    assert np.allclose(both, alone1 + (with_pad - pad_only), atol=1e-12)


def test_deterministic_and_seed_dependent():
    cfg = ExperimentConfig((SourceGroup(1.0, 0.4, n_sources=4),), SMALL, seed=5)
    a, b = experiment_field(cfg).values, experiment_field(cfg).values
    assert a.tobytes() == b.tobytes()
    c = experiment_field(ExperimentConfig(cfg.groups, SMALL, seed=6)).values
    assert not np.array_equal(a, c)


def test_speed_draws_and_rejection(caplog):
    rng = np.random.default_rng(0)
    phis, nrej = draw_rapidities(SourceGroup(1.0, 0.4, n_sources=2000), rng)
    v = np.tanh(phis)
    assert v.mean() == pytest.approx(np.tanh(0.4), abs=1e-3) and v.std() == pytest.approx(0.01, rel=0.1)
    assert nrej == 0
    fast = SourceGroup(1.0, 2.5, speed_sigma=0.05, n_sources=200)
    phis, nrej = draw_rapidities(fast, np.random.default_rng(1))
    assert nrej > 0 and np.all(np.isfinite(phis))
    with caplog.at_level(logging.WARNING, logger="apwt.sources"):
        experiment_field(ExperimentConfig((SourceGroup(1.0, 2.5, speed_sigma=0.05, n_sources=20),),
                                          Grid2D.symmetric(8.0, 0.5)))
    assert "redrew" in caplog.text


def test_config_json_round_trip():
    cfg = reference_config(seed=4)
    back = ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg
    assert json.loads(cfg.to_json())["grid"]["n_t"] == 513


def test_config_symmetric_grid_shorthand():
    d = {"grid": {"half_width": 128, "step": 0.5}, "groups": [{"omega": 1.0, "phi_mean": 0.4}]}
    assert ExperimentConfig.from_dict(d).grid == Grid2D.symmetric(128.0, 0.5)


@pytest.mark.parametrize("doc,msg", [
    ({"grid": {"half_width": 8, "step": 0.5}, "groups": []}, "groups"),
    ({"grid": {"half_width": 8, "step": 0.5}}, "groups: missing"),
    ({"groups": [{"omega": 1, "phi_mean": 0}]}, "grid: missing"),
    ({"grid": {"half_width": 8}, "groups": [{"omega": 1, "phi_mean": 0}]}, "grid"),
    ({"grid": {"half_width": 8, "step": 0.5}, "groups": [{"omega": 1, "phi_mean": 0}, {"omega": -1, "phi_mean": 0}]},
     r"groups\[1\]: omega"),
    ({"grid": {"half_width": 8, "step": 0.5}, "groups": [{"omega": 1, "phi_mean": 0, "colour": 2}]}, r"groups\[0\]"),
    ([], "object"),
])
def test_config_errors_name_the_field(doc, msg):
    with pytest.raises(ValueError, match=msg):
        ExperimentConfig.from_dict(doc)


def test_production_spectrum_in_propagating_sectors():
    cfg = reference_config()
    s = forward_fourier(experiment_field(cfg))
    k, kx = np.broadcast_arrays(*cfg.grid.dual_mesh())
    e = np.abs(s.values) ** 2
    idx = sector_index(k, kx)
    assert e[(idx == 1) | (idx == 2)].sum() > 0.99 * e.sum()


@pytest.mark.parametrize("omega,phi", EXPERIMENT_GROUPS[:3])
def test_group_spectrum_on_doppler_hyperbola(omega, phi):
    cfg = ExperimentConfig((SourceGroup(omega, phi, n_sources=8),), SMALL)
    s = forward_fourier(experiment_field(cfg))
    k, kx = np.broadcast_arrays(*SMALL.dual_mesh())
    e = np.abs(s.values) ** 2
    top = e > 0.25 * e.max()
    ck, ckx = np.average(k[top], weights=e[top]), np.average(kx[top], weights=e[top])
    assert ck == pytest.approx(omega * np.cosh(phi), abs=2 * SMALL.dk)
    assert ckx == pytest.approx(omega * np.sinh(phi), abs=2 * SMALL.dkx)


def test_frequency_calibration_close_to_kappa():
    spec = MotherSpec(1, 4.0, 2 * np.sqrt(55.0), 8.0)
    k_eff = calibrate_kappa_eff(spec, Grid2D.symmetric(128.0, 0.5))
    assert k_eff == pytest.approx(4.0, rel=0.01)
    assert k_eff == pytest.approx(3.9826, abs=5e-4)
