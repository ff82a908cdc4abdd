import json
import math

import numpy as np
import pytest

import fdamimo


def default_target(cfg):
    return fdamimo.Target(math.radians(30.0), 0.4 * cfg.r_max)


def test_defaults():
    cfg = fdamimo.RadarConfig()
    assert cfg.mn == 16
    assert cfg.r_max == pytest.approx(299792458.0 / 2e4)


def test_steering_vector_layout():
    cfg = fdamimo.RadarConfig()
    theta, r = math.radians(20.0), 5000.0
    a = fdamimo.steering_vector(cfg, theta, r)
    assert a.shape == (16,)
    assert np.allclose(np.abs(a), 1.0)
    rho = 2 * r * cfg.delta_f / cfg.c
    ft = math.sin(theta) / 2
    n, m = 2, 3
    expect = np.exp(2j * np.pi * (n * rho - (n + m) * ft))
    assert a[n * cfg.n_rx + m] == pytest.approx(expect)


def test_noiseless_stack_is_rank_one():
    cfg = fdamimo.RadarConfig()
    t = default_target(cfg)
    x = fdamimo.draw_stack(cfg, [t], fdamimo.OffsetModel(), math.inf, 5)
    assert x.shape == (16, 5)
    s = np.linalg.svd(x, compute_uv=False)
    assert s[1] / s[0] < 1e-12


def test_covariances_and_snr():
    cfg = fdamimo.RadarConfig()
    t = default_target(cfg)
    cov = fdamimo.covariance_model(cfg, t, fdamimo.OffsetModel(0.0, 0.04 * cfg.delta_f))
    cr = cov["cr"]
    assert np.count_nonzero(cr - np.diag(np.diag(cr))) == 0
    rep = fdamimo.equalized_snr(cfg, t, fdamimo.OffsetModel(0.0, 0.04 * cfg.delta_f))
    assert rep["snr_model_db"] == pytest.approx(11.01, abs=0.05)
    assert rep["scenario"] == "rx-only"


def test_estimators_recover_grid_target():
    cfg = fdamimo.RadarConfig()
    grid = fdamimo.GridSpec.uniform(20.0, 40.0, 0.5, 0.0, cfg.r_max / 300, 300)
    t = fdamimo.Target(grid.theta[20], grid.r[120])
    x = fdamimo.draw_stack(cfg, [t], fdamimo.OffsetModel(), math.inf, 4)
    for est in (fdamimo.music_2d(cfg, x, grid, 1), fdamimo.omp(cfg, x, grid, 1)):
        assert est[0]["theta"] == t.theta
        assert est[0]["r"] == t.r
    rows = fdamimo.music_rows(cfg, x, grid.theta, 1)
    assert rows[0]["theta"] == t.theta
    assert math.isnan(rows[0]["r"])


def test_crlb_scales_with_noise():
    cfg = fdamimo.RadarConfig()
    t = default_target(cfg)
    a = fdamimo.crlb(cfg, t, fdamimo.OffsetModel(), 0.1)
    b = fdamimo.crlb(cfg, t, fdamimo.OffsetModel(), 0.2)
    assert b["crlb_r"] == pytest.approx(4 * a["crlb_r"])


def test_errors_map_to_python():
    cfg = fdamimo.RadarConfig()
    with pytest.raises(ValueError):
        fdamimo.steering_vector(cfg, math.radians(95.0), 10.0)


def test_cli_roundtrip():
    code, out, err = fdamimo.run_cli(["crlb", "--pulses", "3"])
    assert code == 0, err
    doc = json.loads(out)
    assert doc["fim"]["n_pulses"] == 3
    code, _, _ = fdamimo.run_cli(["estimate", "offsets.nope=1"])
    assert code == 2
