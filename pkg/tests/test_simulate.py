import math
from dataclasses import replace

import numpy as np
import pytest

from tensormm.exceptions import DegenerateSpectrumWarning
from tensormm.simulate import (CSV_COLUMNS, ExperimentConfig, cell_means, format_config,
                               linear_fit, load_config, mean_relative_error, parse_config,
                               read_csv, records_to_csv, run_sweep, run_trial, write_csv)

GOLDEN_HEADER = ("cell,trial,status,seed,p1,p2,p3,r1,r2,r3,sigma_max,alpha,delta,"
                 "l2inf_1,l2inf_2,l2inf_3,l2inf_max,l1_1,l1_2,l1_3,"
                 "sintheta_1,sintheta_2,sintheta_3,iterations,wall_ms,error")

TINY = ExperimentConfig(p=(12, 15), ranks=(2, 2, 2), delta=8.0, sigma_max=(0.5, 2.0),
                        alpha=(1.0,), trials=2, seed=3)


def test_default_grid():
    cfg = ExperimentConfig()
    assert cfg.p == tuple(range(100, 501, 50))
    assert cfg.sigma_max[0] == 1 and cfg.sigma_max[-1] == 96 and len(cfg.sigma_max) == 20
    assert cfg.ranks == (3, 3, 3) and cfg.delta == 10.0 and cfg.trials == 10
    assert len(cfg.cells()) == 9 * 20


def test_parse_config():
    cfg = parse_config("""
        # small sweep
        p = 20, 30
        sigma_max = 1:11:5   # inclusive range
        alpha = 0.5, 2
        trials = 3
        auto_iters = yes
    """)
    assert cfg.p == (20, 30)
    assert cfg.sigma_max == (1.0, 6.0, 11.0)
    assert cfg.alpha == (0.5, 2.0)
    assert cfg.trials == 3 and cfg.auto_iters
    assert cfg.cells()[:2] == [(20, 0.5, 1.0), (20, 0.5, 6.0)]


def test_config_roundtrip(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text(format_config(TINY))
    assert load_config(path) == TINY


@pytest.mark.parametrize("text", ["bogus = 1", "p 10", "trials = x", "auto_iters = maybe",
                                  "trials = 0"])
def test_parse_config_rejects(text):
    with pytest.raises(ValueError):
        parse_config(text)


def test_csv_header_golden():
    assert ",".join(CSV_COLUMNS) == GOLDEN_HEADER
    assert records_to_csv([]) == GOLDEN_HEADER + "\n"


def test_sweep_deterministic_and_roundtrip(tmp_path):
    a = run_sweep(TINY)
    b = run_sweep(TINY)
    assert records_to_csv(a) == records_to_csv(b)
    assert len(a) == len(TINY.cells()) * TINY.trials
    assert all(rec["status"] == "ok" for rec in a)
    assert all(rec["wall_ms"] is None for rec in a)
    path = tmp_path / "out.csv"
    write_csv(path, a)
    assert b"\r" not in path.read_bytes()
    back = read_csv(path)
    assert records_to_csv(back) == records_to_csv(a)


def test_sweep_parallel_matches_serial():
    serial = records_to_csv(run_sweep(TINY))
    parallel = records_to_csv(run_sweep(replace(TINY, n_jobs=2)))
    assert serial == parallel


def test_trial_independent_of_order():
    core = np.eye(2)[:, :, None] * np.ones((1, 1, 2)) * 8.0
    core[0, 1, 1] = 3.0
    first = run_trial(TINY, core, 3, 1)
    run_trial(TINY, core, 0, 0)
    assert run_trial(TINY, core, 3, 1) == first


def test_failed_trial_recorded():
    # zero core and zero noise: the observed tensor is identically zero
    cfg = ExperimentConfig(p=(6,), ranks=(2, 2, 2), sigma_max=(0.0,), trials=1)
    with pytest.warns(DegenerateSpectrumWarning):
        rec = run_trial(cfg, np.zeros((2, 2, 2)), 0, 0)
    assert rec["status"] == "failed" and rec["error"]
    assert rec["l2inf_max"] is None


def test_record_time():
    rec = run_sweep(replace(TINY, p=(12,), sigma_max=(1.0,), trials=1, record_time=True))[0]
    assert rec["wall_ms"] > 0


def test_cell_means_and_relative_error():
    recs = [
        {"p1": 10, "alpha": 1.0, "sigma_max": 2.0, "status": "ok", "l2inf_max": 0.2},
        {"p1": 10, "alpha": 1.0, "sigma_max": 2.0, "status": "ok", "l2inf_max": 0.4},
        {"p1": 10, "alpha": 1.0, "sigma_max": 2.0, "status": "failed", "l2inf_max": None},
        {"p1": 10, "alpha": 1.0, "sigma_max": 4.0, "status": "ok", "l2inf_max": 0.8},
    ]
    means = cell_means(recs)
    assert means[(10, 1.0, 2.0)] == (pytest.approx(0.3), 2, 1)
    assert mean_relative_error(recs, 10, 1.0) == pytest.approx((0.15 + 0.2) / 2)


def test_linear_fit():
    x = np.arange(6.0)
    a, b, r2 = linear_fit(x, 1.5 + 0.25 * x)
    assert (a, b, r2) == (pytest.approx(1.5), pytest.approx(0.25), pytest.approx(1.0))
    assert math.isclose(linear_fit(x, np.ones(6))[2], 1.0)
