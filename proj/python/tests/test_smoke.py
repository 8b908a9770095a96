# SPDX-License-Identifier: Apache-2.0

import math
import os

import numpy as np
import pytest

import thermident as ti

SMALL = """
scenario.building = house
scenario.season_days = 12
scenario.training_end_day = 5
scenario.windows = 3
scenario.methods = NLS, ALS
scenario.rc_architectures = R-1
optimizer.max_iters = 200
optimizer.multistart_count = 1
"""


@pytest.fixture(scope="module")
def cfg():
    return ti.parse_config(SMALL)


@pytest.fixture(scope="module")
def season(cfg):
    return ti.generate_scenario(cfg)


def test_config_hash_and_errors(cfg):
    assert cfg.building == "house"
    assert cfg.t_s == 600.0
    assert len(cfg.hash()) == 16
    assert ti.parse_config(cfg.canonical_text()).hash() == cfg.hash()
    with pytest.raises(ti.ConfigError, match="scenario.windows"):
        ti.parse_config("scenario.windows = 4\n")


def test_scenario_shapes(cfg, season):
    assert len(season) == 12 * 144
    assert isinstance(season.t_z, np.ndarray)
    assert np.all(season.p_c * season.p_h == 0)
    test = ti.test_window(cfg, season)
    train = ti.training_window(cfg, season, "NLS", "R-1", 3)
    assert len(test) == 7 * 144 and len(train) == 3 * 144


def test_dataset_round_trip(season, tmp_path):
    path = tmp_path / "d.csv"
    ti.write_dataset(season, path)
    back = ti.read_dataset(path)
    np.testing.assert_array_equal(back.t_z, season.t_z)
    assert back.t_s == season.t_s


def test_estimate_objective_at_optimum(cfg, season):
    train = ti.training_window(cfg, season, "NLS", "R-1", 3)
    res = ti.estimate("NLS", train, "R-1", max_iters=200, multistart=1)
    assert set(res["params"]) >= {"r_za", "c_z", "a_z"}
    assert math.isfinite(res["objective"])
    truth = ti.truth_params(cfg)
    assert "r_za" in truth
    worse = dict(res["params"], r_za=res["params"]["r_za"] * 1.5)
    assert ti.objective("NLS", train, "R-1", res["params"]) <= ti.objective(
        "NLS", train, "R-1", worse
    )


def test_fit_and_simulate(cfg, season):
    fit = ti.fit_cell(cfg, season, "ALS", "R-A", 5)
    assert fit.id == "ALS_R-A_5d"
    assert "alpha0" in fit.params
    rows = ti.evaluate_cell(cfg, season, fit)
    assert [r["sim_type"] for r in rows] == ["Sim1", "Sim2", "Sim3"]
    assert rows[0]["average_accuracy"] > 95
    out = ti.simulate(cfg, fit, ti.test_window(cfg, season), "Sim2")
    assert len(out["y_hat"]) == 7 * 144
    assert out["average_accuracy"] == pytest.approx(rows[1]["average_accuracy"])


def test_small_helpers():
    assert ti.degree_days(25.0) == pytest.approx((5.56, 0.0))
    assert ti.power_sample(0.0, 100.0, 0.8)["q_reactive"] == 75.0
    assert ti.power_sample(-3000.0, cop=3.0)["p_hvac"] == 1000.0
    assert ti.average_accuracy(np.array([20.0, 25.0]), np.array([20.0, 25.0])) == 100.0
    assert ti.almon_basis(1, 3, 2).shape == (3, 3)
    with pytest.raises(ti.Error):
        ti.average_accuracy(np.array([0.0]), np.array([1.0]))


def test_run_command(cfg, tmp_path):
    cfg_path = tmp_path / "s.cfg"
    cfg_path.write_text(SMALL)
    code, _, err = ti.run_command(["generate", "--config", str(cfg_path), "--out", str(tmp_path / "o")])
    assert code == 0, err
    assert (tmp_path / "o" / "dataset.csv").exists()
    code, _, err = ti.run_command(["frobnicate"])
    assert code == 2


@pytest.mark.skipif("THERMIDENT_SOURCE_DIR" not in os.environ, reason="needs source tree")
def test_shipped_configs_load():
    root = os.environ["THERMIDENT_SOURCE_DIR"]
    for name in ("house", "commercial"):
        c = ti.load_config(os.path.join(root, "configs", name + ".cfg"))
        assert c.building == name
