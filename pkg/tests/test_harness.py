import json

import numpy as np
import pytest

from exphurst.estimators import EstimatorConfig
from exphurst.expectile import Transform
from exphurst.harness import (POPT_LABEL, ExperimentConfig, MethodSpec, Scenario,
                              table_methods, table_scenarios, run_expectile_convergence,
                              run_tables, run_variance_scaling, tables_csv)


def small_config(methods=None, replications=10, **kw):
    sc = [Scenario("standard", 0.3, n=300), Scenario("outliers", 0.7, n=300),
          Scenario("rounded", 0.7, n=300)]
    methods = methods or [MethodSpec(EstimatorConfig("E", p=0.4)),
                          MethodSpec(EstimatorConfig("ST"))]
    return ExperimentConfig(sc, methods, replications=replications, master_seed=7, **kw)


def test_table_layout():
    assert [m.label for m in table_methods()] == [
        "E(p=0.2)", "E(p=0.4)", "E(p=0.6)", "E(p=0.8)", POPT_LABEL, "MED", "TM", "ST"]
    assert len(table_scenarios(0.2)) == 6


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario("smoothed", 0.5)
    with pytest.raises(ValueError):
        Scenario("standard", 1.0)
    with pytest.raises(ValueError):
        small_config(replications=5)


def test_tables_are_deterministic():
    a, b = run_tables(small_config()), run_tables(small_config())
    assert tables_csv(a) == tables_csv(b)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())


def test_adding_a_method_keeps_existing_cells():
    base = run_tables(small_config())
    more = run_tables(small_config(methods=[MethodSpec(EstimatorConfig("E", p=0.4)),
                                            MethodSpec(EstimatorConfig("MED")),
                                            MethodSpec(EstimatorConfig("ST"))]))
    for c in base.cells:
        np.testing.assert_array_equal(c.estimates, more.cell(c.scenario, c.method).estimates)


def test_report_cells_and_summary():
    cfg = small_config()
    rep = run_tables(cfg)
    assert len(rep.cells) == len(cfg.scenarios) * len(cfg.methods)
    c = rep.cell(cfg.scenarios[0], "ST")
    assert len(c.estimates) + c.failures == 10
    assert c.sd == pytest.approx(np.std(c.estimates, ddof=1))
    assert abs(c.mean - 0.3) < 0.1
    lines = tables_csv(rep).strip().split("\n")
    assert lines[0].startswith("method,")
    assert len(lines) == 1 + len(cfg.methods)


def test_workers_do_not_change_results():
    a = run_tables(small_config())
    b = run_tables(small_config(workers=2))
    assert tables_csv(a) == tables_csv(b)


def test_popt_row_and_histogram():
    cfg = small_config(methods=[MethodSpec(EstimatorConfig("E"), popt=True)], popt_B=5,
                       popt_grid=(0.3, 0.5, 0.7))
    rep = run_tables(cfg)
    d = rep.to_dict()
    for sc in cfg.scenarios:
        assert sum(d["popt_histogram"][sc.label].values()) == 10
        assert set(d["popt_histogram"][sc.label]) <= {"0.3", "0.5", "0.7"}


def test_config_round_trip():
    raw = {
        "filter": "d4", "M": 5, "beta": 2,
        "scenarios": [{"model": "rounded", "H": 0.2, "n": 500}],
        "methods": [{"method": "E", "p": 0.2}, {"method": "E", "p": "opt"},
                    {"method": "TM", "trim": 0.1}],
        "contamination": {"outliers": {"fraction": 0.1, "snr_db": -10},
                          "rounding": {"mode": "path"}},
        "popt": {"grid": "0.1:0.9:0.2", "B": 20},
        "replications": 12, "master_seed": 3,
    }
    cfg = ExperimentConfig.from_dict(raw)
    assert [m.label for m in cfg.methods] == ["E(p=0.2)", POPT_LABEL, "TM(trim=0.1)"]
    assert cfg.rounding.mode == "path" and cfg.outliers.fraction == 0.1
    assert cfg.popt_grid == (0.1, 0.3, 0.5, 0.7, 0.9)
    again = ExperimentConfig.from_dict({**cfg.to_dict(), "workers": 1})
    assert again.digest() == cfg.digest()


@pytest.mark.parametrize("bad", [
    {"scenarios": []},
    {"scenarios": [{"model": "standard", "H": 0.5}], "bogus": 1},
    {"scenarios": [{"model": "standard", "H": 0.5}], "methods": [{"method": "ST", "p": "opt"}]},
    {"scenarios": [{"model": "standard", "H": 0.5}], "methods": [{"method": "E", "q": 1}]},
])
def test_config_errors(bad):
    with pytest.raises((ValueError, TypeError)):
        ExperimentConfig.from_dict(bad)


def test_expectile_convergence_rows():
    rows = run_expectile_convergence(0.3, [Transform("identity")], (0.2, 0.8), n=200, reps=3)
    assert len(rows) == 6
    r = rows[0]
    assert r["theoretical"] == pytest.approx(-0.5491558, abs=1e-6)  # N(0,1) expectile at 0.2


def test_variance_scaling_validation_and_shape():
    with pytest.raises(ValueError):
        run_variance_scaling(0.3, [Transform("square")], n_grid=(100, 200, 400))
    with pytest.raises(ValueError):
        run_variance_scaling(0.3, [Transform("square")], n_grid=(100, 400, 200, 800))
    rows, slopes = run_variance_scaling(0.3, [Transform("square")], (100, 200, 400, 800),
                                        reps=20)
    assert len(rows) == 4
    assert -1.6 < slopes["square"] < -0.5
