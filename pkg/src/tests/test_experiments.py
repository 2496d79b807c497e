import json
import math

import numpy as np
import pandas as pd
import pytest

from eup_bell import experiments
from eup_bell.errors import ConfigurationError, DomainError, ScenarioValidationError
from eup_bell.experiments import (
    Scenario,
    ScenarioKind,
    SweepAxis,
    build_settings,
    build_state,
    load_scenario,
    run_scenario,
    scenario_from_dict,
    sweep_points,
    validate,
    with_overrides,
    write_table,
)
from eup_bell.quantum.bell import TSIRELSON


def _chsh(**changes) -> dict:
    document = {
        "kind": "chsh",
        "model": {"alpha_tilde": 0.0},
        "factor_method": "analytic",
        "packets": {
            "a": {"center": [0.0, 0.0, 0.0], "width": 0.5},
            "b": {"center": [0.0, 0.0, 0.0], "width": 0.5},
        },
        "state": {"bell": "psi-"},
        "settings": "standard",
    }
    document.update(changes)
    return document


def test_sweep_axis_counts_intervals():
    assert len(SweepAxis("separation", 0.0, 30.0, 30).values()) == 31
    assert SweepAxis("separation", 2.5, 30.0, 0).values().tolist() == [2.5]


def test_sweep_points_are_a_cartesian_product():
    s = scenario_from_dict(
        _chsh(
            sweep=[
                {"parameter": "separation", "start": 0.0, "stop": 2.0, "steps": 2},
                {"parameter": "alpha_tilde", "start": 0.0, "stop": 1e-3, "steps": 1},
            ]
        )
    )
    points = sweep_points(s)
    assert len(points) == 6
    assert points[0] == {"separation": 0.0, "alpha_tilde": 0.0}
    assert points[1] == {"separation": 0.0, "alpha_tilde": 1e-3}
    assert sweep_points(Scenario(ScenarioKind.THRESHOLD)) == [{}]


def test_scenario_at_point():
    s = scenario_from_dict(_chsh())
    moved = s.at({"separation": 3.0, "width": 0.7})
    assert moved.packet_b.center == (3.0, 0.0, 0.0)
    assert moved.packet_a.center == (0.0, 0.0, 0.0)
    assert moved.packet_a.width == moved.packet_b.width == 0.7
    assert s.packet_b.center == (0.0, 0.0, 0.0)


def test_si_model_parameters():
    s = scenario_from_dict(
        {"kind": "threshold", "model": {"alpha_per_m2": -1.0e-52, "length_scale_m": 1.0e25}}
    )
    assert s.alpha_tilde == pytest.approx(-1.0e-2)
    assert s.model().alpha == pytest.approx(-1.0e-2)


def test_yaml_numbers_are_coerced(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text(
        "kind: threshold\n"
        "seed: 3\n"
        "model:\n"
        "  alpha_tilde: -1e-3\n"
        "  length_scale_m: 2e5\n"
    )
    s = load_scenario(str(path))
    assert s.alpha_tilde == pytest.approx(-1.0e-3)
    assert s.length_scale_m == pytest.approx(2.0e5)
    assert s.seed == 3


def test_load_scenario_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_scenario(str(tmp_path / "missing.json"))


def test_load_scenario_rejects_non_mapping(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- chsh\n- threshold\n")
    with pytest.raises(ConfigurationError, match="not a mapping"):
        load_scenario(str(path))


def test_malformed_fields_are_collected():
    with pytest.raises(ScenarioValidationError) as info:
        scenario_from_dict(
            {
                "kind": "chsh",
                "seed": "seven",
                "model": {"alpha_tilde": "small"},
                "grid": {"points_per_axis": 3.5},
            }
        )
    assert len(info.value.problems) == 3


def test_kind_must_match_command():
    with pytest.raises(ScenarioValidationError, match="cannot run as chsh"):
        scenario_from_dict({"kind": "threshold"}, ScenarioKind.CHSH)
    s = scenario_from_dict({"model": {"alpha_tilde": 1e-3}}, ScenarioKind.THRESHOLD)
    assert s.kind is ScenarioKind.THRESHOLD


def test_both_alpha_forms_rejected():
    with pytest.raises(ScenarioValidationError, match="both"):
        scenario_from_dict(
            {"kind": "threshold", "model": {"alpha_tilde": 1e-3, "alpha_per_m2": 1e-52}}
        )


def test_overrides_take_precedence():
    s = with_overrides(scenario_from_dict(_chsh(seed=4)), seed=9, out="x.csv", fmt="json")
    assert (s.seed, s.output_path, s.output_format) == (9, "x.csv", "json")
    assert with_overrides(s).seed == 9


def test_state_descriptors():
    assert build_state("phi+").purity == pytest.approx(1.0)
    mixed = build_state({"weights": [0.25, 0.25, 0.25, 0.25]})
    assert mixed.purity == pytest.approx(0.25)
    product = build_state({"product": {"a": [0, 0, 1], "b": [1, 0, 0]}})
    assert np.allclose(product.correlation_matrix, [[0, 0, 0], [0, 0, 0], [1, 0, 0]])
    first = build_state({"random": {"rank": 2}}, seed=5)
    again = build_state({"random": {"rank": 2}}, seed=5)
    assert np.array_equal(first.rho, again.rho)
    with pytest.raises(ConfigurationError):
        build_state({"werner": 0.5})


def test_settings_descriptors():
    custom = build_settings(
        {"a": [0, 0, 2], "a_prime": [1, 0, 0], "b": [0, 1, 0], "b_prime": [1, 1, 0]}
    )
    assert custom.a == pytest.approx((0.0, 0.0, 1.0))
    with pytest.raises(ConfigurationError):
        build_settings({"a": [0, 0, 1]})
    with pytest.raises(ConfigurationError):
        build_settings(
            {"a": [0, 0, 0], "a_prime": [1, 0, 0], "b": [0, 1, 0], "b_prime": [1, 0, 0]}
        )


def test_unknown_sweep_parameter():
    s = scenario_from_dict(
        _chsh(sweep=[{"parameter": "mass", "start": 0.0, "stop": 1.0, "steps": 1}])
    )
    with pytest.raises(ScenarioValidationError, match="mass"):
        validate(s)


def test_validation_lists_every_problem():
    s = scenario_from_dict(_chsh(output={"format": "xml"}, workers=0))
    with pytest.raises(ScenarioValidationError) as info:
        validate(s)
    assert len(info.value.problems) == 2


def test_validation_reports_each_bad_point():
    s = scenario_from_dict(
        _chsh(
            factor_method="quadrature",
            grid={"dims": 3, "points_per_axis": 32, "extent": 18.0},
            packets={
                "a": {"center": [0.0, 0.0, 0.0], "width": 0.9},
                "b": {"center": [0.0, 0.0, 0.0], "width": 0.9},
            },
            sweep=[{"parameter": "separation", "start": 0.0, "stop": 4.0, "steps": 2}],
        )
    )
    with pytest.raises(ScenarioValidationError) as info:
        run_scenario(s)
    assert len(info.value.problems) == 2
    assert all("truncation guard" in p for p in info.value.problems)


def test_analytic_factor_guard():
    s = scenario_from_dict(
        _chsh(
            model={"alpha_tilde": -1e-2},
            packets={
                "a": {"center": [0.0, 0.0, 0.0], "width": 0.5},
                "b": {"center": [20.0, 0.0, 0.0], "width": 0.5},
            },
        )
    )
    with pytest.raises(ScenarioValidationError, match="packet b"):
        validate(s)


def test_singlet_reaches_tsirelson():
    table = run_scenario(scenario_from_dict(_chsh()))
    assert table.passed
    assert len(table.frame) == 1
    row = table.frame.iloc[0]
    assert row["s_value"] == pytest.approx(TSIRELSON, abs=1e-12)
    assert row["s_closed_form"] == pytest.approx(TSIRELSON, abs=1e-12)
    assert bool(row["violates_chsh"])
    assert row["error"] == ""


def test_explicit_factors():
    s = _chsh(factor_method="explicit", factors={"g_a": 0.9, "g_b": 0.8})
    table = run_scenario(scenario_from_dict(s))
    assert table.passed
    row = table.frame.iloc[0]
    assert row["factor_method"] == "explicit"
    assert row["s_value"] == pytest.approx(TSIRELSON * 0.72)
    assert math.isnan(row["x2_a"])
    assert math.isnan(row["s_perturbative"])


def test_explicit_factors_must_be_positive():
    with pytest.raises(ScenarioValidationError, match="factors"):
        validate(
            scenario_from_dict(_chsh(factor_method="explicit", factors={"g_a": 0.0, "g_b": 1.0}))
        )


def test_crossing_sweep():
    s = scenario_from_dict(
        _chsh(
            model={"alpha_tilde": -1e-3},
            sweep=[{"parameter": "separation", "start": 0.0, "stop": 30.0, "steps": 30}],
        )
    )
    table = run_scenario(s)
    assert table.passed
    values = table.frame["s_value"].to_numpy()
    assert len(values) == 31
    assert np.all(np.diff(values) < 0.0)
    violating = table.frame["violates_chsh"].to_numpy(dtype=bool)
    crossings = np.flatnonzero(violating[:-1] & ~violating[1:])
    assert len(crossings) == 1
    d = table.frame["center_b_x"].to_numpy()
    assert 16.0 <= d[crossings[0]] < d[crossings[0] + 1] <= 18.0


def test_quadrature_weights_on_grid():
    s = scenario_from_dict(
        _chsh(
            model={"alpha_tilde": -1e-3},
            factor_method="quadrature",
            grid={"dims": 3, "points_per_axis": 32, "extent": 18.0},
            state={"weights": [0.1, 0.1, 0.7, 0.1]},
            sweep=[{"parameter": "separation", "start": 0.0, "stop": 4.0, "steps": 4}],
            workers=2,
        )
    )
    table = run_scenario(s)
    assert table.passed
    assert table.frame["center_b_x"].tolist() == [0.0, 1.0, 2.0, 3.0, 4.0]
    undeformed = table.frame["s_undeformed"].to_numpy()
    assert undeformed == pytest.approx(TSIRELSON * 0.6)
    assert np.all(table.frame["s_value"].to_numpy() < undeformed)


def test_failing_point_becomes_error_row(monkeypatch):
    evaluate = experiments._evaluate_chsh

    def flaky(s):
        if s.packet_b.center[0] == 1.0:
            raise DomainError("positional factor is not positive")
        return evaluate(s)

    monkeypatch.setattr(experiments, "_evaluate_chsh", flaky)
    s = scenario_from_dict(
        _chsh(sweep=[{"parameter": "separation", "start": 0.0, "stop": 2.0, "steps": 2}])
    )
    table = run_scenario(s)
    assert not table.passed
    errors = table.frame["error"].tolist()
    assert errors[0] == errors[2] == ""
    assert errors[1].startswith("DomainError")
    assert math.isnan(table.frame["s_value"].iloc[1])


def test_threshold_si():
    s = scenario_from_dict(
        {"kind": "threshold", "model": {"alpha_per_m2": -1.0e-52, "length_scale_m": 1.0e25}}
    )
    table = run_scenario(s)
    assert table.passed
    row = table.frame.iloc[0]
    assert row["status"] == "threshold"
    assert row["distance_m"] == pytest.approx(5.412e25, rel=1e-3)
    assert row["s_at_threshold"] == pytest.approx(2.0, abs=1e-12)
    assert row["scale_kind"] == "maximal_length"


def test_threshold_positive_alpha():
    table = run_scenario(scenario_from_dict({"kind": "threshold", "model": {"alpha_tilde": 1e-3}}))
    assert table.passed
    row = table.frame.iloc[0]
    assert row["status"] == "no-threshold"
    assert math.isnan(row["distance"])


def test_uncertainty_sweep():
    s = scenario_from_dict(
        {
            "kind": "uncertainty-sweep",
            "grid": {"dims": 3, "points_per_axis": 32, "extent": 18.0},
            "packets": {"a": {"center": [0.0, 0.0, 0.0], "width": 0.9}},
            "sweep": [{"parameter": "alpha_tilde", "start": -1e-3, "stop": 1e-3, "steps": 2}],
        }
    )
    table = run_scenario(s)
    assert table.passed
    frame = table.frame
    assert frame["gap_checked"].tolist() == [False, True, True]
    assert frame["uncertainty_gap"].iloc[1] == pytest.approx(0.0, abs=1e-8)
    assert frame["uncertainty_gap"].iloc[2] == pytest.approx(1e-3 * 0.81, rel=0.05)
    assert (frame["xp_residual"] <= 1e-6).all()


def test_optimize_random_states():
    s = scenario_from_dict(
        {
            "kind": "optimize",
            "seed": 7,
            "model": {"alpha_tilde": -1e-3},
            "factor_method": "analytic",
            "packets": {
                "a": {"center": [0.0, 0.0, 0.0], "width": 0.5},
                "b": {"center": [5.0, 0.0, 0.0], "width": 0.5},
            },
            "states": 2,
            "optimizer": {"restarts": 16},
        }
    )
    table = run_scenario(s)
    assert table.passed
    assert table.frame["state_index"].tolist() == [0, 1]
    assert (table.frame["s_optimized"] >= table.frame["s_standard"] - 1e-9).all()


def test_algebra_run():
    table = run_scenario(Scenario(ScenarioKind.VERIFY_ALGEBRA, alpha_tilde=1e-3))
    assert table.passed
    assert table.frame.columns[:2].tolist() == ["kind", "seed"]
    document = json.loads(table.to_json())
    assert document["kind"] == "verify-algebra"
    assert document["field"] == [0.0, 0.0, 1.0]


def test_csv_is_reproducible():
    s = scenario_from_dict(
        _chsh(
            model={"alpha_tilde": -1e-3},
            sweep=[{"parameter": "separation", "start": 0.0, "stop": 10.0, "steps": 5}],
            workers=3,
        )
    )
    first = run_scenario(s).to_csv()
    assert first == run_scenario(s).to_csv()
    header = first.splitlines()[0].split(",")
    assert header[:2] == ["kind", "seed"]
    assert header[-1] == "error"


def test_json_table():
    table = run_scenario(scenario_from_dict(_chsh(seed=11)))
    document = json.loads(table.render("json"))
    assert document["kind"] == "chsh"
    assert document["seed"] == 11
    assert document["passed"] is True
    assert document["rows"][0]["s_value"] == pytest.approx(TSIRELSON)


def test_write_table(tmp_path, capsys):
    table = run_scenario(scenario_from_dict(_chsh()))
    path = tmp_path / "out.csv"
    write_table(table, str(path))
    frame = pd.read_csv(path, keep_default_na=False)
    assert frame["s_value"].iloc[0] == pytest.approx(TSIRELSON)
    write_table(table)
    assert capsys.readouterr().out == table.to_csv()
