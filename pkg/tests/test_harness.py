"""Scenario registry, scenario-file ingestion, suite runner, report
determinism, and the command-line wrapper."""
import dataclasses
import json

import numpy as np
import pytest

from cym.cli import main as cli_main
from cym.forms import (SamplePlan, exterior_derivative, increasing_indices,
                       zero_form)
from cym.harness import (SCENARIO_NAMES, SUITES, ScenarioError,
                         algebra_kernel_residuals, bpst_central_form,
                         bpst_potential, builtin_scenario, load_scenario,
                         run_suite, save_scenario, scenario_from_dict,
                         scenario_to_dict, suite_names)
from cym.lgb import generalized_mc_residual

QUICK = SamplePlan(count=4, seed=7)


def scenario_blob():
    """Minimal valid scenario dict on a flat abelian 2-chart."""
    return {
        "name": "fixture",
        "algebra": "u1",
        "chart": {"dim": 2, "half": 1.0},
        "forms": {
            "omega": {"degree": 1,
                      "terms": {"0": [{"coeffs": [0.2], "exponents": [0, 1]}]}},
            "zeta": "curvature-of-omega",
            "A": {"degree": 1,
                  "terms": {"1": [{"coeffs": [0.5], "exponents": [1, 0]}]}},
        },
    }


# ---------------------------------------------------------------------------
# built-in scenarios
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", SCENARIO_NAMES)
def test_builtin_scenarios_construct_and_gate(name):
    bundle = builtin_scenario(name)
    assert bundle.name == name
    report = bundle.scenario.compatibility()
    assert report.passed
    assert "identity" in bundle.sections
    assert "identity" in bundle.automorphisms


def test_unknown_builtin_rejected():
    with pytest.raises(ScenarioError, match="unknown built-in scenario"):
        builtin_scenario("moebius")


def test_instanton_potential_closed_form_curvature():
    # the bundled central 2-form must equal the curvature of the potential
    from cym.connection import potential_curvature
    bundle = builtin_scenario("bpst")
    direct = potential_curvature(bundle.algebra, bundle.omega)
    rng = np.random.default_rng(11)
    for _ in range(10):
        x = rng.uniform(-1.9, 1.9, size=4)
        for idx in increasing_indices(4, 2):
            assert np.abs(direct.components(x, idx)
                          - bundle.zeta.components(x, idx)).max() < 1e-12


def test_instanton_forms_analytic_derivative_matches_stencil():
    om, ze = bpst_potential(), bpst_central_form()
    x = np.array([0.3, -0.7, 0.4, 0.1])
    h = 1e-6

    def part(f, ax, comp_idx):
        e = np.zeros(4)
        e[ax] = h
        return (f.components(x + e, comp_idx)
                - f.components(x - e, comp_idx)) / (2 * h)

    for mu, nu in increasing_indices(4, 2):
        fd = part(om, mu, (nu,)) - part(om, nu, (mu,))
        assert np.abs(om.analytic_d(x, (mu, nu)) - fd).max() < 1e-8
    for i, j, k in increasing_indices(4, 3):
        fd = part(ze, i, (j, k)) - part(ze, j, (i, k)) + part(ze, k, (i, j))
        assert np.abs(ze.analytic_d(x, (i, j, k)) - fd).max() < 1e-8


def test_instanton_central_form_at_origin():
    ze = bpst_central_form()
    x = np.zeros(4)
    assert np.array_equal(ze.components(x, (0, 1)), [4.0, 0.0, 0.0])
    assert np.array_equal(ze.components(x, (2, 3)), [-4.0, 0.0, 0.0])
    assert np.array_equal(ze.components(x, (1, 3)), [0.0, 4.0, 0.0])
    assert np.array_equal(ze.components(x, (1, 2)), [0.0, 0.0, -4.0])


def test_wrong_central_form_violates_curvature_identity_at_origin():
    bundle = builtin_scenario("bpst")
    plan = SamplePlan(count=1, seed=0)
    plan.points = lambda chart: np.zeros((1, 4))
    wrong = zero_form(4, 2, "algebra", (3,), box=bundle.chart.box)
    assert generalized_mc_residual(bundle.lgb, wrong, plan) > 0.1
    assert generalized_mc_residual(bundle.lgb, bundle.zeta, plan) < 1e-8


def test_zero_central_form_override_fails_the_suite():
    bundle = builtin_scenario("bpst")
    wrong = zero_form(4, 2, "algebra", (3,), box=bundle.chart.box)
    bundle = dataclasses.replace(
        bundle, scenario=dataclasses.replace(bundle.scenario, zeta=wrong))
    report = run_suite(bundle, "generalized-mc")
    assert not report.passed
    rows = {c.check: c for s in report.suites for c in s.checks}
    assert rows["total-space"].residual > 0.1


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------

def test_curvature_directive_builds_zeta_from_omega():
    bundle = scenario_from_dict(scenario_blob())
    # omega = 0.2 x1 dx0  =>  d omega = -0.2 dx0^dx1 on an abelian fibre
    got = bundle.zeta.components(np.array([0.3, 0.4]), (0, 1))
    assert got == pytest.approx([-0.2], abs=1e-15)


def test_round_trip_preserves_residuals(tmp_path):
    bundle = builtin_scenario("flat-su2")
    path = tmp_path / "flat.json"
    save_scenario(bundle, path)
    reloaded = load_scenario(path)
    a = run_suite(bundle, "darboux", plan=QUICK)
    b = run_suite(reloaded, "darboux", plan=QUICK)
    assert a.to_json() == b.to_json()


@pytest.mark.parametrize("name", ["abelian-u1", "preclassical-u1su2",
                                  "random-curved"])
def test_round_trip_other_builtins(tmp_path, name):
    bundle = builtin_scenario(name)
    path = tmp_path / "s.json"
    save_scenario(bundle, path)
    reloaded = load_scenario(path)
    a = run_suite(bundle, "compatibility", plan=QUICK)
    b = run_suite(reloaded, "compatibility", plan=QUICK)
    assert a.to_json() == b.to_json()


def test_instanton_scenario_is_not_serializable(tmp_path):
    with pytest.raises(ScenarioError, match="only polynomial forms"):
        save_scenario(builtin_scenario("bpst"), tmp_path / "x.json")


def test_jacobi_violation_rejected_naming_triple():
    blob = scenario_blob()
    sc = np.zeros((3, 3, 3))
    sc[0, 1, 2] = 1.0
    sc[1, 0, 2] = -1.0
    sc[1, 2, 0] = 1.0
    sc[2, 1, 0] = -1.0
    sc[2, 0, 1] = 1.0
    sc[0, 2, 1] = -1.0
    sc[0, 1, 0] = 0.7     # breaks the cyclic identity
    sc[1, 0, 0] = -0.7
    blob["algebra"] = {
        "dim": 3, "basis_labels": ["a", "b", "c"],
        "structure_constants": sc.tolist(),
        "rep_matrices": np.zeros((3, 3, 3, 2)).tolist(),
        "kappa": np.eye(3).tolist(),
        "variety_blocks": [[0, 1, 2]],
    }
    with pytest.raises(ScenarioError, match=r"Jacobi.*\(0, 1, 2\)"):
        scenario_from_dict(blob)


@pytest.mark.parametrize("mutate, message", [
    (lambda d: d.pop("name"), "name: missing"),
    (lambda d: d["forms"].pop("omega"), "forms.omega: missing"),
    (lambda d: d["forms"].pop("zeta"), "forms.zeta: missing"),
    (lambda d: d["forms"].pop("A"), "forms.A: missing"),
    (lambda d: d["forms"].__setitem__(
        "A", {"degree": 1, "terms": {"5": [{"coeffs": [0.5],
                                            "exponents": [1, 0]}]}}),
     r"forms.A: index \(5,\)"),
    (lambda d: d["forms"].__setitem__(
        "A", {"degree": 1, "terms": {"0": [{"coeffs": [0.5, 0.1],
                                            "exponents": [1, 0]}]}}),
     "does not match the algebra dimension"),
    (lambda d: d["forms"].__setitem__("zeta", {"degree": 1, "terms": {}}),
     "expected a degree-2 form"),
    (lambda d: d.__setitem__("chart", {"dim": 2, "half": 1.0,
                                       "metric": "hyperbolic"}),
     "chart.metric: unknown metric"),
    (lambda d: d.__setitem__("chart", {"dim": 2, "half": -1.0}),
     "chart.half: must be positive"),
    (lambda d: d.__setitem__("chart", {"dim": 3, "half": 1.0,
                                       "metric": "round-s4"}),
     "needs dim 4"),
    (lambda d: d.__setitem__("sections", {"s": {"nope": 1}}),
     "sections.s: needs an 'exp_coeffs'"),
    (lambda d: d.__setitem__("quadrature", {"radius": "wide"}),
     "quadrature"),
])
def test_malformed_scenarios_name_the_field(mutate, message):
    blob = scenario_blob()
    mutate(blob)
    with pytest.raises(ScenarioError, match=message):
        scenario_from_dict(blob)


def test_invalid_json_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"name": "x",\n  "algebra": }\n')
    with pytest.raises(ScenarioError, match="line 2 column 14"):
        load_scenario(path)


def test_missing_file_reported():
    with pytest.raises(ScenarioError, match="No such file"):
        load_scenario("/nonexistent/scenario.json")


def test_scenario_dict_keeps_plan_and_quadrature():
    blob = scenario_blob()
    blob["plan"] = {"count": 12, "seed": 5}
    blob["quadrature"] = {"radius": 8.0, "order": 10}
    blob["expected_charge"] = 0.0
    bundle = scenario_from_dict(blob)
    assert bundle.plan.count == 12 and bundle.plan.seed == 5
    out = scenario_to_dict(bundle)
    assert out["quadrature"] == {"radius": 8.0, "order": 10}
    assert out["expected_charge"] == 0.0


# ---------------------------------------------------------------------------
# suite runner and reports
# ---------------------------------------------------------------------------

def test_suites_run_without_named_sections():
    # scenario files need not define any sections; fall back to identity
    bundle = scenario_from_dict(scenario_blob())
    report = run_suite(bundle, "all", plan=QUICK)
    assert report.passed


def test_every_suite_has_a_nonempty_anchor():
    for name, (anchor, applicable, fn) in SUITES.items():
        assert isinstance(anchor, str) and anchor.strip()
        assert callable(applicable) and callable(fn)


def test_all_excludes_inapplicable_suites():
    flat = run_suite(builtin_scenario("flat-su2"), "all", plan=QUICK)
    names = {s.name for s in flat.suites}
    assert "self-duality" not in names and "charge" not in names
    assert names == set(suite_names()) - {"self-duality", "charge"}


def test_explicit_inapplicable_suite_raises():
    with pytest.raises(ScenarioError, match="not applicable"):
        run_suite(builtin_scenario("flat-su2"), "charge", plan=QUICK)


def test_unknown_suite_raises():
    with pytest.raises(ScenarioError, match="unknown suite"):
        run_suite(builtin_scenario("flat-su2"), "spectral", plan=QUICK)


def test_reports_are_deterministic():
    bundle = builtin_scenario("flat-su2")
    a = run_suite(bundle, "compatibility", plan=QUICK)
    b = run_suite(bundle, "compatibility", plan=QUICK)
    assert a.to_json() == b.to_json()
    assert list(a.csv_rows()) == list(b.csv_rows())


def test_report_schema():
    report = run_suite(builtin_scenario("abelian-u1"), "multiplicativity",
                       plan=QUICK)
    blob = json.loads(report.to_json())
    assert blob["scenario"] == "abelian-u1"
    assert blob["pass"] is True
    assert blob["env"]["points"] == 4 and blob["env"]["seed"] == 7
    (suite,) = blob["suites"]
    assert set(suite) == {"name", "anchor", "residual", "tolerance", "pass",
                          "checks"}
    assert suite["anchor"] == SUITES["multiplicativity"][0]


def test_csv_rows_cover_every_point(tmp_path):
    report = run_suite(builtin_scenario("flat-su2"), "darboux", plan=QUICK)
    path = tmp_path / "resid.csv"
    report.write_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "suite,check,point,residual"
    # two checks x four points
    assert len(lines) == 1 + 2 * 4
    assert lines[1].startswith("darboux,leibniz,0,")


def test_tolerance_overrides_and_scale():
    bundle = builtin_scenario("flat-su2")
    strict = run_suite(bundle, "lagrangian", plan=QUICK,
                       tolerances={"lagrangian/finite": 1e-30})
    assert not strict.passed
    rescued = run_suite(bundle, "lagrangian", plan=QUICK,
                        tolerances={"lagrangian/finite": 1e-30},
                        tol_scale=1e30)
    assert rescued.passed


def test_scenario_file_tolerances_feed_the_run():
    blob = scenario_blob()
    blob["tolerances"] = {"compatibility/derivation": 1e-30}
    bundle = scenario_from_dict(blob)
    report = run_suite(bundle, "compatibility", plan=QUICK)
    (suite,) = report.suites
    by_name = {c.check: c for c in suite.checks}
    assert by_name["derivation"].tolerance == 1e-30


def test_algebra_kernel_residuals_small_and_exact():
    from cym.algebra import su2
    res = algebra_kernel_residuals(su2(), count=8, seed=3)
    assert res["jacobi"] == 0.0
    assert max(res["ad-homomorphism"]) < 1e-12
    assert max(res["kappa-invariance"]) < 1e-12
    assert max(res["exp-ad-consistency"]) < 1e-12


def test_suite_report_binding_check_is_worst_ratio():
    report = run_suite(builtin_scenario("flat-su2"), "compatibility",
                       plan=QUICK)
    (suite,) = report.suites
    worst = suite._binding()
    for check in suite.checks:
        assert (worst.residual / worst.tolerance
                >= check.residual / check.tolerance)


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def test_cli_pass_and_outputs(tmp_path, capsys):
    report = tmp_path / "report.json"
    csv_out = tmp_path / "rows.csv"
    code = cli_main(["verify", "--scenario", "flat-su2",
                     "--suite", "multiplicativity", "--points", "4",
                     "--report", str(report), "--csv", str(csv_out)])
    out = capsys.readouterr().out
    assert code == 0
    assert "[PASS] multiplicativity" in out
    blob = json.loads(report.read_text())
    assert blob["pass"] is True and blob["env"]["points"] == 4
    assert csv_out.read_text().startswith("suite,check,point,residual")


def test_cli_failure_exit_code(capsys):
    code = cli_main(["verify", "--scenario", "flat-su2", "--suite",
                     "lagrangian", "--points", "2", "--tol-scale", "1e-12"])
    out = capsys.readouterr().out
    assert code == 1
    assert "[FAIL] lagrangian" in out and "checks FAILED" in out


def test_cli_input_errors(tmp_path, capsys):
    assert cli_main(["verify", "--scenario", "unknown-thing",
                     "--suite", "all"]) == 2
    assert cli_main(["verify", "--scenario", "flat-su2",
                     "--suite", "charge"]) == 2
    assert cli_main(["verify", "--scenario", "flat-su2",
                     "--suite", "bogus"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{]")
    assert cli_main(["verify", "--scenario", str(bad), "--suite", "all"]) == 2
    err = capsys.readouterr().err
    assert "invalid JSON" in err


def test_cli_scenario_file_runs(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario_blob()))
    code = cli_main(["verify", "--scenario", str(path),
                     "--suite", "compatibility", "--points", "4"])
    assert code == 0


def test_cli_seed_override_changes_env(tmp_path):
    report = tmp_path / "r.json"
    cli_main(["verify", "--scenario", "abelian-u1", "--suite",
              "multiplicativity", "--points", "3", "--seed", "99",
              "--report", str(report)])
    blob = json.loads(report.read_text())
    assert blob["env"]["seed"] == 99 and blob["env"]["points"] == 3
