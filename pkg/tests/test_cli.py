"""CLI behavior: commands, exit codes, output formats, determinism."""

import json

import pytest

from singmech.cli import main
from importlib.resources import files

FIXTURES = files("singmech") / "fixtures"


def fixture(name):
    return str(FIXTURES / name)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# analyze ------------------------------------------------------------------------

def test_analyze_S1(capsys):
    code, out, _ = run(capsys, "analyze", fixture("S1.model"))
    assert code == 0
    report = json.loads(out)
    assert report["hessian"]["rank"] == 0
    assert report["classification"]["verdict"] == "nongauge"
    assert report["fg"]["F"] == [["0", "-1"], ["1", "0"]]
    assert report["fg"]["G"] == ["q1", "q2"]
    assert report["velocities"] == {"q1_dot": "q2", "q2_dot": "-q1"}


def test_analyze_R_regular(capsys):
    code, out, _ = run(capsys, "analyze", fixture("R.model"))
    assert code == 0
    report = json.loads(out)
    assert report["classification"]["verdict"] == "regular"
    assert report["fg"]["F"] == []


def test_analyze_G2_inconsistent_exit_1(capsys):
    code, out, _ = run(capsys, "analyze", fixture("G2.model"))
    assert code == 1
    report = json.loads(out)
    assert report["classification"]["verdict"] == "inconsistent"
    assert report["fg"]["G"] == ["p_q1"]
    assert report["classification"]["witness"] is not None


def test_analyze_missing_file_exit_3(capsys):
    code, out, _ = run(capsys, "analyze", "/nonexistent/file.model")
    assert code == 3
    assert "error" in json.loads(out)


def test_analyze_bad_model_exit_3(tmp_path, capsys):
    f = tmp_path / "bad.model"
    f.write_text("[model]\nname = bad\ncoordinates = q1, q1\nlagrangian = q1_dot\n")
    code, out, _ = run(capsys, "analyze", str(f))
    assert code == 3


def test_analyze_unsupported_lagrangian_exit_1(tmp_path, capsys):
    f = tmp_path / "quartic.model"
    f.write_text("[model]\nname = quartic\ncoordinates = q1\nlagrangian = q1_dot^4\n")
    code, out, _ = run(capsys, "analyze", str(f))
    assert code == 1
    assert json.loads(out)["error"] == "UnsupportedLagrangianError"


def test_analyze_deterministic_output(capsys):
    _, out1, _ = run(capsys, "analyze", fixture("S1.model"))
    _, out2, _ = run(capsys, "analyze", fixture("S1.model"))
    assert out1 == out2


def test_analyze_report_expressions_reparse(capsys):
    from singmech.models import model_S1
    from singmech.expr import Add, Neg, is_zero
    from singmech.parser import parse

    _, out, _ = run(capsys, "analyze", fixture("S1.model"))
    report = json.loads(out)
    model = model_S1()
    ctx = model.observable_context()
    h0 = parse(report["partial_hamiltonian"]["H0"], ctx)
    from singmech.pipeline import analyze as analyze_fn

    result = analyze_fn(model)
    assert is_zero(Add((h0, Neg(result.system.H0))))
    for row_rendered, row in zip(report["fg"]["F"], result.fg.F):
        for text, expr in zip(row_rendered, row):
            assert is_zero(Add((parse(text, ctx), Neg(expr))))


# simulate ------------------------------------------------------------------------

def test_simulate_S1_closed_orbit(capsys):
    code, out, err = run(
        capsys,
        "simulate",
        fixture("S1.model"),
        "--init",
        "q1=1,q2=0",
        "--t1",
        "6.283185307",
        "--dt",
        "1e-3",
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "t,q1,q2"
    final = [float(x) for x in lines[-1].split(",")]
    assert abs(final[1] - 1.0) < 1e-6
    assert abs(final[2] - 0.0) < 1e-6
    diag = json.loads(err)
    assert diag["h0_drift"] < 1e-10


def test_simulate_G1_free_particle(capsys):
    code, out, _ = run(
        capsys,
        "simulate",
        fixture("G1.model"),
        "--init",
        "q1=0,q1_dot=1,q2=0",
        "--t1",
        "3",
        "--dt",
        "1e-3",
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "t,q1,q2,p_q1"
    final = [float(x) for x in lines[-1].split(",")]
    assert abs(final[1] - 3.0) < 1e-10


def test_simulate_missing_init_lists_names(capsys):
    code, out, _ = run(
        capsys,
        "simulate",
        fixture("S1.model"),
        "--init",
        "q1=1",
        "--t1",
        "1",
        "--dt",
        "0.1",
    )
    assert code == 3
    payload = json.loads(out)
    assert "q2" in payload["message"]


def test_simulate_missing_velocity_for_momentum(capsys):
    code, out, _ = run(
        capsys,
        "simulate",
        fixture("G1.model"),
        "--init",
        "q1=0,q2=0",
        "--t1",
        "1",
        "--dt",
        "0.1",
    )
    assert code == 3
    assert "q1_dot" in json.loads(out)["message"]


def test_simulate_inconsistent_model_rejected(capsys):
    code, out, _ = run(
        capsys,
        "simulate",
        fixture("G2.model"),
        "--init",
        "q1=0,q1_dot=0,q2=0",
        "--t1",
        "1",
        "--dt",
        "0.1",
    )
    assert code == 1


def test_simulate_observable_column_and_residual(capsys):
    code, out, err = run(
        capsys,
        "simulate",
        fixture("S1.model"),
        "--init",
        "q1=1,q2=0",
        "--t1",
        "1",
        "--dt",
        "1e-3",
        "--observable",
        "energy=(q1^2 + q2^2)/2",
    )
    assert code == 0
    assert out.split("\n")[0].endswith("obs:energy")
    diag = json.loads(err)
    assert diag["observable_residuals"]["energy"] < 1e-6


def test_simulate_observable_rejects_extra_momentum(capsys):
    # S1 has no canonical sector, so p_q1 is an "extra" momentum there
    code, out, _ = run(
        capsys,
        "simulate",
        fixture("S1.model"),
        "--init",
        "q1=1,q2=0",
        "--t1",
        "1",
        "--dt",
        "0.1",
        "--observable",
        "bad=p_q1",
    )
    assert code == 3
    assert "p_q1" in json.loads(out)["message"]


def test_simulate_csv_deterministic(capsys):
    args = (
        "simulate",
        fixture("S1.model"),
        "--init",
        "q1=1,q2=0",
        "--t1",
        "1",
        "--dt",
        "0.01",
    )
    _, out1, _ = run(capsys, *args)
    _, out2, _ = run(capsys, *args)
    assert out1 == out2


def test_simulate_out_file(tmp_path, capsys):
    dest = tmp_path / "traj.csv"
    code, out, _ = run(
        capsys,
        "simulate",
        fixture("S1.model"),
        "--init",
        "q1=1,q2=0",
        "--t1",
        "0.5",
        "--dt",
        "0.1",
        "--out",
        str(dest),
    )
    assert code == 0
    assert out == ""
    assert dest.read_text().startswith("t,q1,q2")


# verify ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["S1.model", "G1.model"])
def test_verify_passes(name, capsys):
    code, out, _ = run(capsys, "verify", fixture(name))
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"] is True
    assert all(c["passed"] for c in payload["checks"])


def test_verify_gauge_bracket_check_present(capsys):
    _, out, _ = run(capsys, "verify", fixture("G1.model"))
    names = [c["name"] for c in json.loads(out)["checks"]]
    assert "bracket-coincides-with-poisson" in names


def test_verify_failure_exits_2(monkeypatch, capsys):
    # harness-level negative control: force one failing check through the CLI
    import singmech.cli as cli
    from singmech.checks import CheckResult

    monkeypatch.setattr(
        cli,
        "run_checks",
        lambda result, seed=42, tol=1e-8: [
            CheckResult("tampered", False, "forced failure", {"q1": 1.0})
        ],
    )
    code, out, _ = run(capsys, "verify", fixture("S1.model"))
    assert code == 2
    payload = json.loads(out)
    assert payload["passed"] is False
    assert payload["checks"][0]["witness"] is not None


def test_verify_tampered_F_fails_with_witness():
    # negative control: break F antisymmetry in the analyzed objects
    from singmech.checks import run_checks
    from singmech.expr import Const
    from singmech.models import model_S1
    from singmech.pipeline import analyze as analyze_fn

    result = analyze_fn(model_S1())
    result.fg.F[0][1] = Const(5)  # F[1][0] still 1: antisymmetry broken
    checks = run_checks(result)
    failed = {c.name for c in checks if not c.passed}
    assert "f-antisymmetry" in failed
    by_name = {c.name: c for c in checks}
    assert "dirac-f-correspondence" in failed or by_name["f-antisymmetry"].witness is not None


# multitime ------------------------------------------------------------------------

def test_multitime_integrable_paths_agree(capsys):
    code, out, _ = run(
        capsys,
        "multitime",
        "--hamiltonians",
        fixture("mt-drift.model"),
        "--path",
        fixture("staircase-a.path"),
        "--path",
        fixture("staircase-b.path"),
        "--init",
        "q=0,p_q=1",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["integrable"] is True
    assert payload["max_pairwise_difference"] < 1e-8
    ends = [p["endpoint"] for p in payload["paths"]]
    assert abs(ends[0]["q"] - 2.0) < 1e-8
    assert abs(ends[0]["p_q"] - 1.0) < 1e-12


def test_multitime_nonintegrable_verdict(capsys):
    code, out, _ = run(
        capsys,
        "multitime",
        "--hamiltonians",
        fixture("mt-shear.model"),
        "--path",
        fixture("staircase-a.path"),
        "--path",
        fixture("staircase-b.path"),
        "--init",
        "q=0,p_q=1",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["integrable"] is False
    assert payload["max_pairwise_difference"] > 1e-3


def test_multitime_dimension_mismatch(tmp_path, capsys):
    bad = tmp_path / "bad.path"
    bad.write_text("0,0,0\n1,1,1\n")
    code, out, _ = run(
        capsys,
        "multitime",
        "--hamiltonians",
        fixture("mt-drift.model"),
        "--path",
        str(bad),
        "--init",
        "q=0,p_q=1",
    )
    assert code == 3
    assert "dimension" in json.loads(out)["message"]


def test_multitime_single_waypoint_path(tmp_path, capsys):
    bad = tmp_path / "single.path"
    bad.write_text("0,0\n")
    code, out, _ = run(
        capsys,
        "multitime",
        "--hamiltonians",
        fixture("mt-drift.model"),
        "--path",
        str(bad),
        "--init",
        "q=0,p_q=1",
    )
    assert code == 1
    assert "waypoint" in json.loads(out)["message"]


def test_multitime_from_model(capsys):
    code, out, _ = run(capsys, "multitime", fixture("S1.model"))
    assert code == 0
    payload = json.loads(out)
    assert payload["n_times"] == 3
    assert payload["times"] == ["t", "q1", "q2"]
    assert payload["integrable"] is False  # F and G are nonzero for S1


def test_multitime_from_gauge_model_with_paths(tmp_path, capsys):
    # G1 promotes the spectator to a second time; F = 0 and G = 0 make it
    # exactly integrable, so staircase order cannot matter
    pa = tmp_path / "a.path"
    pa.write_text("0,0\n1,0\n1,1\n")
    pb = tmp_path / "b.path"
    pb.write_text("0,0\n0,1\n1,1\n")
    code, out, _ = run(
        capsys,
        "multitime",
        fixture("G1.model"),
        "--path",
        str(pa),
        "--path",
        str(pb),
        "--init",
        "q1=0,p_q1=1",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["times"] == ["t", "q2"]
    assert payload["integrable"] is True
    assert payload["max_pairwise_difference"] < 1e-10
    end = payload["paths"][0]["endpoint"]
    assert abs(end["q1"] - 1.0) < 1e-10 and abs(end["p_q1"] - 1.0) < 1e-12


# compare ---------------------------------------------------------------------------

def test_compare_S1_oracle(capsys):
    code, out, _ = run(
        capsys,
        "compare",
        fixture("S1.model"),
        "--t1",
        "6.283185307",
        "--dt",
        "1e-3",
        "--init",
        "q1=1,q2=0",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["oracle"] == "closed-form"
    assert payload["max_difference"] < 1e-6


def test_compare_regular_euler_lagrange(capsys):
    code, out, _ = run(
        capsys,
        "compare",
        fixture("R.model"),
        "--t1",
        "3.0",
        "--dt",
        "1e-3",
        "--init",
        "q1=1,q2=0,q1_dot=0,q2_dot=0.5",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["oracle"] == "euler-lagrange"
    assert payload["max_difference"] < 1e-6


def test_simulate_permuted_partition_csv_layout(tmp_path, capsys):
    # the canonical coordinate is the second one; CSV keeps declaration order
    f = tmp_path / "perm.model"
    f.write_text(
        "[model]\nname = perm\ncoordinates = q1, q2\nlagrangian = q2_dot^2/2\n"
    )
    code, out, _ = run(
        capsys,
        "simulate",
        str(f),
        "--init",
        "q1=5,q2=0,q2_dot=1",
        "--t1",
        "2",
        "--dt",
        "0.5",
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "t,q1,q2,p_q2"
    final = [float(x) for x in lines[-1].split(",")]
    assert final == [2.0, 5.0, 2.0, 1.0]


def test_parametric_model_end_to_end(tmp_path, capsys):
    # omega = sqrt(k/m) = 2: q(pi) returns to 1 with p = m*v = 0
    f = tmp_path / "osc.model"
    f.write_text(
        "[model]\nname = osc\ncoordinates = q1\n"
        "lagrangian = m*q1_dot^2/2 - k*q1^2/2\n"
        "[parameters]\nm = 2.0\nk = 8.0\n"
    )
    code, out, _ = run(capsys, "analyze", str(f))
    assert code == 0
    report = json.loads(out)
    assert report["classification"]["verdict"] == "regular"
    assert report["partial_hamiltonian"]["solved_velocities"]["q1_dot"] in (
        "p_q1*m^-1",
        "m^-1*p_q1",
    )
    code, out, _ = run(
        capsys,
        "simulate",
        str(f),
        "--init",
        "q1=1,q1_dot=0",
        "--t1",
        "3.14159265358979",
        "--dt",
        "1e-4",
    )
    assert code == 0
    final = [float(x) for x in out.strip().split("\n")[-1].split(",")]
    assert abs(final[1] - 1.0) < 1e-6
    assert abs(final[2]) < 1e-5


# misc ------------------------------------------------------------------------------

def test_seed_env_override(capsys, monkeypatch):
    monkeypatch.setenv("SINGMECH_SEED", "123")
    _, out, _ = run(capsys, "analyze", fixture("S1.model"))
    assert json.loads(out)["sampling"]["seed"] == 123


def test_seed_flag_beats_env(capsys, monkeypatch):
    monkeypatch.setenv("SINGMECH_SEED", "123")
    _, out, _ = run(capsys, "analyze", fixture("S1.model"), "--seed", "9")
    assert json.loads(out)["sampling"]["seed"] == 9
