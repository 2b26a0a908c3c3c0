import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from cli import cli
from export import read_records
from models import MANIFOLD_DIMS, Family

TETRAHEDRON_PHI = math.asin(1.0 / math.sqrt(3.0))


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


def test_cc_four_bodies(runner, tmp_path):
    out = tmp_path / "cc.json"
    result = runner.invoke(cli, ["cc", "--l", "2", "--alpha", "1", "--format", "json", "-o", str(out)])
    assert result.exit_code == 0, result.stderr
    records = read_records(str(out))
    assert len(records) == 6
    anti = [r for r in records if r["family"] == Family.ANTIPRISM.value]
    assert [r["v_bar_sign"] for r in anti] == [1, -1]
    assert anti[0]["phi"] == pytest.approx(TETRAHEDRON_PHI, abs=1e-10)
    assert anti[0]["motion"] == "ejection"
    assert len(anti[0]["eigenvalues"]) == 5


def test_cc_gammas_reproduce_eigenvalues(runner, tmp_path):
    out = tmp_path / "cc.json"
    result = runner.invoke(cli, ["cc", "--l", "2", "--alpha", "1", "--format", "json", "-o", str(out)])
    assert result.exit_code == 0, result.stderr
    beta = 0.5
    for record in read_records(str(out)):
        v = record["v_bar_sign"] * record["v_bar"]
        eigenvalues = np.array([complex(re, im) for re, im in record["eigenvalues"]])
        for gamma in (record["gamma1"], record["gamma2"]):
            for lam in np.roots([1.0, (1.0 - beta) * v, -gamma]):
                assert np.min(np.abs(eigenvalues - lam)) < 1e-8
    anti = [r for r in read_records(str(out)) if r["family"] == Family.ANTIPRISM.value][0]
    # off the equator the metric scales the tangent block
    assert sorted([anti["gamma1"], anti["gamma2"]]) != pytest.approx(sorted([anti["hessian1"], anti["hessian2"]]), rel=1e-6)


def test_cc_sweep_csv(runner, tmp_path):
    out = tmp_path / "cc.csv"
    result = runner.invoke(cli, ["cc", "--l", "2,3", "--alpha", "0.5,1.5", "--workers", "2", "-o", str(out)])
    assert result.exit_code == 0, result.stderr
    rows = read_records(str(out))
    assert len(rows) == 24
    assert [(r["l"], r["alpha"]) for r in rows[::6]] == [(2, 0.5), (2, 1.5), (3, 0.5), (3, 1.5)]
    for row in rows:
        dims = (row["dim_stable"], row["dim_unstable"], row["dim_stable_in_P"], row["dim_unstable_in_P"])
        assert dims == MANIFOLD_DIMS[(Family(row["family"]), row["v_bar_sign"])]
        assert "eigenvalues4_re" in row


def test_cc_with_scan(runner, tmp_path):
    result = runner.invoke(cli, ["cc", "--l", "3", "--scan", "--grid", "60", "-o", str(tmp_path / "cc.csv")])
    assert result.exit_code == 0, result.stderr


@pytest.mark.parametrize("args", [
    ["cc", "--l", "1"],
    ["cc", "--alpha", "2.5"],
    ["cc", "--format", "xml"],
    ["potential", "--l", "2,3"],
    ["flow", "--l", "3"],
    ["flow", "--l", "3", "--theta", "0.4", "--phi", "0.1", "--bodies", "b.json"],
    ["perron", "--r", "1.0"],
    ["check", "--only", "bogus"],
])
def test_usage_errors_exit_1(runner, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == 1


def test_potential_grid(runner, tmp_path):
    out = tmp_path / "u.csv"
    result = runner.invoke(cli, ["potential", "--l", "3", "--n-theta", "20", "--n-phi", "10", "-o", str(out)])
    assert result.exit_code == 0, result.stderr
    rows = read_records(str(out))
    assert len(rows) == 200
    assert list(rows[0]) == ["theta", "phi", "U", "dU_dtheta", "dU_dphi"]
    u = np.array([r["U"] for r in rows]).reshape(20, 10)
    du = np.array([r["dU_dtheta"] for r in rows]).reshape(20, 10)
    assert np.all(np.isfinite(u))
    # U(pi/l - theta, phi) = U(theta, phi)
    assert u == pytest.approx(u[::-1], rel=1e-12)
    assert du == pytest.approx(-du[::-1], rel=1e-9, abs=1e-9)


def test_potential_collision_needs_clip(runner, tmp_path):
    out = tmp_path / "u.csv"
    args = ["potential", "--l", "3", "--n-theta", "5", "--n-phi", "4", "--theta-min", "0", "--phi-min", "0", "-o", str(out)]
    result = runner.invoke(cli, args)
    assert result.exit_code == 1
    assert "collision" in result.stderr

    result = runner.invoke(cli, args + ["--allow-clip"])
    assert result.exit_code == 0, result.stderr
    rows = read_records(str(out))
    # (0, 0) and (pi/3, 0) are binary collisions
    assert len(rows) == 18


def test_flow_parabolic(runner, tmp_path):
    out = tmp_path / "flow.csv"
    args = ["flow", "--l", "3", "--theta", "0.5", "--phi", "0.2", "--w1", "0.3", "--v", "0.1",
            "--parabolic", "--tau1", "5", "--u-cap", "1e4", "-o", str(out)]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.stderr
    rows = read_records(str(out))
    assert list(rows[0]) == ["tau", "v", "theta", "phi", "w1", "w2", "E"]
    assert max(abs(r["E"]) for r in rows) < 1e-6


def test_flow_homothetic_lift(runner, tmp_path):
    out = tmp_path / "flow.json"
    bodies = tmp_path / "bodies.json"
    args = ["flow", "--l", "3", "--homothetic", "2l-gon", "--parabolic", "--v", "1", "--tau1", "1",
            "--lift", "--rho0", "1", "--bodies", str(bodies), "--format", "json", "-o", str(out)]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.stderr
    rows = read_records(str(out))
    v_bar = rows[0]["v"]
    assert all(r["v"] == pytest.approx(v_bar, rel=1e-12) for r in rows)
    assert rows[-1]["rho"] == pytest.approx(math.exp(v_bar * rows[-1]["tau"]), rel=1e-10)
    frames = json.loads(bodies.read_text())
    assert len(frames) == len(rows)
    assert np.array(frames[0]["positions"]).shape == (6, 3)


def test_perron_residuals(runner, tmp_path):
    out = tmp_path / "perron.json"
    result = runner.invoke(cli, ["perron", "--l", "2", "--alpha", "1", "--r", "0.5", "--n-max", "6",
                                 "--format", "json", "-o", str(out)])
    assert result.exit_code == 0, result.stderr
    rows = read_records(str(out))
    operator = [r for r in rows if r["kind"] == "operator"]
    assert len(operator) == 8
    assert max(r["residual"] for r in operator) < 1e-8
    assert [r["n"] for r in rows if r["kind"] == "coefficient"] == list(range(7))
    assert max(r["residual"] for r in rows if r["kind"] == "monomial") < 1e-12


def test_perron_small_r(runner, tmp_path):
    out = tmp_path / "perron.json"
    result = runner.invoke(cli, ["perron", "--l", "3", "--r", "1e-6", "--format", "json", "-o", str(out)])
    assert result.exit_code == 0, result.stderr
    b0 = [r["b"] for r in read_records(str(out)) if r.get("n") == 0][0]
    assert b0 == pytest.approx(1.0, abs=1e-10)


def test_check_quick_json(runner):
    result = runner.invoke(cli, ["check", "--quick", "--json", "--only", "l2_degenerations", "--only", "series_identities"])
    assert result.exit_code == 0, result.stderr
    records = json.loads(result.stdout)
    assert [r["name"] for r in records] == ["l2_degenerations", "series_identities"]
    assert all(r["passed"] for r in records)


def test_help_and_version(runner):
    assert runner.invoke(cli, ["--help"]).exit_code == 0
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert "1.0.0" in result.stdout
