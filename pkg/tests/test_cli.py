import csv
import json
import math
from pathlib import Path

import jsonschema
import pytest

from sel.cli import main

SCHEMA = json.loads((Path(__file__).parent.parent / "docs" / "report_schema.json").read_text())


def read_report(out_dir: Path) -> dict:
    return json.loads((out_dir / "report.json").read_text())


def test_solve_linear_case(tmp_path):
    out = tmp_path / "a0"
    code = main(["solve", "--alpha", "0", "--beta", "0", "--n", "64", "--out", str(out)])
    assert code == 0
    report = read_report(out)
    jsonschema.validate(report, SCHEMA)
    assert report["solve"]["converged"]
    rows = list(csv.DictReader(open(out / "solution.csv")))
    mid = next(r for r in rows if float(r["x"]) == 0.5)
    assert abs(float(mid["u"]) - 0.125) <= 1e-12
    assert set(rows[0]) == {"x", "d", "u", "grad_u"}
    assert (out / "manifest.json").exists()


def test_solve_reports_are_deterministic(tmp_path):
    outs = []
    for tag in ("r1", "r2"):
        out = tmp_path / tag
        assert main(["solve", "--alpha", "0.5", "--n", "32", "--tol", "1e-9", "--out", str(out)]) == 0
        outs.append(out)
    assert (outs[0] / "report.json").read_bytes() == (outs[1] / "report.json").read_bytes()
    assert (outs[0] / "solution.csv").read_bytes() == (outs[1] / "solution.csv").read_bytes()


def test_solve_singular_case_schema_and_spectral(tmp_path):
    out = tmp_path / "a2"
    code = main(["solve", "--alpha", "2", "--beta", "0", "--n", "256", "--out", str(out)])
    assert code == 0
    report = read_report(out)
    jsonschema.validate(report, SCHEMA)
    assert report["solve"]["converged"]
    assert report["spectral"]["mu1"] >= report["spectral"]["lambda1"] > 0
    assert report["regularity"]["q_bar_theory"] == 3.0
    assert report["barrier"]["t"] == pytest.approx(2.0 / 3.0)


def test_solve_too_coarse_for_fits_reports_null(tmp_path):
    out = tmp_path / "coarse"
    code = main(["solve", "--alpha", "0.5", "--n", "16", "--out", str(out)])
    assert code == 0
    report = read_report(out)
    jsonschema.validate(report, SCHEMA)
    assert report["solve"]["converged"]
    assert report["regularity"]["t_fit"] is None
    assert report["regularity"]["q_bar_est"] is None


def test_solve_alpha_one_warns_but_runs(tmp_path):
    out = tmp_path / "a1"
    code = main(["solve", "--alpha", "1", "--beta", "0", "--n", "64", "--out", str(out)])
    assert code == 0
    report = read_report(out)
    assert any("alpha=1" in w for w in report["warnings"])


def test_solve_borderline_is_invalid_input(tmp_path, capsys):
    code = main(["solve", "--alpha", "0.6", "--beta", "0.4", "--n", "32", "--out", str(tmp_path)])
    assert code == 1
    assert "borderline" in capsys.readouterr().err


def test_invalid_inputs_exit_one(tmp_path):
    assert main(["solve", "--alpha", "0.5", "--n", "1", "--out", str(tmp_path)]) == 1
    assert (
        main(
            ["solve", "--alpha", "0.5", "--n", "128", "--method", "dense", "--out", str(tmp_path)]
        )
        == 1
    )
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--out", str(tmp_path)])  # missing --alpha
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_non_convergence_exits_two(tmp_path):
    out = tmp_path / "short"
    code = main(
        ["solve", "--alpha", "2", "--n", "64", "--tol", "1e-10", "--max-iter", "3", "--out", str(out)]
    )
    assert code == 2
    assert not read_report(out)["solve"]["converged"]


def test_solve_method_dense_and_regularized_agree(tmp_path):
    outs = {}
    for method in ("monotone", "dense", "regularized"):
        out = tmp_path / method
        args = ["solve", "--alpha", "0.5", "--n", "32", "--tol", "1e-10", "--out", str(out),
                "--method", method]
        if method == "regularized":
            args += ["--eps", "1e-8"]
        assert main(args) == 0
        rows = list(csv.DictReader(open(out / "solution.csv")))
        outs[method] = [float(r["u"]) for r in rows]
    for method in ("dense", "regularized"):
        diffs = [abs(a - b) for a, b in zip(outs["monotone"], outs[method])]
        assert max(diffs) <= 1e-6 * max(outs["monotone"])


def test_sweep_table(tmp_path, monkeypatch):
    monkeypatch.setenv("SEL_THREADS", "2")
    out = tmp_path / "sweep.csv"
    code = main(
        [
            "sweep",
            "--alpha-list", "0.5,2",
            "--beta-list", "0,0.2,0.5",
            "--n", "128",
            "--tol", "1e-8",
            "--out", str(out),
        ]
    )
    assert code == 0
    rows = {(float(r["alpha"]), float(r["beta"])): r for r in csv.DictReader(open(out))}
    assert len(rows) == 6
    assert float(rows[(2.0, 0.0)]["q_bar_theory"]) == 3.0
    assert float(rows[(2.0, 0.5)]["q_bar_theory"]) == 2.0
    assert rows[(0.5, 0.2)]["q_bar_theory"] == "inf"
    assert rows[(0.5, 0.2)]["h1_verdict"] == "member"
    assert rows[(0.5, 0.5)]["h1_verdict"].startswith("skipped: borderline")
    # the coarse sweep ladder is qualitative: the verdict only needs to be defined
    verdict = rows[(2.0, 0.0)]["h1_verdict"]
    assert any(verdict.startswith(v) for v in ("member", "non-member", "inconclusive"))
    assert float(rows[(2.0, 0.0)]["t_fit"]) > 0.4
    assert float(rows[(0.5, 0.0)]["t_theory"]) == 1.0


def test_sweep_is_deterministic(tmp_path, monkeypatch):
    monkeypatch.setenv("SEL_THREADS", "2")
    outs = []
    for tag in ("s1", "s2"):
        out = tmp_path / f"{tag}.csv"
        args = ["sweep", "--alpha-list", "0.5,2", "--beta-list", "0", "--n", "128",
                "--out", str(out)]
        assert main(args) == 0
        outs.append(out)
    assert outs[0].read_bytes() == outs[1].read_bytes()
    # q_bar estimates are only reported when the cross-check certifies them
    rows = {float(r["alpha"]): r for r in csv.DictReader(open(outs[0]))}
    for row in rows.values():
        assert row["q_bar_est"] == "" or float(row["q_bar_est"]) > 1.0


def test_sweep_rejects_bad_n(tmp_path):
    assert (
        main(["sweep", "--alpha-list", "0.5", "--beta-list", "0", "--n", "30",
              "--out", str(tmp_path / "s.csv")])
        == 1
    )


def test_spectrum_levels(tmp_path):
    out = tmp_path / "spectrum.json"
    code = main(
        ["spectrum", "--alpha", "0.5", "--beta", "0", "--levels", "16,32,64", "--out", str(out)]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    lams = [row["lambda1"] for row in payload["levels"]]
    assert lams == sorted(lams)
    assert lams[-1] < math.pi**2
    assert all(row["mu1"] >= row["lambda1"] for row in payload["levels"])
    assert payload["stable"] and payload["ordered"]


def test_regularity_command(tmp_path):
    out = tmp_path / "reg"
    code = main(
        [
            "regularity",
            "--alpha", "2",
            "--beta", "0",
            "--levels", "64,128,256",
            "--q-grid", "1.5,2,4",
            "--out", str(out),
        ]
    )
    assert code == 0
    payload = json.loads((out / "regularity.json").read_text())
    assert payload["report"]["q_bar_theory"] == 3.0
    assert "t_fit" in payload["report"]
    rows = list(csv.DictReader(open(out / "sobolev.csv")))
    assert len(rows) == 9
    assert {r["q"] for r in rows} == {"1.5", "2", "4"}
