import csv
import json

import numpy as np
import pytest

from svbounds.cli import EXIT_ERROR, EXIT_FAIL, EXIT_OK, run
from svbounds.serialize import load_matrix

UPPER = ["verify-upper", "--class", "selfadjoint", "--dim", "4,8", "--p", "1,2", "--j", "0,1", "--omega", "power:0.5", "--trials", "3", "--seed", "5"]


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_check_partition_ok(tmp_path, capsys):
    out = tmp_path / "p.json"
    assert run(["check-partition", "--maxfreq", "512", "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["max_deviation"] <= 1e-12
    assert "max deviation" in capsys.readouterr().out


def test_check_partition_tolerance_failure():
    assert run(["check-partition", "--maxfreq", "64", "--tol", "-1"]) == EXIT_FAIL


def test_usage_errors(capsys):
    assert run(["verify-upper", "--class", "selfadjoint", "--dim", "4", "--omega", "power:0.5"]) == EXIT_ERROR
    assert "requires --seed" in capsys.readouterr().err
    assert run(["frobnicate"]) == EXIT_ERROR
    assert run([]) == EXIT_ERROR
    assert run(["verify-upper", "--class", "hermitian", "--dim", "4", "--omega", "power:0.5", "--seed", "1"]) == EXIT_ERROR


def test_verify_upper_outputs_and_determinism(tmp_path):
    a, b = tmp_path / "a" / "run.csv", tmp_path / "b" / "run.csv"
    assert run(UPPER + ["--out", str(a)]) == EXIT_OK
    assert run(UPPER + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    rows = _rows(a)
    assert rows[0] == ["trial", "j", "p", "l", "dim", "s_j", "delta_pl", "omega_star_arg", "ratio"]
    assert len(rows) - 1 == 3 * 2 * 1 * 2 * 2
    for name in ("run.trials.csv", "run.summary.json", "run.manifest.json"):
        assert (a.parent / name).is_file()
    man = json.loads((a.parent / "run.manifest.json").read_text())
    assert man["exit_status"] == 0
    assert {o["path"] for o in man["outputs"]} >= {str(a)}
    summary = json.loads((a.parent / "run.summary.json").read_text())
    assert summary["experiment_id"].startswith("verify-upper/" + man["config_hash"][:12])


def test_verify_upper_cap_failure(tmp_path):
    assert run(UPPER + ["--cap", "1e-9", "--out", str(tmp_path / "r.csv")]) == EXIT_FAIL
    assert json.loads((tmp_path / "r.manifest.json").read_text())["exit_status"] == EXIT_FAIL


def test_config_file_overrides_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"trials": 2, "dim": [4]}))
    out = tmp_path / "r.csv"
    assert run(UPPER + ["--config", str(cfg), "--out", str(out)]) == EXIT_OK
    assert len(_rows(out)) - 1 == 2 * 1 * 2 * 2
    bad = tmp_path / "bad.json"
    bad.write_text("{trials: ")
    assert run(UPPER + ["--config", str(bad)]) == EXIT_ERROR


def test_dump_worst_trial(tmp_path):
    dump = tmp_path / "dump"
    assert run(UPPER + ["--out", str(tmp_path / "r.csv"), "--dump", str(dump)]) == EXIT_OK
    A, B = load_matrix(dump / "A.npy"), load_matrix(dump / "B.json")
    assert A.shape == B.shape
    assert np.allclose(A, A.conj().T)


def test_verify_upper_unitary_and_normal(tmp_path):
    for kind in ("unitary", "normal", "tuple", "contraction"):
        argv = ["verify-upper", "--class", kind, "--dim", "4", "--omega", "power:0.5", "--trials", "2", "--seed", "1"]
        assert run(argv + ["--out", str(tmp_path / f"{kind}.csv")]) == EXIT_OK


def test_verify_bernstein(tmp_path):
    out = tmp_path / "b.csv"
    argv = ["verify-bernstein", "--class", "unitary", "--dim", "4", "--degrees", "1,3", "--trials", "2", "--seed", "0"]
    assert run(argv + ["--out", str(out)]) == EXIT_OK
    rows = _rows(out)
    assert rows[0][:3] == ["trial", "degree", "p"]
    assert len(rows) - 1 == 2 * 2


def test_converse_explicit_and_random(tmp_path):
    out = tmp_path / "w.csv"
    assert run(["converse", "--f", "monomial(1)", "--zeta", "1", "--eta", "1j", "--n", "3", "--p", "2", "--out", str(out)]) == EXIT_OK
    row = dict(zip(*_rows(out)))
    assert float(row["s_n"]) == pytest.approx(2**0.5, abs=1e-14)
    assert float(row["norm_sp"]) == pytest.approx(2 * 2**0.5, abs=1e-14)
    assert run(["converse", "--random", "6", "--seed", "1", "--out", str(out)]) == EXIT_OK
    assert len(_rows(out)) == 7
    assert run(["converse", "--random", "6"]) == EXIT_ERROR
    assert run(["converse", "--zeta", "2j", "--eta", "1", "--n", "1"]) == EXIT_ERROR
    assert run(["converse", "--zeta", "1j", "--eta", "1", "--n", "3", "--dim", "2"]) == EXIT_ERROR


def test_lower_bound(tmp_path):
    out = tmp_path / "lb.csv"
    assert run(["lower-bound", "--omega", "power:0.5", "--K", "64", "--nmax", "3", "--out", str(out)]) == EXIT_OK
    rows = _rows(out)
    assert rows[0] == ["m", "s_m", "omega_bound", "margin"] and len(rows) - 1 == 48
    tn = _rows(tmp_path / "lb.tn.csv")
    assert len(tn) - 1 == 3
    summary = json.loads((tmp_path / "lb.summary.json").read_text())
    assert summary["rank_U_minus_V"] == 1 and summary["violations"] == []


def test_lower_bound_margin_violation():
    assert run(["lower-bound", "--omega", "power:0.5", "--K", "16", "--nmax", "2", "--scale", "0.01"]) == EXIT_FAIL
    assert run(["lower-bound", "--omega", "power:0.5", "--K", "8", "--nmax", "2"]) == EXIT_ERROR


def test_line_transfer(tmp_path):
    out = tmp_path / "lt.csv"
    assert run(["line-transfer", "--omega", "power:0.5", "--nmax", "2", "--out", str(out)]) == EXIT_OK
    summary = json.loads((tmp_path / "lt.summary.json").read_text())
    assert summary["found"] and summary["rho"]["partition"] <= 1e-12
    assert run(["line-transfer", "--omega", "power:0.5", "--nmax", "2", "--C-cap", "0.5", "--out", str(out)]) == EXIT_FAIL
    assert json.loads((tmp_path / "lt.summary.json").read_text())["found"] is False


def test_decompose(tmp_path):
    src = tmp_path / "f.json"
    src.write_text(json.dumps([[-1, 1.0, 0.0], [4, 0.0, 2.0], [9, 0.5, 0.0]]))
    d = tmp_path / "dec"
    assert run(["decompose", "--input", str(src), "--levels", "4", "--out", str(d)]) == EXIT_OK
    assert (d / "level_000.json").is_file() and (d / "tail.json").is_file() and (d / "manifest.json").is_file()
    assert json.loads((d / "summary.json").read_text())["reassembly_error"] <= 1e-13
    assert run(["decompose", "--f", "power_abs(0.5)", "--levels", "2"]) == EXIT_ERROR
    assert run(["decompose", "--levels", "2"]) == EXIT_ERROR


def test_report_writes_figures(tmp_path):
    out = tmp_path / "r.csv"
    assert run(UPPER + ["--out", str(out)]) == EXIT_OK
    lb = tmp_path / "lb.csv"
    assert run(["lower-bound", "--omega", "power:0.5", "--K", "16", "--nmax", "2", "--out", str(lb)]) == EXIT_OK
    fig = tmp_path / "fig"
    assert run(["report", "--input", str(out), str(lb), "--out", str(fig)]) == EXIT_OK
    for name in ("r_stats.csv", "r_ratio_vs_dim.png", "r_ratio_hist.png", "lb_stats.csv", "lb_singular_values.png"):
        assert (fig / name).stat().st_size > 0
    assert (fig / "r_ratio_vs_dim.png").read_bytes()[:4] == b"\x89PNG"
    assert run(["report", "--input", str(tmp_path / "missing.csv")]) == EXIT_ERROR
