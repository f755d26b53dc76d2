import csv
import io
import json

import numpy as np
import pytest

from genpr.cli import main
from genpr.sweep import COLUMNS, SCHEMA, SweepSpec, sweep_csv

GOLDEN_HEADER = ("row_type,d,N,trial,verdict,decided_by,witness,nullspace_dim,"
                 "min_sigma_jacobian,collision_best,rate_certified_pr,rate_likely_pr,"
                 "rate_not_pr,rate_inconclusive,rate_witness")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_certify_builtin_mc2(capsys):
    code, out, _ = run(capsys, "certify", "--builtin", "mc2")
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "CertifiedPR" and doc["seed"] == 0


def test_bounds_complex_5(capsys):
    code, out, _ = run(capsys, "bounds", "--d", "5", "--field", "C")
    assert code == 0 and json.loads(out)["exact"] == 16


def test_bounds_table(capsys, tmp_path):
    p = tmp_path / "t.csv"
    assert main(["bounds", "--table", "--dmax", "6", "--out", str(p)]) == 0
    rows = list(csv.DictReader(p.open()))
    assert len(rows) == 10
    assert rows[0]["d"] == "2" and rows[0]["exact"] == "" and rows[0]["upper"] == "2"


def test_certify_file_not_pr(capsys, tmp_path):
    p = tmp_path / "pair.json"
    p.write_text(json.dumps({"field": "R", "matrices": [[[1, 0], [0, 1]], [[1, 0], [0, -1]]]}))
    code, out, _ = run(capsys, "certify", "--ensemble", str(p))
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "CertifiedNotPR"
    x, y = np.array(doc["witness"]["x"]), np.array(doc["witness"]["y"])
    assert abs(x @ x - y @ y) < 1e-8 and abs(x[0] ** 2 - x[1] ** 2 - y[0] ** 2 + y[1] ** 2) < 1e-8


def test_malformed_input_exit_2(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"field": "R", "matrices": [[[1, 2], [0, 1]]]}')
    code, _, err = run(capsys, "certify", "--ensemble", str(p))
    assert code == 2 and "bad.json" in err and "$.matrices" in err


def test_argparse_error_exit_2(capsys):
    assert run(capsys, "certify")[0] == 2
    assert run(capsys, "nope")[0] == 2


def test_gen_then_recover(capsys, tmp_path):
    e, s = tmp_path / "e.json", tmp_path / "x.json"
    assert main(["gen", "--d", "3", "--n", "8", "--field", "C", "--seed", "4",
                 "--out", str(e)]) == 0
    s.write_text(json.dumps([[1, 0], [0, 2], [-1, 1]]))
    code, out, _ = run(capsys, "recover", "--ensemble", str(e), "--signal", str(s))
    doc = json.loads(out)
    assert code == 0 and doc["converged"] and doc["non_unique"] is False
    est = np.array(doc["estimate"])
    est = est[:, 0] + 1j * est[:, 1]
    x = np.array([1, 2j, -1 + 1j])
    assert abs(abs(np.vdot(est, x)) - np.vdot(x, x).real) < 1e-6


def test_recover_empty_signal_file_exit_2(capsys):
    code, out, _ = run(capsys, "recover", "--builtin", "squaring", "--signal", "/dev/null")
    assert code == 2


def test_recover_non_unique(capsys, tmp_path):
    e, b = tmp_path / "e.json", tmp_path / "b.json"
    e.write_text(json.dumps({"field": "R", "matrices": [[[1, 0], [0, 1]], [[1, 0], [0, -1]]]}))
    b.write_text("[2, 0]")
    code, out, _ = run(capsys, "recover", "--ensemble", str(e), "--b", str(b))
    assert code == 0 and json.loads(out)["non_unique"] is True


def test_bilinear_octonion(capsys):
    code, out, _ = run(capsys, "bilinear", "--algebra", "octonion", "--restarts", "8")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "likely_nonsingular"
    assert doc["size"] == [8, 8, 8] and doc["stiefel_hopf_lower_bound"] == 8


def test_bilinear_generic_singular(capsys):
    code, out, _ = run(capsys, "bilinear", "--p", "2", "--q", "2", "--n", "1")
    assert json.loads(out)["verdict"] == "singular"


def test_sweep_golden_header(capsys):
    code, out, _ = run(capsys, "sweep", "--dmin", "2", "--dmax", "2", "--nmin", "2",
                       "--nmax", "3", "--trials", "2", "--restarts", "4")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == f"# schema: {SCHEMA}" == "# schema: genpr.sweep/1"
    assert lines[1] == GOLDEN_HEADER == ",".join(COLUMNS)
    assert len(lines) == 2 + 4 + 2


def test_sweep_byte_identical_across_workers(tmp_path):
    argv = ["sweep", "--dmin", "2", "--dmax", "3", "--nmin", "3", "--nmax", "4",
            "--trials", "3", "--restarts", "8", "--seed", "11"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--workers", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_timing_column():
    text = sweep_csv(SweepSpec(2, 2, 2, 2, trials=1, restarts=2), timing=True)
    header = text.splitlines()[1].split(",")
    assert header[-1] == "wall_time"


def test_sweep_cells():
    text = sweep_csv(SweepSpec(3, 3, 4, 5, kind="frame_rank1", trials=20, restarts=32))
    rows = [r for r in csv.DictReader(io.StringIO(text.split("\n", 1)[1]))
            if r["row_type"] == "summary"]
    by_n = {r["N"]: r for r in rows}
    assert float(by_n["4"]["rate_witness"]) >= 0.95
    assert float(by_n["5"]["rate_witness"]) == 0.0
