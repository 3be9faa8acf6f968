import csv
import io
import json

import pytest

from resolvent_thresholds import cli
from resolvent_thresholds import lattice as lt

HEADER = ("mode,d,p,q,n_or_x,re_z,im_z,re_value,im_value,re_branching,im_branching,"
          "re_remainder,im_remainder,error_estimate,nodes")


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_eval_lattice_row(capsys):
    code = cli.main(["eval-lattice", "--d", "2", "--q", "1", "--n", "0,0", "--w", "0.1+0.5i", "--grid", "64"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.splitlines()[0] == HEADER
    (row,) = _rows(out)
    assert row["n_or_x"] == "0,0" and row["p"] == "1"
    assert float(row["re_z"]) == pytest.approx(4.1)
    k = complex(float(row["re_value"]), float(row["im_value"]))
    ref = lt.lattice_kernel(2, 4.1 + 0.5j, (0, 0)).value
    assert abs(k - ref) < 1e-7
    assert row["re_branching"] == "" and row["nodes"] == "4096"


def test_values_round_trip(capsys):
    cli.main(["eval-lattice", "--d", "1", "--n", "3", "--z", "0.3+0.2i", "--method", "closed"])
    (row,) = _rows(capsys.readouterr().out)
    ref = lt.lattice_kernel(1, 0.3 + 0.2j, [3], method="closed").value
    assert complex(float(row["re_value"]), float(row["im_value"])) == ref


def test_branch_lattice_ray_json(capsys):
    code = cli.main(["branch-lattice", "--d", "1", "--q", "0", "--n", "0", "--ray", "90", "--ladder", "1e-2,0.5,8"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert "cross_ray_spread" in payload
    assert payload["rays"] == [pytest.approx(1.5707963267948966)]
    assert len(payload["radii"]) == 8


def test_branch_ray_csv(capsys):
    code = cli.main(["branch-lattice", "--d", "1", "--n", "0", "--ray", "45,135", "--ladder", "1e-2,0.5,4",
                     "--format", "csv"])
    rows = _rows(capsys.readouterr().out)
    assert code == 0 and len(rows) == 8
    for r in rows:
        v = complex(float(r["re_value"]), float(r["im_value"]))
        b = complex(float(r["re_branching"]), float(r["im_branching"]))
        rem = complex(float(r["re_remainder"]), float(r["im_remainder"]))
        assert abs(v - b - rem) < 1e-15


def test_branch_continuum_rect_negative_values(capsys):
    code = cli.main(["branch-continuum", "--p", "1", "--q", "0", "--x", "0", "--rect", "-0.5,0.5,2,0.1,0.2,2"])
    rows = _rows(capsys.readouterr().out)
    assert code == 0 and len(rows) == 4
    assert [r["re_z"] for r in rows] == ["-0.5", "0.5", "-0.5", "0.5"]
    assert rows[0]["nodes"] == ""


def test_eval_continuum_json(capsys):
    code = cli.main(["eval-continuum", "--p", "1", "--q", "1", "--x", "0.3,-0.4", "--z", "0.5+0.7i", "--format", "json"])
    (row,) = json.loads(capsys.readouterr().out)
    assert code == 0
    assert complex(float(row["re_value"]), float(row["im_value"])) == pytest.approx(-0.0266772565390219582 + 0.0468184468300915527j, abs=1e-11)


def test_numeric_error_row(capsys):
    code = cli.main(["eval-lattice", "--d", "2", "--n", "3,0", "--n", "0,1", "--w", "1+0.5i", "--grid", "6"])
    captured = capsys.readouterr()
    rows = _rows(captured.out)
    assert code == 1
    assert len(rows) == 2
    assert rows[0]["re_value"] == "" and rows[0]["n_or_x"] == "3,0"
    assert rows[1]["re_value"] != ""
    assert "AliasingError" in captured.err


@pytest.mark.parametrize(
    "argv",
    [
        ["eval-lattice", "--d", "2", "--n", "0,0", "--w", "0.1"],
        ["eval-lattice", "--d", "2", "--n", "0", "--w", "1+1i"],
        ["eval-lattice", "--d", "2", "--n", "0,0"],
        ["eval-lattice", "--q", "1", "--w", "1i"],
        ["eval-lattice", "--d", "2", "--q", "3", "--w", "1i"],
        ["eval-continuum", "--p", "1", "--x", "0", "--w", "1i", "--grid", "8"],
        ["branch-lattice", "--d", "1", "--ray", "200"],
        ["branch-lattice", "--d", "1", "--ray", "90", "--ladder", "1,2"],
        ["verify", "--suite", "specfun", "--format", "csv"],
        ["verify", "--suite", "nope"],
        ["eval-lattice", "--d", "1", "--w", "abc"],
    ],
)
def test_config_errors_exit_2(argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"d": 1, "n": ["0", "2"], "w": ["-0.5+0.25i"], "method": "closed"}))
    assert cli.main(["eval-lattice", "--config", str(cfg)]) == 0
    rows = _rows(capsys.readouterr().out)
    assert [r["re_z"] for r in rows] == ["-0.5", "-0.5"]
    assert cli.main(["eval-lattice", "--config", str(cfg), "--w", "0.5+0.5i"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert [r["re_z"] for r in rows] == ["0.5", "0.5"]


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["eval-lattice", "--config", str(bad)]) == 2
    odd = tmp_path / "odd.json"
    odd.write_text(json.dumps({"d": 1, "w": ["1i"], "colour": "red"}))
    assert cli.main(["eval-lattice", "--config", str(odd)]) == 2
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"mode": "verify"}))
    assert cli.main(["eval-lattice", "--config", str(wrong)]) == 2
    assert cli.main(["eval-lattice", "--config", str(tmp_path / "missing.json")]) == 2


def test_output_files_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["eval-lattice", "--d", "2", "--n", "1,0", "--rect", "0,1,3,0.2,0.4,2"]
    assert cli.main(argv + ["--output", str(a)]) == 0
    assert cli.main(argv + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 7


def test_parallel_rows_keep_order(tmp_path, monkeypatch):
    argv = ["eval-lattice", "--d", "1", "--n", "0", "--n", "4", "--rect", "0,3,4,0.1,0.1,1"]
    serial, parallel = tmp_path / "s.csv", tmp_path / "p.csv"
    cli.main(argv + ["--output", str(serial)])
    monkeypatch.setenv("RESOLVENT_THREADS", "3")
    cli.main(argv + ["--output", str(parallel)])
    assert serial.read_bytes() == parallel.read_bytes()


def test_verify_exit_and_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = cli.main(["verify", "--suite", "specfun", "--output", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert {r["check_id"] for r in payload} >= {"specfun.dilog.inversion", "specfun.hyp2f1.euler"}
    assert "PASS specfun.dilog.inversion" in capsys.readouterr().err


def test_verify_failure_exit_1(monkeypatch, capsys):
    from resolvent_thresholds import verify as vf

    failing = vf.CheckReport.from_residual("fake", 1.0, 0.1, 1)
    monkeypatch.setattr(vf, "run_identity_suite", lambda *a, **k: [failing])
    assert cli.main(["verify", "--suite", "specfun"]) == 1
    assert "FAIL fake" in capsys.readouterr().err


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "resolvent_thresholds", "eval-lattice", "--d", "1", "--w", "1i",
                          "--method", "closed"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith(HEADER)
