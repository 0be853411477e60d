import csv
import io
import subprocess
import sys

import pytest

from latinfill.cli import main, resolve_delta
from latinfill.completion import completion_feasible
from latinfill.gridio import read_grid
from latinfill.verify import extends, is_latin


@pytest.fixture
def run(capsys):
    def call(*args):
        code = main([str(a) for a in args])
        out = capsys.readouterr()
        return code, out.out, out.err

    return call


def write(path, text):
    path.write_text(text)
    return path


def test_construct(run, tmp_path):
    code, out, _ = run("construct", 8, tmp_path / "a.ls")
    assert code == 0 and "construction_disturbed=0" in out
    assert (tmp_path / "a.ls").read_text().splitlines()[1] == "1 2 3 4 5 6 7 8"
    code, out, _ = run("construct", 13, tmp_path / "b.ls")
    assert code == 0
    assert int(out.strip().split("=")[1]) <= 3 * 13 + 7
    assert is_latin(read_grid(tmp_path / "b.ls"))
    code, _, err = run("construct", 3, tmp_path / "c.ls")
    assert code == 2 and "n >= 4" in err


def test_complete_empty_square(run, tmp_path):
    src = write(tmp_path / "p.pls", "PLS 8\n" + ". . . . . . . .\n" * 8)
    code, out, _ = run("complete", src, tmp_path / "o.ls")
    assert code == 0 and "trades=0" in out
    run("construct", 8, tmp_path / "c.ls")
    assert (tmp_path / "o.ls").read_text() == (tmp_path / "c.ls").read_text()


def test_complete_exit_codes(run, tmp_path):
    stuck = write(tmp_path / "s.pls", "PLS 3\n1 . .\n. 1 .\n. . 2\n")
    assert run("complete", stuck, tmp_path / "o.ls", "--fallback", "oracle")[0] == 4
    assert run("complete", stuck, tmp_path / "o.ls", "--fallback", "fail")[0] == 3
    ok = write(tmp_path / "ok.pls", "PLS 3\n1 2 .\n. 3 .\n. . 2\n")
    code, out, _ = run("complete", ok, tmp_path / "o.ls")
    assert code == 0 and "fallback_used=1" in out
    assert (tmp_path / "o.ls").read_text() == "LS 3\n1 2 3\n2 3 1\n3 1 2\n"
    bad = write(tmp_path / "b.pls", "PLS 2\n1 1\n. .\n")
    assert run("complete", bad, tmp_path / "o.ls")[0] == 2
    assert run("complete", tmp_path / "missing.pls", tmp_path / "o.ls")[0] == 2


def test_generate_complete_verify_at_order_1000(run, tmp_path):
    p1, p2 = tmp_path / "g1.pls", tmp_path / "g2.pls"
    args = ("--epsilon", 0.005, "--delta", 4e-5, "--seed", 3)
    assert run("generate", 1000, p1, *args)[0] == 0
    assert run("generate", 1000, p2, *args)[0] == 0
    assert p1.read_bytes() == p2.read_bytes()
    out_ls = tmp_path / "g.ls"
    code, out, _ = run("complete", p1, out_ls, *args, "--fallback", "fail")
    assert code == 0
    report = dict(line.split("=") for line in out.strip().splitlines())
    assert int(report["max_cells_per_fix"]) <= 70 and report["fallback_used"] == "0"
    assert extends(read_grid(out_ls), read_grid(p1))
    code, out, _ = run("verify", p1, out_ls)
    assert code == 0 and "epsilon_actual=" in out and "delta_actual=4e-05" in out


def test_verify_reports_offending_cell(run, tmp_path):
    run("construct", 8, tmp_path / "a.ls")
    assert run("verify", tmp_path / "a.ls")[0] == 0
    text = (tmp_path / "a.ls").read_text().splitlines()
    text[3] = "1 " + text[3].split(" ", 1)[1]
    bad = write(tmp_path / "bad.ls", "\n".join(text) + "\n")
    code, out, _ = run("verify", bad)
    assert code == 1 and "(3, 1)" in out and "(1, 1)" in out


def test_verify_extension_mismatch(run, tmp_path):
    run("construct", 8, tmp_path / "a.ls")
    pls = write(tmp_path / "p.pls", "PLS 8\n2" + " ." * 7 + "\n" + ". . . . . . . .\n" * 7)
    code, out, _ = run("verify", pls, tmp_path / "a.ls")
    assert code == 1 and "(1, 1)" in out
    assert run("verify", pls, pls)[0] == 2
    assert run("verify", pls, pls, pls)[0] == 2


def test_bench_auto_delta_rows_succeed(run, tmp_path):
    dest = tmp_path / "b.csv"
    code, _, _ = run("bench", "--n", "500,1000", "--reps", 2, "--csv", dest)
    assert code == 0
    rows = list(csv.DictReader(dest.open()))
    assert list(rows[0]) == ["n", "epsilon", "delta", "seed", "success", "trades", "disturbed", "max_per_fix", "ms"]
    assert len(rows) == 4 and all(r["success"] == "1" for r in rows)
    # no positive density is admissible at n=500, so auto falls back to an empty square
    assert {r["delta"] for r in rows if r["n"] == "500"} == {"0.0"}
    for r in rows:
        if float(r["delta"]) > 0:
            assert completion_feasible(int(r["n"]), float(r["epsilon"]), float(r["delta"]))
        assert int(r["max_per_fix"]) <= 70


def test_bench_infeasible_rows_do_not_abort(run):
    code, out, _ = run("bench", "--n", 64, "--epsilon", 0.1, "--delta", 0.05, "--reps", 2)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["success"] for r in rows] == ["0", "0"]


def test_bench_parallel_matches_serial(run):
    serial = run("bench", "--n", 32, "--epsilon", 0.1, "--delta", 0.004, "--reps", 3)[1]
    parallel = run("bench", "--n", 32, "--epsilon", 0.1, "--delta", 0.004, "--reps", 3, "--jobs", 2)[1]

    def strip(text):
        return [{k: v for k, v in r.items() if k != "ms"} for r in csv.DictReader(io.StringIO(text))]

    assert strip(serial) == strip(parallel)


def test_bad_arguments(run):
    assert run("bench", "--delta", "lots")[0] == 2
    assert run("nonsense")[0] == 2
    assert run("construct")[0] == 2


def test_resolve_delta():
    assert resolve_delta(500, 0.005, "auto") == 0.0
    d = resolve_delta(1000, 0.005, "auto")
    assert d * 1000**2 == pytest.approx(41)
    assert resolve_delta(10, 0.1, "0.25") == 0.25


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "latinfill.cli", "construct", "4", str(tmp_path / "x.ls")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert (tmp_path / "x.ls").read_text().startswith("LS 4\n1 2 3 4\n")
