import json
import subprocess
import sys

import pytest

from granops.cli import main
from granops.io import read_measurements_csv


@pytest.fixture(scope="module")
def stack(tmp_path_factory):
    d = tmp_path_factory.mktemp("stack")
    assert main(["synth", "--frames", "3", "--size", "96x96", "--nucleus-radius", "25", "--noise", "0",
                 "--gain", "2", "--out", str(d)]) == 0
    return d / "stack.json"


def test_run_and_trace(stack, tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["run", "--input", str(stack), "--trace", "--out", str(out)]) == 0
    assert capsys.readouterr().out.startswith("> gaussianBlur2D")
    rows = read_measurements_csv(out)
    assert [r["frame"] for r in rows] == [0, 1, 2]
    assert rows[1]["mean"] - rows[0]["mean"] == pytest.approx(2, abs=1e-3)


def test_run_script_matches_variant(stack, tmp_path):
    from granops.macro import shipped_script_path
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", "--input", str(stack), "--variant", "optimized", "--params", "sigma=2",
                 "--backend", "parallel", "--threads", "2", "--out", str(a)]) == 0
    assert main(["run", "--input", str(stack), "--script", str(shipped_script_path("optimized")),
                 "--params", "sigma=2", "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()


def test_compare_outputs(stack, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["run", "--input", str(stack), "--out", str(a)])
    main(["run", "--input", str(stack), "--variant", "optimized", "--out", str(b)])
    rep, plots = tmp_path / "rep.json", tmp_path / "plots"
    assert main(["compare", str(a), str(b), "--field", "mean", "--out", str(rep), "--plots", str(plots)]) == 0
    report = json.loads(rep.read_text())
    assert report["n"] == 3 and report["tost_pass"]
    assert (plots / "scatter.csv").exists() and (plots / "bland_altman.csv").exists()


def test_bench_writes_summary_and_samples(stack, tmp_path):
    out = tmp_path / "bench.json"
    assert main(["bench", "--input", str(stack), "--repeats", "3", "--discard-warmup", "1",
                 "--out", str(out)]) == 0
    summary = json.loads(out.read_text())
    assert summary["n"] == 2 and summary["discarded"] == 1
    assert len((tmp_path / "bench.samples.csv").read_text().splitlines()) == 4


def test_bench_isolated(stack, tmp_path):
    out = tmp_path / "iso.json"
    assert main(["bench", "--input", str(stack), "--repeats", "2", "--isolate", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["extra"]["isolated"] is True


def test_ops_listing(capsys):
    assert main(["ops"]) == 0
    text = capsys.readouterr().out
    assert "topHatBox(source, destination, radius_x, radius_y, radius_z)" in text


def test_exit_codes(stack, tmp_path):
    assert main(["nonsense"]) == 2
    assert main(["run", "--input", str(stack), "--params", "unknown=1"]) == 2
    assert main(["synth", "--size", "20x20", "--nucleus-radius", "15", "--out", str(tmp_path / "x")]) == 2
    assert main(["run", "--input", str(tmp_path / "missing.json")]) == 3
    bad = tmp_path / "bad.cmacro"
    bad.write_text("foo bar;")
    assert main(["run", "--input", str(stack), "--script", str(bad)]) == 3
    bad.write_text("Ext.CLIJ2_pull(nothing);")
    assert main(["run", "--input", str(stack), "--script", str(bad)]) == 4
    (tmp_path / "one.csv").write_text("frame,area,mean,centroid_x,centroid_y,perimeter,circularity,"
                                      "integrated_density\n0,1,1,1,1,1,1,1\n")
    assert main(["compare", str(tmp_path / "one.csv"), str(tmp_path / "one.csv")]) == 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "granops.cli", "ops"], capture_output=True, text=True)
    assert res.returncode == 0 and "gaussianBlur2D" in res.stdout
