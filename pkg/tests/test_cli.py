import json
import subprocess
import sys

import numpy as np
import pytest

from elasticdepth.cli import main
from elasticdepth.io import load_trajectories, read_labels_csv


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["--quiet", "simulate", "--model", "2", "--seed", "7", "--out", str(a)], capsys)[0] == 0
    assert run(["--threads", "4", "simulate", "--model", "2", "--seed", "7", "--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.labels.csv").read_bytes() == (tmp_path / "b.labels.csv").read_bytes()
    ids, trajs = load_trajectories(a)
    assert len(trajs) == 100 and trajs[0].grid.size == 30
    _, shape, magnitude = read_labels_csv(tmp_path / "a.labels.csv")
    assert shape.sum() == 10 and magnitude.sum() == 10


def test_simulate_to_stdout(capsys):
    code, out, _ = run(["simulate", "--model", "sincos", "--inliers", "3", "--outliers", "1"], capsys)
    assert code == 0 and out.startswith("# manifold: R1\n")
    assert len(out.strip().splitlines()) == 2 + 4


def test_detect_finds_planted_outliers(tmp_path, capsys):
    data = tmp_path / "m1.csv"
    run(["simulate", "--model", "1", "--seed", "3", "--inliers", "30", "--outliers", "4",
         "--no-magnitude-outliers", "--out", str(data)], capsys)
    code, out, _ = run(["--threads", "2", "detect", str(data), "--k", "1.5"], capsys)
    assert code == 0
    report = json.loads(out)
    assert set(report["outlier_ids"]) >= {"30", "31", "32", "33"}
    assert report["ids"][0] == "0"


def test_depth_of_identical_curves(tmp_path, capsys):
    data = tmp_path / "same.csv"
    row = ",".join(repr(float(v)) for v in np.sin(np.linspace(0, 3, 12)))
    grid = ",".join(repr(float(v)) for v in np.linspace(0, 1, 12))
    data.write_text(f"t,{grid}\na,{row}\nb,{row}\nc,{row}\n")
    out = tmp_path / "d.csv"
    assert run(["depth", str(data), "--out", str(out)], capsys)[0] == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "id,amplitude_depth,phase_depth"
    assert lines[1:] == ["a,1.0,1.0", "b,1.0,1.0", "c,1.0,1.0"]
    code, text, _ = run(["depth", str(data), "--channel", "phase"], capsys)
    assert text.splitlines()[0] == "id,phase_depth"


def test_bench_outputs_and_thread_invariance(tmp_path, capsys):
    base = ["bench", "f1", "--model", "1", "--reps", "2", "--grid", "10", "--seed", "5"]
    run(base + ["--out", str(tmp_path / "one")], capsys)
    run(["--threads", "3"] + base + ["--out", str(tmp_path / "three")], capsys)
    for ext in (".csv", ".json"):
        assert (tmp_path / f"one{ext}").read_bytes() == (tmp_path / f"three{ext}").read_bytes()
    summary = json.loads((tmp_path / "one.json").read_text())["summary"]
    assert 0.0 <= summary["mean_f1"] <= 1.0
    code, out, _ = run(["bench", "ksweep", "--model", "1", "--reps", "1", "--grid", "10",
                        "--k", "1", "2", "--no-undersampling"], capsys)
    assert code == 0 and json.loads(out)["summary"]["k"] == [1.0, 2.0]


def test_thread_count_from_environment(tmp_path, capsys, monkeypatch):
    data = tmp_path / "x.csv"
    run(["simulate", "--model", "1", "--inliers", "5", "--outliers", "1", "--grid", "10",
         "--out", str(data)], capsys)
    expected = run(["depth", str(data)], capsys)[1]
    monkeypatch.setenv("ELASTICDEPTH_THREADS", "3")
    assert run(["depth", str(data)], capsys)[1] == expected
    monkeypatch.setenv("ELASTICDEPTH_THREADS", "zero")
    with pytest.raises(SystemExit):
        main(["depth", str(data)])


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--model", "9"],
        ["simulate"],
        ["detect", "x.csv", "--k", "-1"],
        ["detect", "x.csv", "--p", "1.5"],
        ["--threads", "0", "depth", "x.csv"],
        ["bench", "nope", "--model", "1"],
        ["frobnicate"],
    ],
)
def test_bad_arguments_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_runtime_errors_exit_1(tmp_path, capsys):
    code, _, err = run(["depth", str(tmp_path / "missing.csv")], capsys)
    assert code == 1 and err.startswith("error:")
    bad = tmp_path / "bad.csv"
    bad.write_text("t,0,0.5,1\na,1,2\n")
    code, _, err = run(["detect", str(bad)], capsys)
    assert code == 1 and "bad.csv:2:" in err
    code, _, err = run(["bench", "f1", "--model", "1", "--k", "1", "2"], capsys)
    assert code == 1


def test_version_and_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "elasticdepth", "--version"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.startswith("elasticdepth ")
