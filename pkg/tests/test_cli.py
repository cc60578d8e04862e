import json
import subprocess
import sys

import pytest

from degenlab.cli import dispatch, parse_radii


def run(*args):
    return subprocess.run([sys.executable, "-m", "degenlab", *args], capture_output=True, text=True)


def test_distance_prints_value():
    r = run("distance", "--n", "1", "--m", "1", "--d1", "0.5", "--d2", "0.5", "--x", "0,0", "--y", "1,0")
    assert r.returncode == 0
    assert float(r.stdout) == pytest.approx(1.0)
    assert "runtime" in r.stderr


def test_unknown_flag_exits_one():
    r = run("distance", "--foo")
    assert r.returncode == 1 and "usage" in r.stderr


def test_exit_codes_in_process(capsys):
    assert dispatch(["nosuchcommand"]) == 1
    assert dispatch(["distance", "--d1", "1.5", "--x", "0", "--y", "1"]) == 1
    assert dispatch(["distance", "--x", "0,0", "--y", "1"]) == 1
    assert dispatch(["distance", "--x", "0", "--y", "2"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(2.0)


def test_parse_radii():
    assert parse_radii("1:8:geometric:4") == pytest.approx([1, 2, 4, 8])
    assert parse_radii("1:2:linear:3") == pytest.approx([1, 1.5, 2])
    with pytest.raises(Exception):
        parse_radii("0:1:linear:3")
    assert parse_radii("0.5,2") == [0.5, 2.0]
    with pytest.raises(Exception):
        parse_radii("1:2:cubic:3")


def test_sweep_csv_slope(tmp_path):
    out = tmp_path / "sweep.csv"
    assert dispatch(["sweep", "--d1", "0", "--d1p", "0.75", "--radii", "4:64:geometric:9", "--grid", "513", "--out", str(out)]) == 0
    lines = out.read_text().split("\n")
    header = {ln[2:].split("=", 1)[0]: ln[2:].split("=", 1)[1] for ln in lines if ln.startswith("# ")}
    assert float(header["result.slope"]) == pytest.approx(-2.0, abs=0.05)
    assert (tmp_path / "sweep.csv.runtime.json").exists()


def test_reports_byte_identical(tmp_path):
    argv = ["heat", "--d1", "0.25", "--x", "0.3", "--t", "0.1", "--grid", "129", "--format", "json"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert dispatch([*argv, "--out", str(a)]) == 0
    assert dispatch([*argv, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert set(doc) == {"build", "command", "config", "result", "seed"}
    assert b"\r" not in a.read_bytes()


def test_sde_report_and_seed(tmp_path):
    base = ["sde", "--d1p", "0.5", "--x", "2", "--a", "0", "--b", "6", "--dt", "0.01", "--trials", "300"]
    outs = []
    for i, seed in enumerate(["1", "1", "2"]):
        path = tmp_path / f"s{i}.json"
        assert dispatch([*base, "--seed", seed, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] and outs[0] != outs[2]
    res = json.loads(outs[0])["result"]
    assert 0 < res["oracle"] < 1 and res["nPaths"] == 300


def test_numeric_failure_exit_two(monkeypatch, capsys):
    from degenlab import sde

    monkeypatch.setattr(sde, "STEP_CAP", 2)
    assert dispatch(["sde", "--x", "5", "--a", "0", "--b", "10", "--trials", "200"]) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_ends_json():
    r = run("ends", "--d1", "0.5")
    assert r.returncode == 0
    assert json.loads(r.stdout)["result"]["pass"] is True
