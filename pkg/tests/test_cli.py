import io
import json
import subprocess
import sys

import pytest

from wreathlab import __version__
from wreathlab.cli import run


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def test_compose_alpha_two_thirds():
    code, out = call("compose-alpha", "--a", "1", "--b", "1", "--p", "2")
    assert code == 0
    assert "2/3" in out and "0.6666666666666666" in out


def test_compose_alpha_table_json():
    code, out = call("compose-alpha", "--iterate", "4", "--format", "json")
    assert code == 0
    assert json.loads(out)["summary"]["table"] == ["1", "2/3", "4/7", "8/15"]


def test_compose_alpha_needs_inputs():
    assert call("compose-alpha")[0] == 2


@pytest.mark.parametrize("argv", [
    ["enflo"], ["enflo", "--n", "4"], ["walk-speed", "--group", "z", "--bogus"],
    ["walk-speed", "--group", "no-such-group"], ["nope"], [], ["markov", "--n", "4", "--p", "2"],
    ["compose-alpha", "--a", "x"],
])
def test_usage_errors_exit_two(argv):
    assert call(*argv)[0] == 2


def test_walk_speed_integers():
    code, out = call("walk-speed", "--group", "z", "--t-max", "16384", "--trials", "2000", "--seed", "42")
    assert code == 0
    summary = json.loads(out.strip().splitlines()[-1])
    assert 0.45 <= summary["beta_hat"] <= 0.55


def test_expectation_failure_exits_one():
    code, _ = call("walk-speed", "--group", "z", "--t-max", "256", "--trials", "200",
                   "--expect-beta", "0.9", "1.0")
    assert code == 1


def test_distortion_check_failure_exits_one():
    assert call("distortion", "--n", "6", "--max-distortion", "2")[0] == 1
    assert call("distortion", "--n", "6", "9", "--max-distortion", "16", "--max-spread", "1.5")[0] == 0


def test_manifest_and_replay(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    code, _ = call("return-prob", "--group", "c2wrz", "--t-max", "64", "--trials", "4000",
                   "--seed", "3", "--out", str(a), "--threads", "1")
    assert code == 0
    man = json.loads((a / "return-prob.manifest.json").read_text())
    assert man["schema"] == 1 and man["subcommand"] == "return-prob"
    assert man["seed"] == 3 and man["version"] == __version__
    assert man["params"]["group"] == "c2wrz"
    assert man["outputs"] == [str(a / "return-prob.csv")]
    assert man["started"] <= man["finished"]
    code, _ = call("replay", str(a / "return-prob.manifest.json"), "--out", str(b), "--threads", "8")
    assert code == 0
    assert (a / "return-prob.csv").read_bytes() == (b / "return-prob.csv").read_bytes()


def test_replay_rejects_unknown_schema(tmp_path):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"schema": 2, "argv": []}))
    assert call("replay", str(m))[0] == 2


@pytest.mark.parametrize("argv", [
    ["metric-check", "--group", "c2wrcn:6", "--radius", "6"],
    ["poincare", "--group", "z", "--radii", "2", "4"],
    ["enflo", "--n", "2", "3", "--p", "2"],
    ["markov", "--n", "3", "--p", "1.25", "--t-max", "8", "--trials", "2000"],
    ["lamp-stats", "--base", "z", "--shape", "cn:5", "--n", "32", "--trials", "2000"],
    ["visits-range", "--group", "z", "--t-max", "64", "--trials", "200"],
    ["embed", "--embedding", "second", "--n", "6", "--element", "wreath{1:1|cursor=2}"],
    ["embed", "--embedding", "z2", "--element", "wreath{(1,0):1|cursor=(0,0)}"],
    ["embed", "--embedding", "line", "--element", "wreath{5:1|cursor=0}"],
])
def test_subcommands_run(argv, tmp_path):
    for fmt in ("csv", "json"):
        code, out = call(*argv, "--format", fmt, "--out", str(tmp_path))
        assert code == 0, out
        path = tmp_path / f"{argv[0]}.{fmt}"
        text = path.read_text()
        if fmt == "json":
            json.loads(text)
        else:
            assert "," in text.splitlines()[0]


def test_metric_check_rejects_other_shapes():
    assert call("metric-check", "--group", "zwrz2")[0] == 2


def test_smoothness_suite_small():
    code, out = call("smoothness-suite", "--trials", "2000", "--martingales", "200", "--format", "json")
    assert code == 0
    names = [v["name"] for v in json.loads(out)["summary"]["verdicts"]]
    assert "cocycle-identity" in names and "pisier-martingale" in names


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "wreathlab.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and __version__ in r.stdout
