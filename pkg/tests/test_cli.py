import json
import subprocess
import sys

import pytest

from guts import __version__
from guts.cli import run


def report(argv):
    code, rep = run(argv)
    assert code == 0, rep
    assert rep["schema_version"] == 1 and rep["version"] == __version__
    return rep


@pytest.fixture
def game_file(tmp_path):
    path = tmp_path / "game.json"
    path.write_text(json.dumps({"A": [[0.3]], "B": [[0.4]], "t": 1.0}))
    return str(path)


def test_value_both_directions(game_file, tmp_path):
    csv = tmp_path / "trace.csv"
    rep = report(["value", "--game", game_file, "--direction", "both", "--csv", str(csv)])
    assert rep["results"]["lower"]["limit"] == pytest.approx(0.5, abs=1e-9)
    assert rep["results"]["upper"]["limit"] == pytest.approx(0.5, abs=1e-9)
    assert csv.read_text().splitlines()[0] == "direction,n,V_n"


def test_value_single_trace_csv(game_file, tmp_path):
    csv = tmp_path / "trace.csv"
    report(["value", "--game", game_file, "--n-max", "5", "--tol", "0", "--csv", str(csv)])
    lines = csv.read_text().splitlines()
    assert lines[0] == "n,V_n" and len(lines) == 7


def test_payoff_and_evaluators():
    rep = report(["payoff", "--players", "3", "--profile", "0.5,0.75,0.2"])
    assert rep["results"]["evaluator"] == "payoff3"
    rep = report(["payoff", "--players", "2", "--profile", "0.5,0.75"])
    assert rep["results"]["alpha"] == 0.125


def test_best_response_three_players():
    rep = report(["best-response", "--players", "3", "--p1", "0.70711"])
    assert rep["results"]["branch"] == "alpha_b"
    assert rep["results"]["value"] == pytest.approx(-0.1072, abs=1e-4)


def test_bloc_symmetric_point():
    rep = report(["bloc", "--n", "5", "--p1", str(0.5**0.25), "--p2", str(0.5**0.25)])
    assert abs(rep["results"]["alpha"]) <= 1e-12
    assert rep["results"]["slope_at_p2"] == pytest.approx(0.0, abs=1e-12)


def test_coalition_sweep(tmp_path):
    csv = tmp_path / "sweep.csv"
    rep = report(["coalition", "--n", "3", "--eps", "0.04", "--delta", "0.137",
                  "--C", "106.25", "--csv", str(csv)])
    assert rep["results"]["max_alpha"] < 0
    assert rep["results"]["points"] == 1001
    assert len(csv.read_text().splitlines()) == 1002


def test_simulate_is_deterministic(tmp_path):
    argv = ["simulate", "--players", "3", "--profile", "0.6,0.7,0.8", "--samples", "20000",
            "--seed", "5"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(argv + ["--out", str(a)])[0] == 0
    assert run(argv + ["--out", str(b)])[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_total_and_discrete():
    rep = report(["simulate", "--players", "2", "--profile", "0.5,0.5", "--samples", "5000",
                  "--total", "--max-rounds", "4"])
    assert 0 <= rep["results"]["total"]["truncated_fraction"] <= 1
    rep = report(["simulate", "--players", "2", "--profile", "26,26", "--samples", "5000",
                  "--discrete"])
    assert "alpha" in rep["results"]


def test_discrete_solve_one_card():
    rep = report(["discrete", "solve", "--cards", "1"])
    assert rep["command"] == "discrete solve"
    assert rep["results"]["optimal_index"] == 26 and rep["results"]["hand_name"] == "8H"


def test_discrete_solve_two_cards(tmp_path):
    csv = tmp_path / "log.csv"
    rep = report(["discrete", "solve", "--cards", "2", "--csv", str(csv)])
    res = rep["results"]
    assert res["optimal_index"] == 668 and res["hand_name"] == "JD/7S"
    assert res["lowest_holding_hand"] == "JS/7C"
    assert res["findings"]
    assert len(csv.read_text().splitlines()) == 5152


@pytest.mark.parametrize("argv", [
    ["bogus"],
    [],
    ["payoff", "--players", "2", "--profile", "0.5"],
    ["payoff", "--players", "2", "--profile", "0.5,1.5"],
    ["bloc", "--n", "1", "--p1", "0.5", "--p2", "0.5"],
    ["simulate", "--players", "2", "--profile", "0.5,0.5", "--samples", "10"],
    ["simulate", "--players", "2", "--profile", "0.5,0.5", "--seed", "-1"],
    ["value", "--game", "/nonexistent/game.json"],
    ["coalition", "--n", "3", "--eps", "0.5", "--delta", "0.1", "--C", "100"],
])
def test_input_errors_exit_2(argv):
    assert run(argv)[0] == 2


def test_bad_game_json_exit_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"A": [[1]], "B": [[-1]]}')
    assert run(["value", "--game", str(path)])[0] == 2
    path.write_text("not json")
    assert run(["value", "--game", str(path)])[0] == 2


def test_unsupported_exit_3():
    argv = ["payoff", "--players", "7", "--profile", "0.1,0.2,0.3,0.4,0.5,0.6,0.7"]
    assert run(argv)[0] == 3
    assert run(["discrete", "solve", "--cards", "2", "--deck-size", "40"])[0] == 3


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "guts", "bloc", "--n", "3", "--p1", "0.5",
                          "--p2", "0.4"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["command"] == "bloc"
    out = subprocess.run([sys.executable, "-m", "guts", "nope"], capture_output=True, text=True)
    assert out.returncode == 2 and "usage" in out.stderr
