import csv
import io
import json
import math
import subprocess
import sys

import pytest

from ttstoch.cli import main, parse_range


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def rows(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_parse_range():
    assert parse_range("0.3") == [0.3]
    assert parse_range("0.1:0.5:0.1") == [0.1, 0.2, 0.3, 0.4, 0.5]
    assert parse_range("0.1:0.9:0.2") == [0.1, 0.3, 0.5, 0.7, 0.9]


def test_set_prob_examples(capsys):
    _, out = run(["set-prob", "--m", "5", "--n", "21", "--pa", "0.4", "--pb", "0.2"], capsys)
    (r,) = rows(out)
    assert float(r["win_prob"]) == pytest.approx(0.9297, abs=5e-4)
    _, out = run(["set-prob", "--m", "2", "--n", "11", "--pa", "0.5", "--pb", "0.5"], capsys)
    assert float(rows(out)[0]["mean_duration"]) == pytest.approx(18.8285, abs=5e-4)
    _, out = run(["set-prob", "--m", "1", "--n", "2", "--pa", "1", "--pb", "0"], capsys)
    r = rows(out)[0]
    assert float(r["win_prob"]) == 1.0 and float(r["mean_duration"]) == 2.0


def test_header_echoes_config(capsys):
    _, out = run(["set-prob", "--m", "5", "--n", "21", "--pa", "0.4", "--pb", "0.2"], capsys)
    header = dict(line[2:].split("=", 1) for line in out.splitlines() if line.startswith("# "))
    assert header["tool"] == "ttstoch"
    assert header["m"] == "5" and header["n"] == "21" and header["pa"] == "0.4"
    assert header["command"] == "set-prob" and header["precision"] == "6"


def test_grid_reproduces_table_size(capsys):
    _, out = run(["set-prob", "--m", "2", "--n", "11", "--grid", "0.1"], capsys)
    assert len(rows(out)) == 81


def test_jsonl(capsys):
    _, out = run(["match-prob", "--m", "2", "--n", "11", "--G", "3", "--p", "0.5", "--format", "jsonl"], capsys)
    lines = [json.loads(x) for x in out.splitlines()]
    assert lines[0]["run_config"]["G"] == 3
    assert lines[1]["win_prob"] == 0.5


def test_duration_rows(capsys):
    _, out = run(["duration-dist", "--m", "2", "--n", "11", "--pa", "0.5", "--pb", "0.5", "--precision", "17"], capsys)
    r = rows(out)
    mass = {int(x["rallies"]): float(x["probability"]) for x in r if x["rallies"] != "tail"}
    assert all(mass[d] == 0.0 for d in range(11))
    assert mass[21] == 0.0
    tail = float(r[-1]["probability"])
    assert math.fsum(mass.values()) + tail == pytest.approx(1.0, abs=1e-10)


def test_score_rows_normalized(capsys):
    _, out = run(["score-dist", "--m", "5", "--n", "21", "--pa", "0.3", "--pb", "0.5", "--precision", "17"], capsys)
    r = rows(out)
    assert r[-1]["winner"] == "tail"
    assert math.fsum(float(x["probability"]) for x in r) == pytest.approx(1.0, abs=1e-10)
    scores = {(int(x["score_a"]), int(x["score_b"])) for x in r[:-1]}
    assert (21, 0) in scores and (23, 21) in scores and (19, 21) in scores


def test_compare_table_row(capsys):
    _, out = run(["compare", "--old", "5,21,1", "--new", "2,11,1", "--pa", "0.1:0.5:0.1", "--pb", "0.5"], capsys)
    ratios = [float(x["ratio_mean"]) for x in rows(out)]
    assert ratios == pytest.approx([1.9000, 1.9058, 1.9297, 1.9623, 1.9776], abs=1e-3)


def test_compare_identical(capsys):
    _, out = run(["compare", "--old", "2,11,3", "--new", "2,11,3", "--no-server", "--grid", "0.1:0.5:0.1"], capsys)
    for x in rows(out):
        assert float(x["ratio_mean"]) == 1.0 and float(x["ratio_std"]) == 1.0


def test_simulate_deterministic_and_exact(capsys):
    argv = ["simulate", "--m", "2", "--n", "11", "--pa", "0.6", "--pb", "0.4", "--trials", "20000", "--seed", "7"]
    _, a = run(argv, capsys)
    _, b = run(argv + ["--workers", "3"], capsys)
    assert a == b
    _, out = run(["simulate", "--m", "2", "--n", "11", "--pa", "1", "--pb", "0", "--trials", "100"], capsys)
    s = json.loads(out)["summary"]
    assert s["wins_a"] == 100 and s["duration_histogram"] == {"11": 100}


def test_out_file_written_atomically(tmp_path, capsys):
    target = tmp_path / "t.csv"
    assert main(["set-prob", "--pa", "0.6", "--pb", "0.5", "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    first = target.read_text()
    assert first.startswith("# tool=ttstoch")
    # a failing run leaves the previous file alone and no temp files behind
    assert main(["set-prob", "--pa", "1", "--pb", "1", "--m", "1", "--n", "2", "--out", str(target)]) == 3
    assert target.read_text() == first
    assert [p.name for p in tmp_path.iterdir()] == ["t.csv"]


def test_exit_codes(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["set-prob", "--pa", "0.5", "--p", "0.5"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["set-prob", "--pa", "oops"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2
    assert main(["set-prob", "--pa", "1.5", "--pb", "0.5"]) == 3
    assert main(["set-prob", "--n", "1", "--pa", "0.5", "--pb", "0.5"]) == 3
    assert "error" in capsys.readouterr().err


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "ttstoch.cli", "set-prob", "--pa", "0.3", "--pb", "0.6"],
                          capture_output=True, text=True, check=True)
    assert float(rows(proc.stdout)[0]["win_prob"]) == pytest.approx(0.0673, abs=5e-4)


def write_lines(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records))


def test_estimate_serve_counts(tmp_path, capsys):
    f = tmp_path / "obs.jsonl"
    write_lines(f, [
        {"m": 2, "n": 11, "first_server": "A", "score_a": 11, "score_b": 7, "a_sw": 20, "a_s": 30, "b_sw": 8, "b_s": 25},
        {"m": 2, "n": 11, "first_server": "B", "score_a": 9, "score_b": 11, "a_sw": 10, "a_s": 20, "b_sw": 12, "b_s": 25},
    ])
    _, out = run(["estimate", str(f)], capsys)
    est = json.loads(out)["estimate"]
    assert est["estimator"] == "serve-counts"
    assert (est["p_a"], est["p_b"]) == (0.6, 0.4)

    write_lines(f, [{"m": 2, "n": 11, "score_a": 11, "score_b": 0, "a_sw": 0, "a_s": 10, "b_sw": 10, "b_s": 10}])
    _, out = run(["estimate", str(f)], capsys)
    est = json.loads(out)["estimate"]
    assert (est["p_a"], est["p_b"]) == (0.0, 1.0) and est["warnings"]

    write_lines(f, [{"m": 2, "n": 11, "score_a": 11, "score_b": 0, "a_sw": 0, "a_s": 0, "b_sw": 1, "b_s": 1}])
    assert main(["estimate", str(f)]) == 3


def test_estimate_likelihood(tmp_path, capsys):
    from ttstoch.core import RallyModel, ScoringSystem
    from ttstoch.oracle import SimConfig, simulate_set

    s = simulate_set(SimConfig(500, 0, ScoringSystem(2, 11), RallyModel.server(0.6, 0.5)))
    recs = [{"m": 2, "n": 11, "first_server": "A", "score_a": a, "score_b": b}
            for (a, b), c in s.final_score_histogram.items() for _ in range(c)]
    f = tmp_path / "obs.jsonl"
    write_lines(f, recs)
    _, out = run(["estimate", str(f)], capsys)
    est = json.loads(out)["estimate"]
    assert est["estimator"] == "score-likelihood" and est["observations"] == 500
    assert abs(est["p_a"] - 0.6) <= 0.05 and abs(est["p_b"] - 0.5) <= 0.05


def test_estimate_bad_files(tmp_path):
    f = tmp_path / "obs.jsonl"
    write_lines(f, [{"m": 2, "n": 11, "score_a": 11, "score_b": 4, "a_sw": 1, "a_s": 2, "b_sw": 1, "b_s": 2},
                    {"m": 2, "n": 11, "score_a": 11, "score_b": 4}])
    assert main(["estimate", str(f)]) == 3
    write_lines(f, [{"m": 2, "n": 11, "score_a": 10, "score_b": 4}])
    assert main(["estimate", str(f)]) == 3
    f.write_text("")
    assert main(["estimate", str(f)]) == 3
    assert main(["estimate", str(tmp_path / "missing.jsonl")]) == 3


@pytest.mark.parametrize("argv", [
    ["set-prob", "--m", "5", "--n", "21", "--grid", "0.1"],
    ["match-prob", "--m", "2", "--n", "11", "--G", "4", "--pa", "0.3:0.7:0.1", "--pb", "0.5", "--format", "jsonl"],
    ["duration-dist", "--m", "2", "--n", "11", "--G", "3", "--match", "--p", "0.6"],
    ["simulate", "--m", "5", "--n", "21", "--pa", "0.3", "--pb", "0.2", "--trials", "50000", "--seed", "7"],
])
def test_byte_identical_reruns(argv, capsys):
    _, a = run(argv, capsys)
    _, b = run(argv, capsys)
    assert a == b and a
