import json

import pytest

from shiftwalk.cli import main


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def test_trajectory_figure_data(tmp_path):
    code, out = run(tmp_path, "trajectory", "--map", "example1", "--eps", "0.01", "--delta", "0.01",
                    "--x0", "0.9", "--steps", "10000", "--seed", "7")
    assert code == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "step,position,fractional,cocycle"
    assert len(lines) == 10_002
    assert lines[1] == "0,0.9,0.9,0"
    assert lines[2].startswith("1,0.599")
    man = json.loads((out / "manifest.json").read_text())
    assert man["config"]["x0"] == 0.9 and man["seed"] == 7
    assert {"numpy", "scipy", "numba", "shiftwalk"} <= set(man["versions"])
    assert "run_seconds" in man["timings"]


def test_table1_report(tmp_path):
    code, out = run(tmp_path, "table1", "--grid", "4000")
    assert code == 0
    rep = json.loads((out / "table1.json").read_text())
    assert len(rep["rows"]) == 13
    assert rep["max_abs_error"] <= 0.005


def test_randomized_runs_need_seed(tmp_path, capsys):
    code, _ = run(tmp_path, "independence", "--map", "example1", "--eps", "4", "--delta", "4")
    assert code == 2
    assert "seed" in capsys.readouterr().err


def test_exit_codes(tmp_path):
    assert run(tmp_path, "trajectory", "--map", "nope")[0] == 2
    assert run(tmp_path, "validate", "--map", "example1", "--eps", "0.01", "--delta", "0.01")[0] == 3
    assert run(tmp_path, "conjugacy", "--map", "example1", "--eps", "0.01", "--delta", "0.01")[0] == 3
    assert run(tmp_path, "fp-convergence", "--eps", "0", "--delta", "0.1")[0] == 2
    assert run(tmp_path, "density", "--map", "climbing_sine", "--a", "0.5", "--grid", "200")[0] == 4


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"map": "example1", "eps": 4, "delta": 4, "x0": 0.2, "steps": 3}))
    code, out = run(tmp_path, "trajectory", "--config", str(cfg), "--steps", "2")
    assert code == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert len(lines) == 4 and lines[2].endswith(",1")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"map": "example1", "frobnicate": 1}))
    assert run(tmp_path, "trajectory", "--config", str(bad), name="b")[0] == 2


def test_manifest_reruns_byte_identical(tmp_path):
    args = ["ctrw", "--eps", "0.5", "--delta", "0.5", "--m", "20", "--horizon", "200",
            "--paths", "300", "--seed", "42"]
    code1, out1 = run(tmp_path, *args, name="a")
    code2, out2 = run(tmp_path, "ctrw", "--config", str(out1 / "manifest.json"), name="b")
    assert code1 == code2
    for f in ("ctrw.json", "jumps.csv"):
        assert (out1 / f).read_bytes() == (out2 / f).read_bytes()


@pytest.mark.parametrize("cmd", [
    ["validate", "--map", "example2", "--kappa", "1.5"],
    ["transitions", "--map", "example1", "--eps", "4", "--delta", "4", "--samples", "1000",
     "--seed", "1"],
    ["independence", "--map", "example1", "--eps", "4", "--delta", "4", "--paths", "2000",
     "--seed", "1"],
    ["conjugacy", "--map", "conjugated_example1", "--depth", "5", "--linear",
     '{"map": "example1", "eps": 4, "delta": 4}'],
    ["density", "--map", "example1", "--eps", "0.01", "--delta", "0.01", "--grid", "500"],
    ["density", "--map", "example1", "--eps", "0.01", "--delta", "0.01", "--method", "series"],
    ["fp-convergence", "--eps", "1e-4", "--delta", "1e-4", "--n", "30"],
])
def test_subcommands_write_artifacts(tmp_path, cmd):
    code, out = run(tmp_path, *cmd)
    assert code == 0
    man = json.loads((out / "manifest.json").read_text())
    for name in man["artifacts"]:
        assert (out / name).stat().st_size > 0
    assert man["command"] == cmd[0]


def test_transitions_exact_values(tmp_path):
    code, out = run(tmp_path, "transitions", "--map", "example1", "--eps", "4", "--delta", "4")
    rep = json.loads((out / "transitions.json").read_text())
    assert rep["exact"]["entries"]["0"] == pytest.approx(5 / 12, abs=1e-12)


def test_fp_convergence_within_envelope(tmp_path):
    code, out = run(tmp_path, "fp-convergence", "--eps", "1e-4", "--delta", "1e-4", "--n", "30")
    rep = json.loads((out / "fp_convergence.json").read_text())
    assert rep["within_bound"] and len(rep["iterations"]) == 30
