import json
import subprocess
import sys

import pytest

from weylwalk.amplitude import Amplitude, Chirality, SpinMatrix
from weylwalk.cli import RunConfig, UsageError, main
from weylwalk.verification import SUITES, faulty_table_factory, run_suite


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _delta_file(tmp_path, rows=None):
    rows = rows or [{"x": [0, 0, 0], "up": {"re": "1", "im": "0", "log2_den": 0},
                     "down": {"re": "0", "im": "0", "log2_den": 0}}]
    path = tmp_path / "state.json"
    path.write_text(json.dumps(rows))
    return path


def test_propagate_corner(capsys):
    code, out, _ = _run(capsys, "propagate", "--from", "0,0,0", "--to", "2,2,2", "--t", "2", "--chi", "+")
    assert code == 0
    rec = json.loads(out)
    assert SpinMatrix.from_json(rec["entries"]) == SpinMatrix(((0, Amplitude(0, -1, 3)), (0, Amplitude(0, 1, 3))))
    assert rec["float_view"][0][1] == [0.0, -0.125]
    assert set(rec) == {"t", "chirality", "from", "to", "entries", "float_view"}


def test_propagate_identity_at_t0(capsys):
    code, out, _ = _run(capsys, "propagate", "--from", "0,0,0", "--to", "0,0,0", "--t", "0")
    assert code == 0
    assert SpinMatrix.from_json(json.loads(out)["entries"]) == SpinMatrix.identity()


def test_propagate_engines_agree(capsys):
    outs = []
    for engine in ("closed", "brute", "step"):
        code, out, _ = _run(capsys, "propagate", "--from", "1,1,1", "--to", "-1,3,1", "--t", "4", "--chi", "-",
                            "--engine", engine)
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]


def test_propagate_parity_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["propagate", "--from", "0,0,0", "--to", "1,0,0", "--t", "1"])
    assert exc.value.code == 64
    assert "parit" in capsys.readouterr().err
    code, _, err = _run(capsys, "propagate", "--from", "0,0,0", "--to", "1,1,1", "--t", "1")
    assert code == 64 and "sublattice" in err


def test_usage_errors_exit_64(capsys):
    for argv in (["propagate", "--from", "0,0,0", "--to", "0,0,0", "--t", "-1"],
                 ["cone", "--t", "2", "--budget", "-5"]):
        assert _run(capsys, *argv)[0] == 64
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 64
    with pytest.raises(UsageError):
        RunConfig("cone", fmt="xml")


def test_strict_no_path(capsys):
    argv = ["propagate", "--from", "0,0,0", "--to", "4,0,0", "--t", "2"]
    assert _run(capsys, *argv)[0] == 0
    code, out, _ = _run(capsys, *argv, "--strict")
    assert code == 2
    assert SpinMatrix.from_json(json.loads(out)["entries"]).is_zero()


def test_propagate_csv(capsys, tmp_path):
    target = tmp_path / "p.csv"
    code, out, _ = _run(capsys, "propagate", "--from", "0,0,0", "--to", "2,2,2", "--t", "2", "--format", "csv",
                        "--out", str(target))
    assert code == 0 and out == ""
    lines = target.read_text().splitlines()
    assert lines[0].startswith("t,chirality") and len(lines) == 5
    assert lines[2].endswith(",0.0,-0.125")


def test_evolve_delta_one_step(capsys, tmp_path):
    code, out, _ = _run(capsys, "evolve", "--state", str(_delta_file(tmp_path)), "--t", "1")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert len(rows) == 8
    assert {tuple(r["x"]) for r in rows} == {(a, b, c) for a in (-1, 1) for b in (-1, 1) for c in (-1, 1)}
    assert sum(r["probability_float"] for r in rows) == pytest.approx(1.0, abs=1e-12)
    total = sum((Amplitude.from_json(r["probability"]) for r in rows), Amplitude(0))
    assert total == 1


def test_evolve_t0_echoes_input(capsys, tmp_path):
    code, out, _ = _run(capsys, "evolve", "--state", str(_delta_file(tmp_path)), "--t", "0")
    rows = json.loads(out)["rows"]
    assert code == 0 and len(rows) == 1 and rows[0]["x"] == [0, 0, 0]
    assert Amplitude.from_json(rows[0]["up"]) == 1


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_evolve_engines_byte_identical(capsys, tmp_path, fmt):
    rows = [
        {"x": [0, 0, 0], "up": {"re": "1", "im": "1", "log2_den": 1}, "down": {"re": "0", "im": "0", "log2_den": 0}},
        {"x": [2, -2, 0], "up": {"re": "0", "im": "0", "log2_den": 0}, "down": {"re": "1", "im": "-1", "log2_den": 1}},
    ]
    state = _delta_file(tmp_path, rows)
    outputs = []
    for engine in ("step", "convolve"):
        out_path = tmp_path / f"{engine}.{fmt}"
        code, _, _ = _run(capsys, "evolve", "--state", str(state), "--t", "4", "--chi", "-", "--engine", engine,
                          "--format", fmt, "--out", str(out_path))
        assert code == 0
        outputs.append(out_path.read_bytes())
    assert outputs[0] == outputs[1]
    if fmt == "csv":
        probs = [float(line.split(",")[-1]) for line in outputs[0].decode().splitlines()[1:]]
        assert sum(probs) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize(
    "payload",
    [
        "not json",
        json.dumps({"x": [0, 0, 0]}),
        json.dumps([{"x": [0, 0, 1], "up": {"re": "1", "im": "0", "log2_den": 0},
                     "down": {"re": "0", "im": "0", "log2_den": 0}}]),
        json.dumps([{"x": [0, 0, 0], "up": {"re": "1", "im": "0"}}]),
        json.dumps([{"x": [0, 0, 0], "up": {"re": "1", "im": "0", "log2_den": -2},
                     "down": {"re": "0", "im": "0", "log2_den": 0}}]),
    ],
)
def test_evolve_malformed_state_exit_65(capsys, tmp_path, payload):
    path = tmp_path / "bad.json"
    path.write_text(payload)
    assert _run(capsys, "evolve", "--state", str(path), "--t", "1")[0] == 65


def test_evolve_missing_file_exit_65(capsys, tmp_path):
    assert _run(capsys, "evolve", "--state", str(tmp_path / "nope.json"), "--t", "1")[0] == 65


def test_cone_output_deterministic_across_jobs(capsys, tmp_path):
    texts = []
    for jobs in ("1", "2"):
        out_path = tmp_path / f"cone{jobs}.json"
        assert _run(capsys, "cone", "--t", "3", "--jobs", jobs, "--out", str(out_path))[0] == 0
        texts.append(out_path.read_bytes())
    assert texts[0] == texts[1]
    rec = json.loads(texts[0])
    assert len(rec["propagators"]) == 64


def test_verify_single_suite(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "unitarity", "--scale", "quick")
    assert code == 0
    assert out.startswith("PASS unitarity")


def test_verify_injected_fault(capsys, tmp_path):
    report = tmp_path / "verify.json"
    code, out, err = _run(capsys, "verify", "--suite", "unitarity", "--suite", "triple-engine", "--scale", "quick",
                          "--inject-fault", "--out", str(report))
    assert code == 1
    assert "FAIL unitarity" in out
    assert "first_counterexample" in err
    data = json.loads(report.read_text())
    assert not data["suites"][0]["passed"] and data["suites"][0]["counterexample"]


def test_verify_quick_all_and_parallel(capsys):
    code, out, _ = _run(capsys, "verify", "--scale", "quick", "--jobs", "2")
    assert code == 0
    assert len(out.splitlines()) == len(SUITES)
    assert all(line.startswith("PASS") for line in out.splitlines())


def test_bench_small_has_all_engines(capsys):
    code, out, _ = _run(capsys, "bench", "--t-max", "8")
    assert code == 0
    rows = json.loads(out)["rows"]
    last = rows[-1]
    assert last["t"] == 8
    assert {"closed_form", "brute_force", "step"} <= set(last["engines"])
    assert all("seconds" in e for e in last["engines"].values())
    assert all(r["engines_agree"] for r in rows)


def test_bench_gates_by_budget_and_is_deterministic(capsys):
    runs = []
    for _ in range(2):
        code, out, _ = _run(capsys, "bench", "--t-max", "100", "--seed", "7", "--step-max", "16")
        assert code == 0
        runs.append(json.loads(out))
    top = runs[0]["rows"][-1]
    assert top["t"] == 100
    assert top["engines"]["brute_force"] == {"skipped": "over budget"}
    assert "seconds" in top["engines"]["closed_form"]
    assert top["size"]["max_log2_den"] <= 200
    strip = lambda r: [(x["t"], x["target"], x["entries"], x["size"]) for x in r["rows"]]
    assert strip(runs[0]) == strip(runs[1])


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "weylwalk", "propagate", "--from", "0,0,0", "--to", "1,0,0", "--t", "1"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 64


def test_fault_factory_breaks_only_the_walk_suites():
    table_for = faulty_table_factory()
    assert not run_suite("unitarity", "quick", table_for=table_for).passed
    assert not run_suite("triple-engine", "quick", table_for=table_for).passed
    assert table_for(Chirality.PLUS)[1] != table_for(Chirality.MINUS)[1]
    with pytest.raises(KeyError):
        run_suite("no-such-suite")
