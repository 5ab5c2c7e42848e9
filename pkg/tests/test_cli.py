import json
import subprocess
import sys

import pytest

from energybounds.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_simulate(capsys):
    code, out = _run(capsys, "simulate", "fact", "--n", "5")
    assert code == 0 and "279.100 pJ" in out.out and "r0=120" in out.out


def test_simulate_json(capsys):
    code, out = _run(capsys, "simulate", "reverse", "--n", "3", "--array", "1,2,3", "--json")
    assert code == 0 and json.loads(out.out)


@pytest.mark.parametrize("budget,code", [("1000", 0), ("300", 2), ("10", 3)])
def test_verify_exit_codes(capsys, budget, code):
    got, out = _run(capsys, "verify", "fact", "--n", "5", "--budget", budget)
    assert got == code
    assert out.out.split()[1].rstrip(":") in {"Accept", "Unknown", "Reject"}


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["verify", "fact", "--n", "5"])
    assert e.value.code == 64
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 64


def test_unknown_program(capsys):
    assert main(["analyze", "nosuchprogram"]) == 64


def test_analysis_error(tmp_path, capsys):
    f = tmp_path / "loop.toyisa"
    f.write_text("<f>:\n01: bu <01>\n")
    code, out = _run(capsys, "analyze", str(f))
    assert code == 1 and "[" in out.err


@pytest.mark.parametrize("cmd", ["analyze", "model-blocks", "report"])
def test_subcommands_run(capsys, cmd):
    code, out = _run(capsys, cmd, "fact")
    assert code == 0 and out.out


def test_analyze_json(capsys):
    code, out = _run(capsys, "analyze", "fact", "--json")
    doc = json.loads(out.out)
    assert code == 0 and doc["metric"] == "int-value"


def test_bench_deterministic(tmp_path):
    cmd = [sys.executable, "-m", "energybounds", "bench", "--seed", "7", "--programs", "fact,findMax",
           "--sizes", "5"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and b"findMax" in a
