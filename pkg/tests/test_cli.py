import json

import pytest

from levystep.cli import RunSpec, build_parser, main, run
from models import BM, HEJD2


@pytest.fixture
def model_file(tmp_path):
    def write(model, name="m.json"):
        path = tmp_path / name
        path.write_text(model.to_json())
        return str(path)

    return write


def test_check_bm_passes(model_file, capsys):
    assert main(["check", "--model", model_file(BM)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 5 and all(line.startswith("PASS") for line in out)


def test_malformed_model_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["check", "--model", str(bad)]) == 1
    assert "malformed" in capsys.readouterr().err
    assert main(["check", "--model", str(tmp_path / "missing.json")]) == 1
    bad.write_text(json.dumps({"drift": 1, "sigma": -1}))
    assert main(["check", "--model", str(bad)]) == 1


def test_unknown_flag_exit_1(model_file):
    with pytest.raises(SystemExit) as exc:
        main(["scale", "--model", model_file(BM), "--bogus", "3"])
    assert exc.value.code == 1


def test_help_documents_every_flag():
    text = build_parser().format_help()
    for flag in ("--model", "--p", "--q", "--rho", "--a", "--b", "--x", "--spot", "--strike", "--barrier", "--rate",
                 "--maturities", "--grid", "--paths", "--dt", "--seed", "--method", "--out", "--functional", "--force"):
        assert flag in text


def test_validation_errors(model_file, capsys):
    m = model_file(HEJD2)
    assert main(["density", "--model", m, "--p", "-1", "--x", "0", "--b", "1"]) == 1
    assert main(["density", "--model", m, "--p", "1", "--x", "0"]) == 1
    assert main(["price", "--model", m, "--spot", "100", "--strike", "100"]) == 1
    assert main(["scale", "--model", m, "--q", "nan"]) == 1


def test_scale_output_byte_identical(model_file, tmp_path):
    m = model_file(HEJD2)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (out1, out2):
        assert main(["scale", "--model", m, "--q", "1", "--x", "2", "--grid", "5", "--out", str(out)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[2] == "x,W,Z" and lines[3] == "0,0,1" and len(lines) == 8


def test_density_interval_selection(model_file, capsys):
    m = model_file(HEJD2)
    for flags, tag in ((["--a", "1"], "finite(0.0,1.0)"), (["--b", "1"], "halfline(-inf,1.0)"),
                       (["--a", "-1", "--b", "1"], "finite(-1.0,1.0)")):
        assert main(["density", "--model", m, "--p", "1", "--q", "0.5", "--x", "0.3", "--grid", "5"] + flags) == 0
        assert f"# interval={tag}" in capsys.readouterr().out


def test_price_rho_zero_matches_vanilla_run(model_file, capsys):
    m = model_file(BM)
    base = ["price", "--model", m, "--spot", "100", "--strike", "100", "--barrier", "90", "--maturities", "0.5,1"]
    assert main(base + ["--rho", "0"]) == 0
    a = capsys.readouterr().out
    assert main(base) == 0
    assert capsys.readouterr().out == a
    assert a.splitlines()[0] == "T,price,error_estimate,method"


def test_numerical_failure_exit_2(model_file, capsys):
    # W^(1)(1000) overflows a double: a numerical failure, not an input error
    assert main(["scale", "--model", model_file(HEJD2), "--q", "1", "--x", "1000"]) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_simulate_deterministic(model_file, capsys):
    m = model_file(BM)
    args = ["simulate", "--model", m, "--functional", "exit", "--a", "0", "--b", "1", "--x", "0.5",
            "--q", "1", "--paths", "500", "--dt", "0.01", "--seed", "3"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    assert first.splitlines()[0] == "side,estimate,std_error,n_effective"


def test_run_rejects_unknown_command(model_file):
    assert run(RunSpec("plot", model_file(BM))) == 1
