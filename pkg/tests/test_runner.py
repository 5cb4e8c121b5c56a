import json
import math
import os

import pytest

import spectra_runner
from slspectra import ConfigError
from spectra_runner import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main, parse_config, run


def rows(path):
    lines = [line for line in path.read_text().splitlines() if not line.startswith("#")]
    return [line.split(",") for line in lines]


def parse_error(text):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    return info.value


def test_duplicate_key_names_its_line():
    error = parse_error("command: classify\nfamily:\n  name: example4\n  kappa: 0.5\n  kappa: 0.6\n")
    assert error.line == 5
    assert "duplicate key 'kappa'" in str(error)


def test_unknown_key_names_its_line():
    error = parse_error("command: classify\nfamily:\n  name: free\n  omega: 1.0\nbogus: 1\n")
    assert error.line == 5
    assert str(error).startswith("line 5: ")


def test_out_of_range_family_parameter():
    error = parse_error("command: classify\nfamily:\n  name: example4\n  c: 0.0\n  kappa: 1.5\n")
    assert error.line == 5
    assert "kappa" in str(error)


def test_fixed_period_cannot_be_set():
    error = parse_error("command: classify\nfamily:\n  name: example4\n  kappa: 0.5\n  omega: 2pi\n")
    assert error.line == 5


def test_section_of_another_command():
    error = parse_error("command: classify\nfamily: {name: free, omega: 1.0}\nbands:\n  lambda_min: 0.0\n")
    assert error.line == 3
    assert "does not apply" in str(error)


@pytest.mark.parametrize("text", [
    "command: nope\nfamily: {name: free, omega: 1.0}\n",
    "command: classify\nfamily: {name: nope}\n",
    "command: classify\nfamily: {name: free, omega: 1.0}\njobs: two\n",
    "command: classify\nfamily: {name: free, omega: 1.0}\njobs: 0\n",
    "command: classify\nfamily: {name: free, omega: 1.0}\ntolerances: {tol: -1e-10}\n",
    "command: trace-scan\nfamily: {name: example4, kappa: 0.5, c: 0.0}\ntrace_scan: {lo: 0.0, hi: 1.0}\n",
    "command: trace-scan\nfamily: {name: example4, kappa: 0.5, c: 0.0}\ntrace_scan: {param: omega, lo: 0.0, hi: 1.0}\n",
    "command: dos\nfamily: {name: free, omega: 1.0}\ndos: {window: [1.0, 0.0], periods: [10]}\n",
    "command: turan\nfamily: {name: free, omega: 1.0}\nturan: {eta: [0.0, 0.0]}\n",
    "command: classify\nfamily: [free]\n",
    "command: classify\nfamily: {name: free, omega: 1.0\n",
    "",
])
def test_rejected_configs(text):
    parse_error(text)


@pytest.mark.parametrize("literal, value", [("010", 8), ("0x1f", 31), ("1_000", 1000), ("1:30", 90), ("12", 12)])
def test_integer_literal_forms(literal, value):
    config = parse_config(f"command: turan\nfamily: {{name: free, omega: 2.0}}\nturan:\n  n_max: {literal}\n")
    assert config.options["n_max"] == value


def test_malformed_integer_names_its_line():
    error = parse_error("command: turan\nfamily: {name: free, omega: 2.0}\nturan:\n  n_max: !!int abc\n")
    assert error.line == 4
    assert "n_max" in str(error)


def test_defaults_and_number_formats():
    config = parse_config("command: phi\nfamily:\n  name: free\n  omega: pi\ntolerances:\n  tol: 1e-9\n")
    assert config.params.omega == pytest.approx(math.pi)
    assert config.tol == 1e-9
    assert config.eps_case == 1e-6
    assert config.options == {"t": 0.0, "z": 0.0, "eta": [1.0, 0.0], "n_max": 200, "floor": 1e-8}
    assert config.run_id == "phi-free"
    config = parse_config("command: classify\nfamily: {name: free, omega: 2 pi}\n")
    assert config.params.omega == pytest.approx(2 * math.pi)
    parse_error("command: classify\nfamily: {name: free, omega: -pi}\n")


def test_command_line_overrides():
    text = "command: classify\nfamily: {name: free, omega: 1.0}\noutput: {dir: somewhere}\njobs: 2\n"
    config = parse_config(text)
    assert (config.out_dir, config.jobs, config.plot) == ("somewhere", 2, False)
    config = parse_config(text, out_dir="elsewhere", jobs=3, plot=True)
    assert (config.out_dir, config.jobs, config.plot) == ("elsewhere", 3, True)


def test_environment_defaults(monkeypatch):
    monkeypatch.setenv("SLSPECTRA_OUT_DIR", "from-env")
    monkeypatch.setenv("SLSPECTRA_JOBS", "4")
    config = parse_config("command: classify\nfamily: {name: free, omega: 1.0}\n")
    assert (config.out_dir, config.jobs) == ("from-env", 4)


def test_classify_run_writes_csv(tmp_path):
    text = "command: classify\nfamily: {name: example4, kappa: 0.5, c: 1.0}\n"
    assert run(parse_config(text, out_dir=str(tmp_path))) == EXIT_OK
    csv = tmp_path / "classify-example4" / "classify.csv"
    header = [line for line in csv.read_text().splitlines() if line.startswith("#")]
    assert header[0] == "# slspectra 0.1.0"
    assert any(line.startswith("# adaptive: M=n/a") for line in header)
    table = rows(csv)
    assert table[0] == ["family", "tag", "trace", "distance", "marginal", "verdict"]
    assert table[1][1] == "III"
    assert float(table[1][2]) == pytest.approx(-2.61, abs=0.01)
    assert (tmp_path / "classify-example4" / "log.txt").exists()


def test_runs_are_reproducible(tmp_path):
    text = "command: classify\nfamily: {name: example4, kappa: 0.5, c: 0.0}\n"
    run(parse_config(text, out_dir=str(tmp_path / "a")))
    run(parse_config(text, out_dir=str(tmp_path / "b")))
    first = (tmp_path / "a" / "classify-example4" / "classify.csv").read_bytes()
    assert first == (tmp_path / "b" / "classify-example4" / "classify.csv").read_bytes()


def test_trace_scan_run(tmp_path):
    text = ("command: trace-scan\nfamily: {name: example4, kappa: 0.5, c: 0.0}\n"
            "trace_scan: {param: c, lo: 0.0, hi: 1.0, count: 3}\noutput: {plot: true}\n")
    assert run(parse_config(text, out_dir=str(tmp_path))) == EXIT_OK
    run_dir = tmp_path / "trace-scan-example4"
    scan = rows(run_dir / "trace_scan.csv")
    assert scan[0] == ["param", "trace"]
    assert len(scan) == 4
    assert float(scan[1][1]) == pytest.approx(0.77, abs=0.01)
    roots = rows(run_dir / "roots.csv")
    assert len(roots) == 2
    assert 0.0 < float(roots[1][1]) < 1.0
    assert roots[1][2] == ""
    assert (run_dir / "trace_scan.svg").exists()


def test_numerical_failure_writes_error_json(tmp_path):
    text = "command: turan\nfamily: {name: example4, kappa: 0.5, c: 1.0}\nturan: {n_max: 5}\n"
    assert run(parse_config(text, out_dir=str(tmp_path))) == EXIT_NUMERIC
    record = json.loads((tmp_path / "turan-example4" / "error.json").read_text())
    assert record["type"] == "NotInBandError"
    assert record["exit_code"] == EXIT_NUMERIC
    assert record["command"] == "turan"


def test_main_reports_config_errors(tmp_path):
    config = tmp_path / "bad.yml"
    config.write_text("command: classify\nfamily:\n  name: example4\n  c: 0.0\n  kappa: 1.5\n")
    out = tmp_path / "out"
    assert main(["--config", str(config), "--out", str(out)]) == EXIT_CONFIG
    record = json.loads((out / "error.json").read_text())
    assert record["line"] == 5
    assert record["exit_code"] == EXIT_CONFIG


def test_main_runs_turan(tmp_path):
    config = tmp_path / "turan.yml"
    config.write_text("command: turan\nfamily: {name: free, omega: 2.0}\nturan: {z: 1.0, n_max: 20}\n"
                      "output: {run_id: t}\n")
    assert main(["--config", str(config), "--out", str(tmp_path), "--plot"]) == EXIT_OK
    table = rows(tmp_path / "t" / "turan.csv")
    assert table[0] == ["n", "turan", "cauchy_increment"]
    assert len(table) == 22
    assert all(float(r[1]) == pytest.approx(abs(math.sin(2.0)), rel=1e-7) for r in table[1:])
    assert os.path.exists(tmp_path / "t" / "turan.svg")


def test_unexpected_failure_writes_error_json(tmp_path, monkeypatch):
    def broken(*args, **kwargs):
        return 1 / 0

    monkeypatch.setattr(spectra_runner.spectral_class, "classify", broken)
    text = "command: classify\nfamily: {name: free, omega: 1.0}\n"
    assert run(parse_config(text, out_dir=str(tmp_path))) == EXIT_NUMERIC
    record = json.loads((tmp_path / "classify-free" / "error.json").read_text())
    assert record["type"] == "ZeroDivisionError"
    assert record["exit_code"] == EXIT_NUMERIC
    assert record["command"] == "classify"


def test_main_accepts_octal_integers(tmp_path):
    config = tmp_path / "turan.yml"
    config.write_text("command: turan\nfamily: {name: free, omega: 2.0}\nturan: {z: 1.0, n_max: 010}\n"
                      "output: {run_id: octal}\n")
    assert main(["--config", str(config), "--out", str(tmp_path)]) == EXIT_OK
    assert len(rows(tmp_path / "octal" / "turan.csv")) == 10

