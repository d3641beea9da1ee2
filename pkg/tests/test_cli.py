import json
from importlib import resources
from pathlib import Path

import pytest

from kahlerq.cli import EXIT_BUDGET, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, main
from kahlerq.errors import ConfigError
from kahlerq.runner import config_schema, parse_config

CONFIGS = resources.files("kahlerq") / "configs"


def bundled(name):
    return Path(str(CONFIGS / name))


def write(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return path


def report_without_time(path):
    lines = Path(path).read_text().splitlines()
    return "\n".join(l for l in lines if '"wall_time_ms"' not in l)


def test_validate_run_passes(tmp_path, capsys):
    assert main(["run", str(bundled("validate_n16.json")), "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["pass"] is True
    assert report["config"]["kind"] == "Validate"
    assert {"name", "residual", "tolerance", "pass"} <= set(report["checks"][0])
    assert isinstance(report["wall_time_ms"], int)
    assert "PASS" in capsys.readouterr().out


def test_failing_check_exits_one(tmp_path):
    cfg = {"kind": "Evolve", "seed": 1, "params": {"n": 2, "t_final": 10.0, "steps": 10, "endpoint_tol": 1e-12}}
    assert main(["run", str(write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == EXIT_CHECK_FAILED
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["pass"] is False


def test_negative_n_names_the_field(tmp_path, capsys):
    cfg = {"kind": "Validate", "seed": 0, "params": {"n": -1}}
    assert main(["run", str(write(tmp_path, cfg))]) == EXIT_CONFIG
    assert "params.n" in capsys.readouterr().err


def test_unknown_field_rejected():
    with pytest.raises(ConfigError, match="params"):
        parse_config(json.dumps({"kind": "Validate", "seed": 0, "params": {"n": 2, "bogus": 1}}))
    with pytest.raises(ConfigError, match="seed"):
        parse_config(json.dumps({"kind": "Validate", "seed": -3, "params": {"n": 2}}))
    with pytest.raises(ConfigError, match="kind"):
        parse_config(json.dumps({"kind": "Nope", "seed": 0, "params": {}}))


def test_invalid_json_reports_position(tmp_path, capsys):
    path = write(tmp_path, '{\n  "kind": "Validate",\n  "seed": 0,,\n}')
    assert main(["run", str(path)]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "line 3" in err and "column" in err


def test_missing_config_file(tmp_path):
    assert main(["run", str(tmp_path / "absent.json")]) == EXIT_CONFIG


def test_budget_exceeded(tmp_path, monkeypatch):
    monkeypatch.setenv("KAHLERQ_BUDGET", "100")
    assert main(["run", str(bundled("ergodic_sqrt2.json")), "--out", str(tmp_path)]) == EXIT_BUDGET


def test_threads_must_be_positive(tmp_path):
    assert main(["run", str(bundled("validate_n16.json")), "--threads", "0"]) == EXIT_CONFIG


def test_schema_command(capsys):
    assert main(["schema"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == config_schema()


def test_plot(tmp_path):
    assert main(["run", str(bundled("commutator_gaussian.json")), "--out", str(tmp_path)]) == EXIT_OK
    assert main(["plot", str(tmp_path)]) == EXIT_OK
    dat = (tmp_path / "order.dat").read_text().splitlines()
    assert dat[0].startswith("# h")
    assert len(dat) == 4
    assert "order.dat" in (tmp_path / "plots.md").read_text()


def test_plot_without_report(tmp_path):
    assert main(["plot", str(tmp_path)]) == EXIT_CONFIG


def test_side_files(tmp_path):
    assert main(["run", str(bundled("evolve_sigma_x.json")), "--out", str(tmp_path / "e")]) == EXIT_OK
    header = (tmp_path / "e" / "trajectory.csv").read_text().splitlines()[0]
    assert header.startswith("t,q_1") and header.endswith("hsym,gnorm")
    assert main(["run", str(bundled("ergodic_resonant.json")), "--out", str(tmp_path / "r")]) == EXIT_OK
    assert (tmp_path / "r" / "running_average.csv").read_text().startswith("T,avg(T)\n")


def test_config_dir_in_config_overrides_default(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = {"kind": "Validate", "seed": 0, "params": {"n": 2}, "output_dir": "custom"}
    assert main(["run", str(write(tmp_path, cfg))]) == EXIT_OK
    assert (tmp_path / "custom" / "report.json").is_file()


@pytest.mark.parametrize("name", ["lift_n8.json", "tensor_bell.json", "validate_n16.json"])
def test_determinism_across_threads(tmp_path, name):
    outs = []
    for i, threads in enumerate((1, 1, 4)):
        out = tmp_path / f"run{i}"
        assert main(["run", str(bundled(name)), "--out", str(out), "--threads", str(threads)]) == EXIT_OK
        outs.append(report_without_time(out / "report.json"))
    assert outs[0] == outs[1] == outs[2]


def test_verbose_flag_either_side(tmp_path):
    cfg = str(bundled("validate_n16.json"))
    assert main(["-v", "run", cfg, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["run", cfg, "--out", str(tmp_path / "b"), "-v"]) == EXIT_OK
