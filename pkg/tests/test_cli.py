import json
import os
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from gapslab.cli import (CSV_COLUMNS, EXIT_CONFIG, SET_FAMILIES, SUBCOMMANDS, ConfigError, RunConfig,
                         build_parser, config_from_args, config_to_ini, csv_body, describe, main, make_params,
                         parse_ini, read_csv_rows)
from gapslab.geometry import ExperimentParams

SMALL = {
    "count": ["--n", "3", "--p", "2", "--d", "2", "--lambda", "0.1", "--samples", "20000"],
    "cube": ["--n", "2", "--lambda", "0.1", "--samples", "20000", "--sharp"],
    "counterexample": ["--eps", "0.1", "--samples", "300", "--buckets", "20"],
    "scan": ["--set", "annuli", "--samples", "20000", "--lambda", "0.2"],
}


def run_cli(tmp_path, args, name="out.csv"):
    out = tmp_path / name
    code = main(list(args) + ["--output", str(out)])
    return code, out.read_text()


params_strategy = st.builds(
    ExperimentParams,
    n=st.integers(2, 5), p=st.floats(1, 6), d=st.integers(1, 4), lam=st.floats(1e-3, 1),
    eps=st.floats(1e-3, 1), delta=st.floats(1e-3, 1), seed=st.integers(0, 2 ** 32))


@settings(max_examples=20, suppress_health_check=[HealthCheck.too_slow])
@given(params_strategy, st.sampled_from(SUBCOMMANDS), st.sampled_from(SET_FAMILIES), st.integers(1, 10 ** 7))
def test_config_round_trip(params, sub, family, samples):
    config = RunConfig(sub, params, family, (("eps", "0.25"),), samples, "out.csv", "plot.svg")
    assert parse_ini(config_to_ini(config)) == config


def test_missing_subcommand_is_config_error(tmp_path, capsys):
    path = tmp_path / "bad.ini"
    path.write_text("[params]\nn = 3\n")
    assert main(["count", "--config", str(path)]) == EXIT_CONFIG
    assert "run.subcommand" in capsys.readouterr().err
    with pytest.raises(ConfigError):
        parse_ini("[run]\nsubcommand = count\n[params]\nlambda = 2\n")


def test_invalid_values_exit_with_config_status(tmp_path, capsys):
    assert main(["count", "--lambda", "1.5"]) == EXIT_CONFIG
    assert "params.lambda" in capsys.readouterr().err
    assert main(["count", "--set", "torus"]) == EXIT_CONFIG
    path = tmp_path / "broken.ini"
    path.write_text("[run\nsubcommand = count\n")
    assert main(["count", "--config", str(path)]) == EXIT_CONFIG
    assert "line" in capsys.readouterr().err


def test_csv_header_records_version_seed_and_config(tmp_path):
    code, text = run_cli(tmp_path, ["count"] + SMALL["count"] + ["--seed", "42"])
    assert code == 0
    lines = text.splitlines()
    assert lines[0].startswith("# gapslab ")
    assert "# seed = 42" in lines
    assert any(line.startswith("# normalization:") for line in lines)
    assert "# config: subcommand = count" in lines
    header = next(line for line in lines if not line.startswith("#"))
    assert header.split(",") == list(CSV_COLUMNS)
    rows = read_csv_rows(str(tmp_path / "out.csv"))
    assert rows and rows[0]["experiment"] == "count" and rows[0]["seed"] == "42"


def test_saved_config_reproduces_run(tmp_path):
    saved = tmp_path / "run.ini"
    code, first = run_cli(tmp_path, ["count"] + SMALL["count"] + ["--seed", "3", "--save-config", str(saved)], "a.csv")
    assert code == 0
    code, second = run_cli(tmp_path, ["count", "--config", str(saved)], "b.csv")
    assert code == 0 and csv_body(first) == csv_body(second)


def test_describe_lists_every_section(capsys):
    assert main(["--describe"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert schema == json.loads(json.dumps(describe()))
    assert set(schema) == {"run", "params", "set", "options", "env"}
    assert set(schema["options"]) == set(SUBCOMMANDS)


def test_seed_precedence():
    parser = build_parser()
    env = {"GAPSLAB_SEED": "77"}
    assert config_from_args(parser.parse_args(["count"]), env).params.seed == 77
    assert config_from_args(parser.parse_args(["count", "--seed", "5"]), env).params.seed == 5
    assert config_from_args(parser.parse_args(["count"]), {}).params.seed == 0
    with pytest.raises(ConfigError):
        config_from_args(parser.parse_args(["count"]), {"GAPSLAB_SEED": "abc"})


def test_cube_needs_pattern_length_two(capsys):
    assert main(["cube", "--n", "1"]) == EXIT_CONFIG
    assert "params.n" in capsys.readouterr().err


def test_make_params_names_the_bad_key():
    with pytest.raises(ConfigError) as err:
        make_params({"n": "1"})
    assert err.value.key == "params.n"


@pytest.mark.parametrize("sub", ["count", "cube", "counterexample", "scan"])
def test_body_identical_across_worker_counts(tmp_path, sub):
    args = [sub] + SMALL[sub] + ["--seed", "9"]
    _, one = run_cli(tmp_path, args + ["--workers", "1"], "w1.csv")
    _, eight = run_cli(tmp_path, args + ["--workers", "8"], "w8.csv")
    assert csv_body(one) == csv_body(eight) and csv_body(one).count("\n") > 1


def test_identities_pass(tmp_path, capsys):
    code, text = run_cli(tmp_path, ["identities"])
    assert code == 0
    err = capsys.readouterr().err
    assert "FAIL" not in err and err.count("PASS") >= 5


def test_counterexample_passes_and_writes_svg(tmp_path, capsys):
    svg = tmp_path / "spectrum.svg"
    code, _ = run_cli(tmp_path, ["counterexample"] + SMALL["counterexample"] + ["--svg", str(svg)])
    assert code == 0
    assert "FAIL" not in capsys.readouterr().err
    root = ET.fromstring(svg.read_text())
    assert root.tag.endswith("svg") and root.get("version") == "1.1"


def test_discrete_and_report(tmp_path, capsys):
    code, text = run_cli(tmp_path, ["discrete", "--N", "9"])
    assert code == 0 and "FAIL" not in capsys.readouterr().err
    code, text = run_cli(tmp_path, ["scan", "--set", "full", "--d", "1", "--kind", "multiscale", "--J", "4",
                                    "--samples", "5000"], "scan.csv")
    assert code == 0
    svg = tmp_path / "scan.svg"
    assert main(["report", "--input", str(tmp_path / "scan.csv"), "--svg", str(svg), "--output",
                 str(tmp_path / "copy.csv")]) == 0
    ET.fromstring(svg.read_text())


def test_gowers_indicator(tmp_path, capsys):
    code, _ = run_cli(tmp_path, ["gowers", "--samples", "50000", "--grid-step", "0.005"])
    assert code == 0 and "FAIL" not in capsys.readouterr().err


def test_module_entry_point():
    env = dict(os.environ, GAPSLAB_SEED="1")
    proc = subprocess.run([sys.executable, "-m", "gapslab", "count", "--samples", "2000", "--workers", "1"],
                          capture_output=True, text=True, env=env, timeout=120)
    assert proc.returncode == 0
    assert "# seed = 1" in proc.stdout
