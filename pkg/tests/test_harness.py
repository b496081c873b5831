import csv
import io
import json
from pathlib import Path

import jsonschema
import pytest

from qlocverify.harness import (
    EXIT_CONFIG,
    EXIT_FAIL,
    EXIT_OK,
    RESULT_ROW_SCHEMA,
    ConfigError,
    ExperimentConfig,
    load_config,
    main,
    replay_row,
    rows_to_csv,
    run_experiment,
    run_sweep,
    trial_seed,
    with_param,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


HONEST = {
    "experiment": "verify",
    "stations": [{"id": "A", "x": 0.0}, {"id": "B", "x": 300.0}],
    "claimed_location": {"x": 150.0},
    "N": 10,
}


def test_exit_codes_for_shipped_configs(tmp_path):
    out = tmp_path / "o.json"
    assert main(["verify", "--config", str(CONFIGS / "honest_1d.json"), "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["verdict"] == "Verified"
    assert main(["verify", "--config", str(CONFIGS / "mislocated.json"), "--out", str(out)]) == EXIT_FAIL
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "Rejected" and doc["violating_stations"] == ["A"]


def test_malformed_json_reports_position(tmp_path, capsys):
    path = write(tmp_path, '{\n  "experiment": "verify",\n  "N": ,\n}')
    assert main(["verify", "--config", path]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "line 3" in err and "column" in err


@pytest.mark.parametrize("raw", [
    HONEST | {"speed_of_light": 3e8},
    HONEST | {"N": 0},
    HONEST | {"mask_kind": "pauli"},
    HONEST | {"experiment": "clone_attack"},
    HONEST | {"experiment": "clone_attack", "attack": {"kind": "cloner", "F_c": 0.7, "colour": 1}},
    HONEST | {"claimed_location": None},
])
def test_invalid_configs_exit_2(tmp_path, raw):
    assert main(["verify", "--config", write(tmp_path, raw)]) == EXIT_CONFIG
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(raw)


def test_missing_file_and_wrong_command(tmp_path):
    assert main(["verify", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG
    assert main(["attack", "--config", write(tmp_path, HONEST)]) == EXIT_CONFIG


def test_rows_match_schema_and_replay(tmp_path):
    cfg = ExperimentConfig.from_dict(HONEST | {"trials": 3})
    rows, _ = run_experiment(cfg)
    assert len(rows) == 3
    for row in rows:
        jsonschema.validate(json.loads(json.dumps(row)), RESULT_ROW_SCHEMA)
        assert replay_row(json.loads(json.dumps(row))) == row["metrics"]
    assert len({r["trial_seed"] for r in rows}) == 3


@pytest.mark.parametrize("name", ["honest_2d_ghz", "linear_optics", "clone_attack", "relay_attack", "mask_stats"])
def test_shipped_configs_produce_valid_rows(name):
    cfg = load_config(CONFIGS / f"{name}.json")
    cfg = with_param(cfg, "trials", min(cfg.trials, 200))
    rows, _ = run_experiment(cfg)
    for row in rows:
        jsonschema.validate(json.loads(json.dumps(row)), RESULT_ROW_SCHEMA)


def test_trial_seed_is_counter_based():
    seeds = [trial_seed(7, t) for t in range(10)]
    assert len(set(seeds)) == 10
    assert trial_seed(7, 3) == seeds[3]
    a, _ = run_experiment(ExperimentConfig.from_dict(HONEST | {"trials": 2, "seed": 7}))
    b, _ = run_experiment(ExperimentConfig.from_dict(HONEST | {"trials": 5, "seed": 7}))
    assert [r["metrics"] for r in a] == [r["metrics"] for r in b[:2]]


def test_mask_stats_single_trial_has_null_std(tmp_path):
    out = tmp_path / "m.json"
    raw = {"experiment": "mask_stats", "k": 2, "mask_kind": "euler", "trials": 1}
    assert main(["mask-stats", "--config", write(tmp_path, raw), "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["rows"][0]["metrics"]["std_fidelity"] is None


def test_csv_output(tmp_path):
    out = tmp_path / "o.csv"
    assert main(["verify", "--config", write(tmp_path, HONEST | {"trials": 2}), "--format", "csv",
                 "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 2 and rows[0]["metrics.verified"] == "True"
    assert rows_to_csv([]).strip() == ""


def test_cloner_sweep_over_N_decreases(tmp_path):
    cfg = load_config(CONFIGS / "clone_attack.json")
    cfg = with_param(cfg, "trials", 1000)
    rows, _ = run_sweep(cfg, "N", [5, 10, 20, 40], workers=1)
    analytic = [r["metrics"]["analytic_pass_probability"] for r in rows]
    assert analytic == sorted(analytic, reverse=True)
    assert analytic[1] == pytest.approx(0.7**10)


def test_sweep_attack_field_and_workers(tmp_path):
    out = tmp_path / "s.json"
    args = ["sweep", "--config", str(CONFIGS / "clone_attack.json"), "--param", "attack.F_c",
            "--values", "0.5,0.9", "--trials", "100", "--workers", "2", "--out", str(out)]
    assert main(args) == EXIT_OK
    rows = json.loads(out.read_text())["rows"]
    assert [r["params"]["attack"]["F_c"] for r in rows] == [0.5, 0.9]
    serial, _ = run_sweep(with_param(load_config(CONFIGS / "clone_attack.json"), "trials", 100),
                          "attack.F_c", [0.5, 0.9], workers=1)
    assert [r["metrics"] for r in rows] == json.loads(json.dumps([r["metrics"] for r in serial]))


def test_attack_command_relay(tmp_path):
    out = tmp_path / "r.json"
    assert main(["attack", "--config", str(CONFIGS / "relay_attack.json"), "--out", str(out)]) == EXIT_OK
    row = json.loads(out.read_text())["rows"][0]
    assert row["metrics"]["verdict"] == "Rejected" and row["metrics"]["max_rtt_excess"] > 1e-9
