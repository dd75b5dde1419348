import json

import numpy as np
import pytest
import yaml

from lifshitz_lab import __version__
from lifshitz_lab.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_OK,
    EXIT_THRESHOLD,
    ConfigError,
    ExperimentConfig,
    export,
    import_record,
    main,
    run,
)

EQUIV = {
    "kind": "equiv",
    "seed": 1,
    "model": {"dimension": 2, "sites": [
        {"preset": "zero"},
        {"preset": "ground_state_bump", "params": {"c": 0.1, "radius": 0.35},
         "tune": {"param": "scale", "lo": 0.1, "hi": 1.5}},
    ]},
    "numerics": {"n": 8},
}

IDS = {
    "kind": "ids",
    "seed": 3,
    "model": {"dimension": 1, "sites": [{"preset": "zero"}, {"preset": "cosine_bump", "params": {"amplitude": 20}}],
              "probabilities": [0.4, 0.6]},
    "numerics": {"n": 8, "L": 32, "trials": 50, "energies": {"min": 0.05, "max": 2.0, "count": 12},
                 "window": [0.2, 1.0], "fit_kind": "lifshitz"},
    "thresholds": {"slope_min": -10, "slope_max": 0},
}

STRIP = {
    "kind": "strip-scan",
    "seed": 2,
    "model": {"dimension": 1, "sites": [{"preset": "zero"}], "probabilities": [1.0]},
    "numerics": {"n": 8, "lengths": [2, 4, 8], "sequences": 2, "buffer_depth": 1, "buffer_potential": 25.0},
}


def write(tmp_path, cfg, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg))
    return p


def test_equiv_record(tmp_path):
    rec = run(ExperimentConfig.from_dict(EQUIV))
    e = np.array(rec.payload["pair_energies"])
    assert e.shape == (2, 2) and np.all(e < 1e-6)
    assert rec.payload["classes"] == [[0, 1]]
    assert rec.version == __version__
    paths = export(rec, tmp_path)
    rows = (tmp_path / "equiv.csv").read_text().splitlines()
    assert rows[0] == "k,l,j,pair_energy,related" and len(rows) == 5
    assert {p.name for p in paths} == {"result.json", "equiv.csv"}


def test_zero_trials_is_a_config_error(tmp_path):
    cfg = dict(IDS, numerics=dict(IDS["numerics"], trials=0))
    assert main(["ids", "--config", str(write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


@pytest.mark.parametrize("mutate", [
    lambda c: c.pop("seed"),
    lambda c: c.update(kind="nope"),
    lambda c: c["numerics"].update(tol_equiv=-1.0),
    lambda c: c["model"].update(sites=[]),
])
def test_schema_violations(mutate):
    cfg = json.loads(json.dumps(EQUIV))
    mutate(cfg)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(cfg)


def test_kind_mismatch(tmp_path):
    assert main(["ids", "--config", str(write(tmp_path, EQUIV))]) == EXIT_CONFIG


def test_missing_config_is_an_io_error(tmp_path):
    assert main(["equiv", "--config", str(tmp_path / "missing.yaml")]) == EXIT_IO


def test_unwritable_output_is_an_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["equiv", "--config", str(write(tmp_path, EQUIV)), "--out", str(blocker / "sub")]) == EXIT_IO


def test_reruns_are_byte_identical(tmp_path):
    p = write(tmp_path, IDS)
    for out in ("a", "b"):
        assert main(["ids", "--config", str(p), "--out", str(tmp_path / out), "--threads", "1"]) == EXIT_OK
    for name in ("ids.csv", "fit.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_ids_with_window_writes_two_csvs(tmp_path):
    rec = run(ExperimentConfig.from_dict(IDS))
    paths = export(rec, tmp_path, "csv")
    assert sorted(p.name for p in paths) == ["fit.csv", "ids.csv"]
    header = (tmp_path / "ids.csv").read_text().splitlines()[0]
    assert header == "E,N_mean,N_se,trials,censored"


def test_strip_scan_csv(tmp_path):
    rec = run(ExperimentConfig.from_dict(STRIP))
    export(rec, tmp_path, "csv")
    rows = (tmp_path / "strip-scan.csv").read_text().splitlines()
    assert rows[0] == "L,lambda_min,lambda_min_times_L2" and len(rows) == 4


def test_json_round_trip(tmp_path):
    rec = run(ExperimentConfig.from_dict(STRIP))
    export(rec, tmp_path, "json")
    assert import_record(tmp_path / "result.json") == rec


def test_echo_is_enough_to_rerun(tmp_path):
    rec = run(ExperimentConfig.from_dict(IDS))
    again = run(ExperimentConfig.from_dict(rec.config))
    assert again.payload == rec.payload
    for key in ("tol_eig",):
        assert key in run(ExperimentConfig.from_dict(EQUIV)).config["numerics"]
    assert "tol_equiv" in ExperimentConfig.from_dict(EQUIV).echo()["numerics"]


def test_seed_override(tmp_path):
    p = write(tmp_path, IDS)
    main(["ids", "--config", str(p), "--out", str(tmp_path / "s"), "--seed", "99"])
    assert import_record(tmp_path / "s" / "result.json").config["seed"] == 99


def test_assert_turns_breaches_into_exit_codes(tmp_path):
    cfg = dict(STRIP, thresholds={"slope_min": 5.0, "slope_max": 6.0})
    p = write(tmp_path, cfg)
    assert main(["strip-scan", "--config", str(p), "--out", str(tmp_path / "x")]) == EXIT_OK
    assert main(["strip-scan", "--config", str(p), "--out", str(tmp_path / "y"), "--assert"]) == EXIT_THRESHOLD


def test_unsupported_export_format(tmp_path):
    rec = run(ExperimentConfig.from_dict(STRIP))
    with pytest.raises(ValueError):
        export(rec, tmp_path, "xlsx")


@pytest.mark.parametrize("kind", ["dtn", "displacement", "coupling", "concavity", "property-p"])
def test_shipped_configs_run(kind, tmp_path):
    from pathlib import Path

    cfg = Path(__file__).resolve().parents[1] / "configs" / f"{kind}.yaml"
    assert main([kind, "--config", str(cfg), "--out", str(tmp_path), "--assert"]) == EXIT_OK
    assert (tmp_path / "result.json").exists()
