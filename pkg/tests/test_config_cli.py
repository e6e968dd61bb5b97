"""Config validation and command-line runner tests."""

import json

import pytest

from polarsim import cli
from polarsim.config import KINDS, parse_config, parse_config_dict
from polarsim.errors import ConfigError
from polarsim.presets import get_preset, preset_names
from polarsim.report import run

ALL_PRESETS = (
    "chsh-optimal",
    "dynamics-d2",
    "epr-singlet",
    "qkd-basic",
    "strategy1",
    "strategy2",
    "strategy3",
    "strategy4",
)

STRATEGY_PAIRS = {
    "experiment": "strategy",
    "seed": 1,
    "plan": [{"n": [0.0, 0.0, 1.0], "m": [0.0, 0.0, 1.0]}],
}


def test_preset_catalog():
    assert preset_names() == list(ALL_PRESETS)
    with pytest.raises(ConfigError, match="unknown preset"):
        get_preset("nope")
    # get_preset hands out copies, not shared state.
    get_preset("strategy1")["seed"] = -5
    assert get_preset("strategy1")["seed"] == 101


def test_every_preset_parses():
    for name in ALL_PRESETS:
        raw = get_preset(name)
        config = parse_config_dict(raw)
        assert config.kind in KINDS
        assert config.kind == raw["experiment"]
        assert config.seed == raw["seed"]
        assert config.raw["experiment"] == config.kind
        # The text entry point agrees with the dict one.
        assert parse_config(json.dumps(raw)).raw == config.raw


def test_config_shape_errors():
    with pytest.raises(ConfigError, match="JSON object"):
        parse_config_dict([1, 2, 3])
    with pytest.raises(ConfigError, match="not valid JSON"):
        parse_config("{not json")
    with pytest.raises(ConfigError, match="experiment: must be one of"):
        parse_config_dict({"experiment": "tomography", "seed": 0})
    with pytest.raises(ConfigError, match="seed: missing required field"):
        parse_config_dict({"experiment": "strategy", "plan": []})
    with pytest.raises(ConfigError, match="seed: must be >= 0"):
        parse_config_dict({**STRATEGY_PAIRS, "seed": -1})


def test_unit_vectors_are_not_normalized_silently():
    raw = get_preset("chsh-optimal")
    raw["a"] = [1.0, 1.0, 1.0]
    with pytest.raises(ConfigError, match="never normalized silently"):
        parse_config_dict(raw)


def test_strategy_plan_errors():
    bad = dict(STRATEGY_PAIRS)
    bad["plan"] = [{"n": [0.0, 0.0, 1.0]}]
    with pytest.raises(ConfigError, match=r"plan\[0\].m: missing required field"):
        parse_config_dict(bad)
    bad["plan"] = []
    with pytest.raises(ConfigError, match="at least one"):
        parse_config_dict(bad)
    bad["plan"] = {"preset": "strategy9", "K": 4}
    with pytest.raises(ConfigError, match="plan.preset: must be one of"):
        parse_config_dict(bad)
    bad["plan"] = {"preset": "strategy1", "K": 4, "parameters": {"q": [0, 0, 1]}}
    with pytest.raises(ConfigError, match="plan.parameters: unknown keys"):
        parse_config_dict(bad)
    bad["plan"] = {"preset": "strategy1", "K": 0}
    with pytest.raises(ConfigError, match="K: must be >= 1"):
        parse_config_dict(bad)


def test_generator_parameters_override_defaults():
    raw = dict(STRATEGY_PAIRS)
    raw["plan"] = {
        "preset": "strategy1",
        "K": 6,
        "parameters": {"n": [1.0, 0.0, 0.0]},
    }
    config = parse_config_dict(raw)
    plan = config.payload.plan
    assert plan.states.shape == (6, 3)
    assert plan.states[0].tolist() == [1.0, 0.0, 0.0]
    assert plan.observables[0].tolist() == [0.0, 0.0, 1.0]


def test_dynamics_errors():
    raw = get_preset("dynamics-d2")
    raw["t_f"] = raw["t_i"]
    with pytest.raises(ConfigError, match="t_f: must exceed t_i"):
        parse_config_dict(raw)
    raw = get_preset("dynamics-d2")
    raw["threshold"] = 1.0
    with pytest.raises(ConfigError, match="threshold: must be < 1.0"):
        parse_config_dict(raw)
    raw = get_preset("dynamics-d2")
    raw["dimension"] = 1
    with pytest.raises(ConfigError, match="dimension: must be >= 2"):
        parse_config_dict(raw)
    raw = get_preset("dynamics-d2")
    raw["detector_init"] = "thermal"
    with pytest.raises(ConfigError, match="detector_init"):
        parse_config_dict(raw)


def test_epr_errors():
    raw = get_preset("epr-singlet")
    raw["state"] = {"type": "triplet"}
    with pytest.raises(ConfigError, match="state.type: must be 'singlet' or 'pair'"):
        parse_config_dict(raw)
    raw = get_preset("epr-singlet")
    raw["settings"] = []
    with pytest.raises(ConfigError, match="settings: must be a non-empty list"):
        parse_config_dict(raw)
    raw = get_preset("epr-singlet")
    del raw["settings"][0]["m_r"]
    with pytest.raises(ConfigError, match=r"settings\[0\].m_r: missing"):
        parse_config_dict(raw)


def test_chsh_errors():
    raw = get_preset("chsh-optimal")
    del raw["b_prime"]
    with pytest.raises(ConfigError, match="b_prime: missing required field"):
        parse_config_dict(raw)
    raw = get_preset("chsh-optimal")
    raw["n_per_setting"] = 0
    with pytest.raises(ConfigError, match="n_per_setting: must be >= 1"):
        parse_config_dict(raw)


def test_qkd_errors():
    raw = get_preset("qkd-basic")
    raw["epsilon"] = 1.5
    with pytest.raises(ConfigError, match=r"epsilon: must be <= 1.0, got 1.5"):
        parse_config_dict(raw)
    raw = get_preset("qkd-basic")
    raw["bases"] = [[0.0, 0.0, 1.0]] * 3
    with pytest.raises(ConfigError, match="bases: must list one or two"):
        parse_config_dict(raw)
    raw = get_preset("qkd-basic")
    raw["emit_keys"] = "yes"
    with pytest.raises(ConfigError, match="emit_keys: must be true or false"):
        parse_config_dict(raw)
    raw = get_preset("qkd-basic")
    raw["sample_fraction"] = 0.0
    with pytest.raises(ConfigError, match="sample_fraction: must be > 0.0"):
        parse_config_dict(raw)
    raw = get_preset("qkd-basic")
    raw["rounds"] = 0
    with pytest.raises(ConfigError, match="rounds: must be >= 1"):
        parse_config_dict(raw)


EXPECTED_ARTIFACTS = {
    "strategy1": ("config.json", "events.csv", "strategy.png", "summary.json"),
    "qkd-basic": ("config.json", "rounds.csv", "qkd.png", "summary.json"),
}


def test_cli_preset_run_writes_artifacts(tmp_path):
    out = tmp_path / "s1"
    rc = cli.main(["strategy", "--preset", "strategy1", "--out", str(out)])
    assert rc == 0
    for name in EXPECTED_ARTIFACTS["strategy1"]:
        assert (out / name).is_file()
    echoed = json.loads((out / "config.json").read_text())
    assert echoed["experiment"] == "strategy"
    assert echoed["seed"] == 101
    summary = json.loads((out / "summary.json").read_text())
    assert summary["K"] == 2000


def test_cli_no_figures(tmp_path):
    out = tmp_path / "qkd"
    rc = cli.main(
        ["qkd", "--preset", "qkd-basic", "--out", str(out), "--no-figures"]
    )
    assert rc == 0
    assert not (out / "qkd.png").exists()
    assert (out / "rounds.csv").is_file()
    assert (out / "summary.json").is_file()


def test_cli_seed_override(tmp_path):
    out = tmp_path / "seeded"
    rc = cli.main(
        ["strategy", "--preset", "strategy1", "--seed", "7", "--out", str(out)]
    )
    assert rc == 0
    assert json.loads((out / "config.json").read_text())["seed"] == 7


def test_cli_config_file(tmp_path):
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(STRATEGY_PAIRS))
    out = tmp_path / "out"
    rc = cli.main(
        ["strategy", "--config", str(path), "--out", str(out), "--no-figures"]
    )
    assert rc == 0
    assert (out / "events.csv").is_file()


def test_cli_error_paths(tmp_path, capsys):
    out = str(tmp_path / "x")

    def expect_error(argv, fragment):
        rc = cli.main(argv)
        err = capsys.readouterr().err
        assert rc == 2
        assert err.startswith("error:")
        assert fragment in err

    expect_error(
        ["strategy", "--preset", "qkd-basic", "--out", out],
        "config is for experiment 'qkd'",
    )
    expect_error(["epr", "--preset", "no-such", "--out", out], "unknown preset")
    expect_error(
        ["qkd", "--config", str(tmp_path / "missing.json"), "--out", out],
        "cannot read config file",
    )
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    expect_error(["qkd", "--config", str(bad), "--out", out], "not valid JSON")
    expect_error(
        ["strategy", "--preset", "strategy1", "--seed", "-3", "--out", out],
        "seed: must be non-negative",
    )


def test_run_report_contract(tmp_path):
    config = parse_config_dict(get_preset("strategy1"))
    report = run(config, tmp_path / "r", figures=False)
    assert report.kind == "strategy"
    assert report.seed == 101
    assert report.artifacts == ("config.json", "events.csv", "summary.json")
    assert report.duration_s >= 0.0
    echoed = json.loads((tmp_path / "r" / "config.json").read_text())
    assert echoed == config.raw


def test_run_is_byte_deterministic(tmp_path):
    config = parse_config_dict(get_preset("qkd-basic"))
    first = run(config, tmp_path / "a", figures=True)
    run(config, tmp_path / "b", figures=True)
    for name in first.artifacts:
        assert (tmp_path / "a" / name).read_bytes() == (
            tmp_path / "b" / name
        ).read_bytes(), name
