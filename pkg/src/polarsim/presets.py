"""Built-in experiment configurations for the command line.

Each preset is a complete config dict, identical to what a JSON file
would decode to, so ``--preset name`` and ``--config file.json`` go
through exactly the same validation path.
"""

from __future__ import annotations

from copy import deepcopy

from .errors import ConfigError

_R = 0.7071067811865476  # 1/sqrt(2) to float precision

PRESETS: dict[str, dict] = {
    # One (state, observable) pair repeated: frequency ~ (1 + cos 45deg)/2.
    "strategy1": {
        "experiment": "strategy",
        "seed": 101,
        "plan": {
            "preset": "strategy1",
            "K": 2000,
            "parameters": {"n": [_R, 0.0, _R], "m": [0.0, 0.0, 1.0]},
        },
    },
    # Cycled states with one observable: simulates measuring a mixed state.
    "strategy2": {
        "experiment": "strategy",
        "seed": 202,
        "plan": {
            "preset": "strategy2",
            "K": 4000,
            "parameters": {
                "states": [
                    [0.0, 0.0, 1.0],
                    [1.0, 0.0, 0.0],
                    [0.0, 0.0, 1.0],
                    [0.0, 1.0, 0.0],
                ],
                "m": [0.0, 0.0, 1.0],
            },
        },
    },
    # One state with alternating observables: two interleaved subsequences.
    "strategy3": {
        "experiment": "strategy",
        "seed": 303,
        "plan": {
            "preset": "strategy3",
            "K": 4000,
            "parameters": {
                "n": [0.8414709848078965, 0.0, 0.5403023058681398],
                "observables": [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
            },
        },
    },
    # Both cycled: the schedule whose averages only a preselected
    # (state, observable) sequence can reproduce.
    "strategy4": {
        "experiment": "strategy",
        "seed": 404,
        "plan": {"preset": "strategy4", "K": 4000},
    },
    # Two-level detector, pulse left on: coherence beats and revives.
    "dynamics-d2": {
        "experiment": "dynamics",
        "seed": 505,
        "dimension": 2,
        "omega": 0.0,
        "g0": 1.0,
        "t_i": 0.0,
        "t_f": 12.0,
        "detector_init": "ground",
        "photon": [1.0, 0.0, 0.0],
        "t_max": 12.0,
        "dt": 0.02,
        "threshold": 0.9995,
    },
    # Singlet correlations: antiparallel, parallel, and orthogonal settings.
    "epr-singlet": {
        "experiment": "epr",
        "seed": 606,
        "state": {"type": "singlet"},
        "settings": [
            {"m_l": [0.0, 0.0, 1.0], "m_r": [0.0, 0.0, -1.0]},
            {"m_l": [0.0, 0.0, 1.0], "m_r": [0.0, 0.0, 1.0]},
            {"m_l": [0.0, 0.0, 1.0], "m_r": [1.0, 0.0, 0.0]},
        ],
        "N": 10000,
    },
    # Planar settings at 0/90 and 45/135 degrees: |S| -> 2*sqrt(2).
    "chsh-optimal": {
        "experiment": "chsh",
        "seed": 707,
        "a": [0.0, 0.0, 1.0],
        "a_prime": [1.0, 0.0, 0.0],
        "b": [_R, 0.0, _R],
        "b_prime": [_R, 0.0, -_R],
        "n_per_setting": 100000,
    },
    # Noiseless key duplication with a quarter of the key disclosed.
    "qkd-basic": {
        "experiment": "qkd",
        "seed": 808,
        "rounds": 4096,
        "epsilon": 0.0,
        "sample_fraction": 0.25,
        "bases": [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
        "emit_keys": True,
    },
}


def preset_names() -> list[str]:
    return sorted(PRESETS)


def get_preset(name: str) -> dict:
    """Deep copy of the named preset's config dict."""
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    return deepcopy(PRESETS[name])
