"""Experiment execution and artifact writing.

``run`` drives one validated config to completion and writes its
artifacts into an output directory: a ``config.json`` echo, per-event
or per-setting CSV data, a ``summary.json`` with every derived number,
and a PNG figure restating the summary. All files are byte-identical
across runs with the same config and seed; the wall-clock duration
lives only in the returned report, never in an artifact.

Complex numbers are serialized as ``[re, im]`` pairs; matrices as
nested lists of such pairs. CSV floats use ``repr`` round-trip text.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dynamics, epr, qkd, strategy
from .config import (
    ChshRun,
    DynamicsRun,
    EprRun,
    ExperimentConfig,
    QkdRun,
    StrategyRun,
)
from .errors import PlanError
from .qstate import ket_from_bloch


def to_jsonable(value):
    """Recursively convert numpy and complex values to JSON-safe ones."""
    if isinstance(value, dict):
        return {key: to_jsonable(val) for key, val in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(val) for val in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, bool):
        return value
    if isinstance(value, complex):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def _write_json(path: Path, obj) -> None:
    text = json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"
    path.write_text(text, encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


@dataclass(frozen=True)
class RunReport:
    """Outcome of one experiment run: summary values and artifact names."""

    kind: str
    seed: int
    out_dir: Path
    summary: dict
    artifacts: tuple[str, ...]
    duration_s: float


def run(config: ExperimentConfig, out_dir, figures: bool = True) -> RunReport:
    """Execute the experiment and write artifacts into ``out_dir``."""
    start = time.perf_counter()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runner = {
        "strategy": _run_strategy,
        "dynamics": _run_dynamics,
        "epr": _run_epr,
        "chsh": _run_chsh,
        "qkd": _run_qkd,
    }[config.kind]
    summary, artifacts = runner(config, out, figures)
    _write_json(out / "config.json", config.raw)
    _write_json(out / "summary.json", summary)
    artifacts = ["config.json", *artifacts, "summary.json"]
    return RunReport(
        kind=config.kind,
        seed=config.seed,
        out_dir=out,
        summary=summary,
        artifacts=tuple(artifacts),
        duration_s=time.perf_counter() - start,
    )


def _run_strategy(config: ExperimentConfig, out: Path, figures: bool):
    payload: StrategyRun = config.payload
    plan = payload.plan
    outcomes = strategy.run_strategy(plan, config.seed)
    probs = strategy.predicted_probabilities(plan)
    bits = outcomes.bits
    rows = [
        [
            k,
            repr(float(plan.states[k, 0])),
            repr(float(plan.states[k, 1])),
            repr(float(plan.states[k, 2])),
            repr(float(plan.observables[k, 0])),
            repr(float(plan.observables[k, 1])),
            repr(float(plan.observables[k, 2])),
            repr(float(probs[k])),
            int(outcomes.d[k]),
            int(bits[k]),
        ]
        for k in range(len(plan))
    ]
    _write_csv(
        out / "events.csv",
        ["k", "n_x", "n_y", "n_z", "m_x", "m_y", "m_z", "P_k", "d_k", "b_k"],
        rows,
    )
    freq = strategy.frequency_estimate(outcomes)
    stats = strategy.partition_by_observable(plan, outcomes)
    try:
        mean_obs = strategy.mean_observable(plan)
    except PlanError:
        mean_obs = None
    summary = {
        "K": len(plan),
        "frequency_plus": {
            "nu": freq.nu,
            "stderr": freq.stderr,
            "count": freq.count,
        },
        "mean_observable": mean_obs,
        "average_density": strategy.average_density(plan),
        "groups": [
            {
                "direction": g.direction,
                "count": int(g.indices.size),
                "nu": g.frequency.nu,
                "stderr": g.frequency.stderr,
                "predicted_frequency": g.predicted_frequency,
                "average_density": g.average_state,
            }
            for g in stats.groups
        ],
    }
    artifacts = ["events.csv"]
    if figures:
        from . import plots

        plots.strategy_figure(
            out / "strategy.png", outcomes.d.astype(float), probs, stats.groups
        )
        artifacts.append("strategy.png")
    return summary, artifacts


def _run_dynamics(config: ExperimentConfig, out: Path, figures: bool):
    payload: DynamicsRun = config.payload
    model = payload.model
    ket = ket_from_bloch(payload.photon)
    initial = dynamics.build_joint_initial(model, ket)
    base = dynamics.decompose(initial)
    ts = np.arange(0.0, payload.t_max + 0.5 * payload.dt, payload.dt)
    p1s = []
    ratios = []
    rows = []
    for t in ts:
        dec = dynamics.decompose(dynamics.evolve(initial, model, float(t)))
        ratio = dec.lambda_norm / base.lambda_norm if base.lambda_norm > 0 else 0.0
        p1s.append(dec.p1)
        ratios.append(ratio)
        rows.append(
            [
                repr(float(t)),
                repr(dec.p1),
                repr(dec.p0),
                repr(dec.lambda_norm),
                repr(float(ratio)),
                repr(dec.lambda_frobenius),
            ]
        )
    _write_csv(
        out / "trajectory.csv",
        ["t", "p1", "p0", "lambda_norm", "lambda_ratio", "lambda_frobenius"],
        rows,
    )
    revivals = dynamics.recurrence_scan(
        model, ket, payload.t_max, payload.dt, payload.threshold
    )
    summary = {
        "dimension": model.dimension,
        "pulse_window": [model.t_on, model.t_off],
        "g0": model.g0,
        "photon": payload.photon,
        "grid": {
            "t_max": payload.t_max,
            "dt": payload.dt,
            "threshold": payload.threshold,
        },
        "lambda_norm_initial": base.lambda_norm,
        "p1_initial": base.p1,
        "p1_max_drift": float(np.max(np.abs(np.asarray(p1s) - base.p1))),
        "revivals": [float(t) for t in revivals],
        "final": {
            "t": float(ts[-1]),
            "lambda_ratio": float(ratios[-1]),
            "p1": float(p1s[-1]),
        },
    }
    artifacts = ["trajectory.csv"]
    if figures:
        from . import plots

        plots.dynamics_figure(
            out / "dynamics.png",
            ts,
            np.asarray(ratios),
            np.asarray(p1s),
            payload.threshold,
            revivals,
            (model.t_on, model.t_off),
        )
        artifacts.append("dynamics.png")
    return summary, artifacts


def _run_epr(config: ExperimentConfig, out: Path, figures: bool):
    payload: EprRun = config.payload
    rows = []
    setting_summaries = []
    labels = []
    empirical = []
    stderrs = []
    analytic = []
    for i, (m_l, m_r) in enumerate(payload.settings):
        d_l, d_r = epr.pair_outcomes(
            payload.state, m_l, m_r, payload.n_events, config.seed, stream_id=i
        )
        result = epr.correlation_experiment(
            payload.state, m_l, m_r, payload.n_events, config.seed, stream_id=i
        )
        exact = epr.covariance_analytic(payload.state, m_l, m_r)
        for k in range(payload.n_events):
            rows.append([i, k, int(d_l[k]), int(d_r[k]), int(d_l[k] * d_r[k])])
        setting_summaries.append(
            {
                "m_l": m_l,
                "m_r": m_r,
                "N": result.n_events,
                "covariance": result.covariance,
                "stderr": result.stderr,
                "analytic_covariance": exact,
                "match_count": result.match_count,
                "mismatch_count": result.mismatch_count,
                "bound": result.bound,
            }
        )
        labels.append("S{}".format(i + 1))
        empirical.append(result.covariance)
        stderrs.append(result.stderr)
        analytic.append(exact)
    _write_csv(
        out / "events.csv",
        ["setting_index", "k", "d_l", "d_r", "product"],
        rows,
    )
    summary = {
        "state": config.raw["state"],
        "N": payload.n_events,
        "settings": setting_summaries,
    }
    artifacts = ["events.csv"]
    if figures:
        from . import plots

        plots.epr_figure(out / "epr.png", labels, empirical, stderrs, analytic)
        artifacts.append("epr.png")
    return summary, artifacts


def _run_chsh(config: ExperimentConfig, out: Path, figures: bool):
    payload: ChshRun = config.payload
    result = epr.chsh_experiment(
        payload.a,
        payload.a_prime,
        payload.b,
        payload.b_prime,
        payload.n_per_setting,
        config.seed,
    )
    rows = []
    for term in result.terms:
        res = term.result
        rows.append(
            [
                term.label,
                term.sign,
                repr(float(res.m_l[0])),
                repr(float(res.m_l[1])),
                repr(float(res.m_l[2])),
                repr(float(res.m_r[0])),
                repr(float(res.m_r[1])),
                repr(float(res.m_r[2])),
                res.n_events,
                repr(res.covariance),
                repr(res.stderr),
                repr(term.analytic),
            ]
        )
    _write_csv(
        out / "settings.csv",
        [
            "label",
            "sign",
            "m_l_x",
            "m_l_y",
            "m_l_z",
            "m_r_x",
            "m_r_y",
            "m_r_z",
            "n_events",
            "covariance",
            "stderr",
            "analytic_covariance",
        ],
        rows,
    )
    summary = {
        "n_per_setting": payload.n_per_setting,
        "terms": [
            {
                "label": t.label,
                "sign": t.sign,
                "covariance": t.result.covariance,
                "stderr": t.result.stderr,
                "analytic_covariance": t.analytic,
                "m_l": t.result.m_l,
                "m_r": t.result.m_r,
            }
            for t in result.terms
        ],
        "s_value": result.s_value,
        "s_stderr": result.stderr,
        "analytic_s": result.analytic_s,
        "local_deterministic_max": epr.local_deterministic_chsh_max(),
        "classical_bound": 2.0,
        "quantum_bound": float(2.0 * np.sqrt(2.0)),
    }
    artifacts = ["settings.csv"]
    if figures:
        from . import plots

        plots.chsh_figure(
            out / "chsh.png",
            [t.label for t in result.terms],
            [t.result.covariance for t in result.terms],
            [t.result.stderr for t in result.terms],
            [t.analytic for t in result.terms],
            result.s_value,
            result.stderr,
        )
        artifacts.append("chsh.png")
    return summary, artifacts


def _run_qkd(config: ExperimentConfig, out: Path, figures: bool):
    payload: QkdRun = config.payload
    agents = qkd.coordinated_agents(
        payload.bases, payload.left_seed, payload.right_seed
    )
    noise = qkd.NoiseModel(epsilon=payload.epsilon)
    rec_l, rec_r = qkd.run_session(payload.rounds, agents, noise, config.seed)
    rows = [
        [
            l.index,
            l.basis_index,
            r.basis_index,
            int(l.basis_index == r.basis_index),
            l.bit,
            r.bit,
        ]
        for l, r in zip(rec_l, rec_r)
    ]
    _write_csv(
        out / "rounds.csv",
        ["round", "basis_l", "basis_r", "match", "bit_l", "bit_r"],
        rows,
    )
    key_l, key_r = qkd.sift(rec_l, rec_r)
    qber, (final_l, final_r) = qkd.estimate_qber(
        key_l, key_r, payload.sample_fraction, config.seed
    )
    keys_equal = bool(np.array_equal(final_l.bits, final_r.bits))
    summary = {
        "rounds": payload.rounds,
        "epsilon": payload.epsilon,
        "sample_fraction": payload.sample_fraction,
        "bases": payload.bases,
        "sifted_length": len(key_l),
        "disclosed_count": len(key_l) - len(final_l),
        "qber": qber,
        "final_key_length": len(final_l),
        "keys_equal": keys_equal,
        "bit_convention": qkd.BIT_CONVENTION,
        "final_key_left_hex": qkd.key_hex(final_l) if payload.emit_keys else None,
        "final_key_right_hex": qkd.key_hex(final_r) if payload.emit_keys else None,
    }
    artifacts = ["rounds.csv"]
    if figures:
        from . import plots

        plots.qkd_figure(
            out / "qkd.png",
            {
                "rounds": payload.rounds,
                "sifted": len(key_l),
                "disclosed": len(key_l) - len(final_l),
                "final": len(final_l),
            },
            qber,
        )
        artifacts.append("qkd.png")
    return summary, artifacts
