"""Command-line experiment runner.

One subcommand per experiment family; each takes a JSON config file or
a built-in preset, an optional seed override, and an output directory
for the artifacts. Example:

    polarsim strategy --preset strategy4 --out runs/s4
    polarsim qkd --config session.json --seed 42 --out runs/qkd
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import KINDS, parse_config_dict
from .errors import ConfigError, PolarsimError
from .presets import get_preset, preset_names
from .report import RunReport, run

_HELP = {
    "strategy": "run a scheduled (state, observable) measurement sequence",
    "dynamics": "evolve the photon+detector state and scan for coherence revivals",
    "epr": "measure an entangled pair at fixed setting pairs",
    "chsh": "estimate the CHSH statistic on the singlet",
    "qkd": "run a key-duplication session with sifting and error estimation",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarsim",
        description=(
            "Polarization measurement simulator: seeded experiments with "
            "CSV/JSON artifacts and report figures."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="experiment")
    for kind in KINDS:
        p = sub.add_parser(kind, help=_HELP[kind])
        source = p.add_mutually_exclusive_group(required=True)
        source.add_argument("--config", type=Path, help="JSON config file")
        source.add_argument(
            "--preset",
            help="built-in configuration ({})".format(", ".join(preset_names())),
        )
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument(
            "--out",
            type=Path,
            help="artifact directory (default runs/<experiment>)",
        )
        p.add_argument(
            "--no-figures",
            action="store_true",
            help="skip the PNG figure, write CSV/JSON only",
        )
    return parser


def _resolve_raw(args) -> dict:
    if args.preset is not None:
        raw = get_preset(args.preset)
    else:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    kind = raw.get("experiment")
    if kind != args.command:
        raise ConfigError(
            f"config is for experiment {kind!r} but the subcommand is "
            f"{args.command!r}"
        )
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError(f"seed: must be non-negative, got {args.seed}")
        raw["seed"] = args.seed
    return raw


def _print_report(report: RunReport) -> None:
    s = report.summary
    print(f"experiment: {report.kind}  seed: {report.seed}")
    if report.kind == "strategy":
        freq = s["frequency_plus"]
        print(
            "K = {}   frequency(+1) = {:.4f} +/- {:.4f}   groups: {}".format(
                s["K"], freq["nu"], freq["stderr"], len(s["groups"])
            )
        )
    elif report.kind == "dynamics":
        revivals = s["revivals"]
        first = "{:.3f}".format(revivals[0]) if revivals else "none"
        print(
            "revivals: {} (first at {})   p1 drift: {:.2e}   final ratio: {:.4f}".format(
                len(revivals), first, s["p1_max_drift"], s["final"]["lambda_ratio"]
            )
        )
    elif report.kind == "epr":
        for entry in s["settings"]:
            print(
                "covariance = {:+.4f} (analytic {:+.4f})   mismatches: {}".format(
                    entry["covariance"],
                    entry["analytic_covariance"],
                    entry["mismatch_count"],
                )
            )
    elif report.kind == "chsh":
        print(
            "S = {:+.4f} +/- {:.4f}   (analytic {:+.4f}, local deterministic max {:.0f})".format(
                s["s_value"],
                s["s_stderr"],
                s["analytic_s"],
                s["local_deterministic_max"],
            )
        )
    elif report.kind == "qkd":
        print(
            "sifted: {}   QBER: {:.4f}   final key: {} bits   keys equal: {}".format(
                s["sifted_length"],
                s["qber"],
                s["final_key_length"],
                s["keys_equal"],
            )
        )
    for name in report.artifacts:
        print(f"wrote {report.out_dir / name}")
    print(f"done in {report.duration_s:.3f} s")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = args.out if args.out is not None else Path("runs") / args.command
    try:
        config = parse_config_dict(_resolve_raw(args))
        report = run(config, out_dir, figures=not args.no_figures)
    except PolarsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _print_report(report)
    return 0
