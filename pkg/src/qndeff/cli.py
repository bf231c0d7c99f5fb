"""Command-line front end.

Subcommands:

  report    efficiency report for a raw detector or a model config (JSON in,
            JSON out)
  sweep     parameter sweep to CSV + manifest; --preset fig1|fig4 or --config
  verify    run oracle-equivalence / property suites; exit 1 on any failure
  maximize  grid-plus-refinement search for the best linear-detector
            efficiency over (s, r_th)

Exit codes: 0 success, 1 verification failure, 2 usage or config error. The
QNDEFF_THREADS environment variable overrides the default worker count.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from ._version import __version__
from .models import AnalyticUnsupportedError, ModelConfigError
from .qnd import DetectorValidationError, QndDetector, efficiency_report
from .states import StateValidationError
from .sweeps import (
    MaximizeResult,
    SweepSpec,
    SweepSpecError,
    build_detector,
    default_thread_count,
    manifest_path_for,
    maximize_linear,
    preset_sweeps,
    run_sweep,
)
from .verify import DEFAULT_SEED, SUITES, run_suite

USAGE_ERROR = 2
VERIFY_ERROR = 1

_CONFIG_ERRORS = (
    DetectorValidationError,
    StateValidationError,
    ModelConfigError,
    AnalyticUnsupportedError,
    SweepSpecError,
    KeyError,
    TypeError,
    ValueError,
    json.JSONDecodeError,
)


def _load_json(path: str) -> dict:
    return json.loads(Path(path).read_text())


def _detector_from_config(data: dict) -> QndDetector:
    if "model" in data:
        model = data["model"]
        params = {k: v for k, v in data.items() if k != "model"}
        return build_detector(model, params)
    return QndDetector.from_json_dict(data)


def _cmd_report(args: argparse.Namespace) -> int:
    data = _load_json(args.config)
    detector = _detector_from_config(data)
    report = efficiency_report(detector)
    out = {"detector": detector.to_json_dict(), "report": report.to_json_dict()}
    print(json.dumps(out, indent=2))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    threads = args.threads if args.threads else default_thread_count()
    if args.preset:
        out_dir = Path(args.out or ".")
        written = []
        for stem, spec in preset_sweeps(args.preset):
            csv_path = out_dir / f"{stem}.csv"
            run_sweep(spec, csv_path, threads=threads)
            written.append(str(csv_path))
            written.append(str(manifest_path_for(csv_path)))
        print("\n".join(written))
        return 0
    if not args.config:
        print("sweep needs --preset or --config", file=sys.stderr)
        return USAGE_ERROR
    spec = SweepSpec.from_json_dict(_load_json(args.config))
    out_path = Path(args.out or "sweep.csv")
    run_sweep(spec, out_path, threads=threads)
    print(str(out_path))
    print(str(manifest_path_for(out_path)))
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    overall = True
    summaries = []
    for name in names:
        overrides: dict = {}
        if name in ("linear-mc", "povm-roundtrip", "properties"):
            overrides["seed"] = args.seed
        if name == "linear-mc" and args.samples:
            overrides["n"] = args.samples
        if name == "povm-roundtrip" and args.samples:
            overrides["n"] = args.samples
        if name == "properties" and args.samples:
            overrides["n_detectors"] = args.samples
        if args.tol is not None:
            if name == "linear-quad":
                overrides["d0_tol"] = args.tol
            elif name == "povm-roundtrip":
                overrides["tol"] = args.tol
        summary = run_suite(name, **overrides)
        overall = overall and summary["pass"]
        summaries.append(summary)
    print(json.dumps(summaries if len(summaries) > 1 else summaries[0], indent=2))
    return 0 if overall else VERIFY_ERROR


def _cmd_maximize(args: argparse.Namespace) -> int:
    result: MaximizeResult = maximize_linear(
        metric=args.metric,
        s_bounds=(args.s_min, args.s_max),
        rth_bounds=(args.rth_min, args.rth_max),
    )
    print(json.dumps(result.to_json_dict(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qndeff",
        description="Quantum efficiency of binary-outcome qubit detectors",
    )
    parser.add_argument("--version", action="version", version=f"qndeff {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_report = sub.add_parser("report", help="efficiency report from a config JSON")
    p_report.add_argument("--config", required=True, help="detector or model JSON file")
    p_report.set_defaults(func=_cmd_report)

    p_sweep = sub.add_parser("sweep", help="parameter sweep to CSV + manifest")
    p_sweep.add_argument("--preset", choices=("fig1", "fig4"))
    p_sweep.add_argument("--config", help="SweepSpec JSON file")
    p_sweep.add_argument("--out", help="output CSV path (or directory for presets)")
    p_sweep.add_argument("--threads", type=int, default=0)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument(
        "--suite", default="all", choices=(*sorted(SUITES), "all"),
    )
    p_verify.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_verify.add_argument("--samples", type=int, default=0)
    p_verify.add_argument("--tol", type=float, default=None)
    p_verify.add_argument("--threads", type=int, default=0)
    p_verify.set_defaults(func=_cmd_verify)

    p_max = sub.add_parser("maximize", help="maximize a linear-detector efficiency")
    p_max.add_argument("--metric", default="eta0", choices=("eta0", "eta"))
    p_max.add_argument("--s-min", type=float, default=0.01)
    p_max.add_argument("--s-max", type=float, default=3.0)
    p_max.add_argument("--rth-min", type=float, default=-4.0)
    p_max.add_argument("--rth-max", type=float, default=4.0)
    p_max.set_defaults(func=_cmd_maximize)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
