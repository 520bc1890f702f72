"""Command-line entry point: ``risgmlb <subcommand> [options]``.

On failure the last line on stderr is a single JSON object
``{"error": <kind>, "message": <text>}`` and the exit code is nonzero
(2 for configuration errors, 3 for numerical failures, 4 for I/O errors).
"""

import argparse
import json
import sys

from risgmlb.errors import ConfigError, NumericError, ShapeError
from risgmlb.harness.config import ALGORITHMS, load_config
from risgmlb.harness import runners

COMMANDS = {
    "snr-sweep": runners.run_snr_sweep,
    "epoch-trace": runners.run_epoch_trace,
    "ris-sweep": runners.run_ris_sweep,
    "cost-compare": runners.run_cost_comparison,
    "gradient-check": runners.run_gradient_check,
}

EXIT_CODES = {"config": 2, "numeric": 3, "io": 4}


def _int_list(text):
    return [int(v) for v in text.split(",") if v]


def _float_list(text):
    return [float(v) for v in text.split(",") if v]


def build_parser():
    parser = argparse.ArgumentParser(prog="risgmlb",
                                     description="RIS beamforming benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--seed", type=int, help="base scenario seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--scenarios", type=int, help="number of scenarios")
        p.add_argument("--algorithms", help=f"comma-separated subset of {','.join(ALGORITHMS)}")
        p.add_argument("--epochs", type=int, help="GMLB outer epochs")
        p.add_argument("--snr-db", type=float, help="operating SNR (dB)")
        p.add_argument("--snr-list", type=_float_list, help="comma-separated SNRs (dB)")
        p.add_argument("--n-list", type=_int_list, help="comma-separated RIS sizes")
        p.add_argument("--workers", type=int, help="worker processes")
        p.add_argument("--record-time", action="store_true", help="also write timing.json")
    return parser


def overrides_from_args(args):
    out = {}
    simple = {"seed": "seed", "out": "output_dir", "scenarios": "scenario_count",
              "snr_db": "snr_db", "snr_list": "snr_db_list", "workers": "workers"}
    for arg, key in simple.items():
        value = getattr(args, arg)
        if value is not None:
            out[key] = value
    if args.algorithms is not None:
        out["algorithms"] = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    if args.n_list is not None:
        key = "trace_n_list" if args.command == "epoch-trace" else "n_list"
        out[key] = args.n_list
    if args.epochs is not None:
        out["gmlb"] = {"epochs": args.epochs}
    if args.record_time:
        out["record_time"] = True
    return out


def _fail(kind, message):
    print(json.dumps({"error": kind, "message": message}, sort_keys=True), file=sys.stderr)
    return EXIT_CODES[kind]


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, overrides_from_args(args))
        COMMANDS[args.command](cfg)
    except (ConfigError, ShapeError) as exc:
        return _fail("config", str(exc))
    except NumericError as exc:
        return _fail("numeric", str(exc))
    except OSError as exc:
        return _fail("io", str(exc))
    print(f"{args.command}: wrote {cfg.output_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
