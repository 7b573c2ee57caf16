"""Command line front end.

Subcommands:

* ``rates --set <desc> --norm <desc> --d D --n N``: print the minimax rate
  bracket (and the optimal diagonal preconditioner when defined) as JSON.
* ``adversary --kind {lp,wlp} [--p P | --beta FILE] --d D --n N --out F``:
  emit a hard gradient sequence as CSV plus a JSON sidecar with its
  certified lower bound.
* ``run --config cfg.json --out trace.csv``: one experiment, trace CSV.
* ``sweep --config cfg.json --out table.csv``: full (d, n, rep) table.
* ``plot --in table.csv --out fig.svg``: SVG chart from a trace or table.

Set and norm descriptors are JSON objects, e.g.
``'{"kind": "lp_ball", "p": 2, "radius": 1}'`` or
``'{"kind": "weighted_lr", "r": 1, "weights": [1, 2, 3]}'``; use the string
"inf" for infinite exponents.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import adversaries, harness, rates
from .geometry import norm_from_config, set_from_config


def _json_ready(obj):
    """Recursively make a value JSON-serializable; infinities become 'inf'."""
    if isinstance(obj, float):
        if obj == float("inf"):
            return "inf"
        if obj == float("-inf"):
            return "-inf"
        return obj
    if isinstance(obj, (np.floating, np.integer)):
        return _json_ready(obj.item())
    if isinstance(obj, np.ndarray):
        return [_json_ready(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    return obj


def _descriptor(text: str, which: str) -> dict:
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemExit(f"error: --{which} is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise SystemExit(f"error: --{which} must be a JSON object")
    return cfg


def _cmd_rates(args) -> int:
    s = set_from_config(_descriptor(args.set, "set"))
    norm = norm_from_config(_descriptor(args.norm, "norm"))
    bracket = rates.minimax_rate(s, norm, args.d, args.n)
    out = {"lower": bracket.lower, "upper": bracket.upper,
           "regime": bracket.regime,
           "constants_included": bracket.constants_included}
    try:
        out["lambda_star"] = rates.optimal_lambda(s, norm, args.n, args.d)
    except ValueError:
        pass
    print(json.dumps(_json_ready(out), indent=2, sort_keys=True))
    return 0


def _cmd_adversary(args) -> int:
    if args.kind == "lp":
        if args.p is None:
            raise SystemExit("error: --kind lp requires --p")
        lam = np.ones(args.d)
        if args.lam is not None:
            parts = [float(v) for v in args.lam.split(",")]
            lam = np.full(args.d, parts[0]) if len(parts) == 1 else np.asarray(parts)
        instance = adversaries.lp_hard_instance(lam, args.p, args.d, args.n)
    else:
        if args.beta is None:
            raise SystemExit("error: --kind wlp requires --beta FILE")
        beta = np.loadtxt(args.beta, dtype=np.float64, ndmin=1)
        instance = adversaries.wlp_hard_instance(beta, args.alpha, args.d, args.n)
    adversaries.write_instance_csv(instance, args.out)
    print(f"wrote {instance.n} x {instance.d} gradient sequence to {args.out} "
          f"(certified lower bound {instance.certified_lower_bound:.6g})")
    return 0


def _load_config(path: str) -> harness.ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemExit(f"error: cannot read config {path}: {exc}")
    return harness.parse_config(raw)


def _cmd_run(args) -> int:
    trace = harness.run_experiment(_load_config(args.config))
    harness.write_trace_csv(trace, args.out)
    print(f"final metric {trace.final_metric:.17g}; wrote {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    rows = harness.sweep(_load_config(args.config))
    harness.write_table_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_plot(args) -> int:
    harness.plot_csv(args.in_path, args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ocobench",
        description="online convex optimization benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="minimax rate bracket for a (set, norm) pair")
    p.add_argument("--set", required=True, help="set descriptor (JSON)")
    p.add_argument("--norm", required=True, help="norm descriptor (JSON)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("adversary", help="emit a hard gradient sequence")
    p.add_argument("--kind", choices=("lp", "wlp"), required=True)
    p.add_argument("--p", type=float, help="lp exponent in [1, 2]")
    p.add_argument("--lam", help="diagonal quadratic weights (comma separated)")
    p.add_argument("--beta", help="file of per-coordinate weights, one per line")
    p.add_argument("--alpha", type=float, default=1.0,
                   help="wlp regularity exponent (default 1)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_adversary)

    p = sub.add_parser("run", help="run one configured experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run a (d, n, repetition) sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("plot", help="render an SVG chart from a CSV")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, harness.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
