"""Command-line entry points: benchmark, pool generation, one-off estimates,
and the labeling service."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .acis import AcisConfig, acis_run
from .baselines import (
    calibrate_infer_estimate,
    gmm_estimate,
    herding_estimate,
    rand_estimate,
    sawade_estimate,
    topk_estimate,
)
from .bench import METHOD_ORDER, emit_report, run_trials
from .errors import LowshotError
from .pool import load_pool, save_pool
from .synth import SynthConfig, config_from_dict, synth_generate

DEFAULT_BUDGETS = (10, 20, 40, 100, 300, 600)


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _synth_section(raw: dict) -> SynthConfig:
    if "synth" in raw:
        raw = raw["synth"]
    return config_from_dict(raw)


def _cmd_bench(args) -> int:
    raw = _load_json(args.config) if args.config else {}
    synth = _synth_section(raw.get("synth", raw.get("pool", {})) if raw else {})
    methods = raw.get("methods", list(METHOD_ORDER))
    budgets = raw.get("budgets", list(DEFAULT_BUDGETS))
    trials = int(raw.get("trials", 20))
    alpha = float(raw.get("alpha", 0.5))
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
    reports = run_trials(synth, methods, budgets, trials, alpha=alpha, master_seed=seed)
    emit_report(reports, args.out, fmt=args.format)
    print(f"wrote {len(reports)} report rows to {args.out}")
    return 0


def _cmd_gen(args) -> int:
    raw = _load_json(args.config) if args.config else {}
    pool = synth_generate(_synth_section(raw))
    save_pool(pool, args.out)
    print(f"wrote pool of {pool.size} items to {args.out}")
    return 0


def _cmd_estimate(args) -> int:
    pool = load_pool(args.pool)
    if not pool.has_full_labels:
        print("estimate requires a pool with a label for every item", file=sys.stderr)
        return 2

    def oracle(i: int) -> int:
        return int(pool.labels[i])

    method = args.method
    trajectory: list[dict] = []
    var = None
    if method == "acis":
        result = acis_run(pool, oracle,
                          AcisConfig(budget=args.budget, alpha=args.alpha, seed=args.seed))
        g, var = result.g, result.var
        trajectory = [{"iteration": r.iteration, "g": r.g_hat, "var": r.estimate_var,
                       "batch_size": r.batch_size} for r in result.records]
    elif method == "topk":
        g = topk_estimate(pool, oracle, args.budget, args.alpha).g_hat
    elif method == "gmm":
        g = gmm_estimate(pool, oracle, args.budget, args.alpha).g_hat
    elif method == "herding":
        g = herding_estimate(pool, oracle, args.budget, args.alpha).g_hat
    elif method == "sawade":
        result = sawade_estimate(pool, oracle, args.budget, args.alpha, seed=args.seed)
        g, var = result.g_hat, result.estimate_var
    elif method == "rand":
        g = rand_estimate(pool, oracle, args.budget, args.alpha, seed=args.seed).g_hat
    elif method in ("iso", "platt"):
        kind = "isotonic" if method == "iso" else "platt"
        g = calibrate_infer_estimate(pool, oracle, args.budget, args.alpha,
                                     kind=kind, seed=args.seed).g_hat
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(method)
    print(json.dumps({"method": method, "budget": args.budget, "alpha": args.alpha,
                      "g": g, "var": var, "trajectory": trajectory}))
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    port = args.port if args.port is not None else int(os.environ.get("LOWSHOT_PORT", "8000"))
    data_dir = args.data_dir if args.data_dir is not None else os.environ.get("LOWSHOT_DATA_DIR")
    serve(port=port, data_dir=data_dir, host=args.host)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowshot",
        description="F-score estimation for binary classifiers on a labeling budget")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run the multi-trial method comparison")
    bench.add_argument("--config", help="JSON benchmark config")
    bench.add_argument("--out", required=True, help="output report path")
    bench.add_argument("--format", choices=("csv", "json"), default="csv")
    bench.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    bench.set_defaults(func=_cmd_bench)

    gen = sub.add_parser("gen", help="generate a synthetic labeled pool")
    gen.add_argument("--config", help="JSON synthetic-pool config")
    gen.add_argument("--out", required=True, help="output pool path (.json or .csv)")
    gen.set_defaults(func=_cmd_gen)

    est = sub.add_parser("estimate", help="estimate the F-score of one pool")
    est.add_argument("--pool", required=True, help="pool file with labels")
    est.add_argument("--method", required=True,
                     choices=("acis", "topk", "gmm", "herding", "sawade", "rand", "iso", "platt"))
    est.add_argument("--budget", type=int, required=True)
    est.add_argument("--alpha", type=float, default=0.5)
    est.add_argument("--seed", type=int, default=0)
    est.set_defaults(func=_cmd_estimate)

    serve_cmd = sub.add_parser("serve", help="run the labeling service")
    serve_cmd.add_argument("--port", type=int, default=None,
                           help="listen port (default: $LOWSHOT_PORT or 8000)")
    serve_cmd.add_argument("--data-dir", default=None,
                           help="session directory (default: $LOWSHOT_DATA_DIR or ./lowshot-sessions)")
    serve_cmd.add_argument("--host", default="127.0.0.1")
    serve_cmd.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LowshotError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
