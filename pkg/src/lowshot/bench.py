"""Multi-trial benchmarking of estimation methods on synthetic pools.

Runs every requested method at every budget for a number of independent
seeded trials against a pool with known labels, and reports MSE, bias, and
variance of each method's estimate versus the exact F-score, in plot-ready
CSV or JSON tables. Per-trial seeds derive from a single master seed, so the
whole benchmark is reproducible from one integer.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .acis import AcisConfig, acis_run
from .baselines import (
    calibrate_infer_estimate,
    gmm_estimate,
    herding_select,
    rand_estimate,
    sawade_estimate,
    topk_estimate,
)
from .errors import LowshotError, ReportIoError
from .estimator import exact_fscore
from .pool import ScoredPool
from .synth import SynthConfig, synth_generate

logger = logging.getLogger(__name__)

METHOD_ORDER = ("acis", "topk", "gmm", "herding", "sawade", "rand", "iso", "platt", "acis_last")

# methods with no random element: one trial tells the whole story
_DETERMINISTIC = frozenset({"topk", "gmm", "herding"})

# methods that predict their own variance alongside the estimate
_SELF_ASSESSING = frozenset({"acis", "acis_last", "sawade"})

_COLUMNS = ("method", "budget", "trials", "mse", "bias", "empirical_var",
            "mean_predicted_var", "runtime_ms", "failures")


@dataclass
class TrialReport:
    """Aggregate outcome of one (method, budget) cell."""

    method: str
    budget: int
    trials: int
    mse: float
    bias: float
    empirical_var: float
    mean_predicted_var: float | None
    runtime_ms: float
    failures: int = 0


def trial_seed(master_seed: int, method: str, budget: int, trial: int) -> int:
    """A 64-bit seed unique to one trial, stable across runs.

    The loop-ablation variant shares the primary method's seed stream so the
    two differ only in how the final answer is combined.
    """
    name = "acis" if method == "acis_last" else method
    key = METHOD_ORDER.index(name)
    seq = np.random.SeedSequence([int(master_seed), key, int(budget), int(trial)])
    return int(seq.generate_state(1, np.uint64)[0])


def _run_method(method: str, pool: ScoredPool, oracle, budget: int, alpha: float,
                seed: int) -> tuple[float, float | None]:
    """One trial of one method; returns (estimate, predicted variance or None)."""
    if method == "acis":
        result = acis_run(pool, oracle, AcisConfig(budget=budget, alpha=alpha, seed=seed))
        return result.g, result.var
    if method == "acis_last":
        result = acis_run(pool, oracle,
                          AcisConfig(budget=budget, alpha=alpha, avg_window=1, seed=seed))
        return result.g, result.var
    if method == "topk":
        return topk_estimate(pool, oracle, budget, alpha).g_hat, None
    if method == "gmm":
        return gmm_estimate(pool, oracle, budget, alpha).g_hat, None
    if method == "sawade":
        res = sawade_estimate(pool, oracle, budget, alpha, seed=seed)
        return res.g_hat, res.estimate_var
    if method == "rand":
        return rand_estimate(pool, oracle, budget, alpha, seed=seed).g_hat, None
    if method == "iso":
        return calibrate_infer_estimate(pool, oracle, budget, alpha,
                                        kind="isotonic", seed=seed).g_hat, None
    if method == "platt":
        return calibrate_infer_estimate(pool, oracle, budget, alpha,
                                        kind="platt", seed=seed).g_hat, None
    raise ValueError(f"unknown method: {method!r}")


def run_trials(pool_or_cfg, methods, budgets, trials: int, alpha: float = 0.5,
               master_seed: int = 0) -> list[TrialReport]:
    """Benchmark methods across budgets on one fully labeled pool.

    Accepts a ScoredPool with labels or a SynthConfig to generate one.
    Random methods get ``trials`` independent seeded runs; deterministic
    methods run once (their spread is exactly zero). A trial that raises is
    logged, counted in ``failures``, and excluded from the aggregates.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    pool = synth_generate(pool_or_cfg) if isinstance(pool_or_cfg, SynthConfig) else pool_or_cfg
    if not pool.has_full_labels:
        raise ValueError("benchmarking needs a fully labeled pool")
    true_labels = pool.labels

    def oracle(i: int) -> int:
        return int(true_labels[i])

    exact = exact_fscore(true_labels, pool.predicted, alpha)

    # herding is deterministic and its greedy selection only ever extends:
    # select once at the largest budget and slice prefixes per budget
    herding_order: list[int] | None = None
    if "herding" in methods:
        herding_order = herding_select(pool, min(max(budgets), pool.size))

    reports = []
    for method in methods:
        if method not in METHOD_ORDER:
            raise ValueError(f"unknown method: {method!r}")
        for budget in budgets:
            start = time.perf_counter()
            estimates: list[float] = []
            predicted_vars: list[float] = []
            failures = 0
            n_runs = 1 if method in _DETERMINISTIC else trials
            for trial in range(n_runs):
                seed = trial_seed(master_seed, method, budget, trial)
                try:
                    if method == "herding":
                        chosen = np.array(herding_order[:budget], dtype=np.intp)
                        y = true_labels[chosen]
                        g = exact_fscore(y, pool.predicted[chosen], alpha)
                        pvar = None
                    else:
                        g, pvar = _run_method(method, pool, oracle, budget, alpha, seed)
                except LowshotError as exc:
                    failures += 1
                    logger.warning("%s trial %d at budget %d failed: %s",
                                   method, trial, budget, exc)
                    continue
                estimates.append(g)
                if pvar is not None:
                    predicted_vars.append(pvar)
            runtime_ms = (time.perf_counter() - start) * 1000.0

            if estimates:
                err = np.array(estimates) - exact
                bias = float(err.mean())
                empirical_var = 0.0 if method in _DETERMINISTIC else float(((err - bias) ** 2).mean())
                mse = float((err**2).mean())
            else:
                bias = empirical_var = mse = float("nan")
            mean_predicted_var = (float(np.mean(predicted_vars))
                                  if method in _SELF_ASSESSING and predicted_vars else None)
            reports.append(TrialReport(
                method=method, budget=int(budget), trials=trials, mse=mse, bias=bias,
                empirical_var=empirical_var, mean_predicted_var=mean_predicted_var,
                runtime_ms=runtime_ms, failures=failures))
    return reports


def finite_dataset_variance(pool: ScoredPool, subset_sizes, trials: int,
                            alpha: float = 0.5, seed: int = 0) -> list[dict]:
    """Spread of the exact F-score over random subsets of each size.

    Even a fully labeled validation set is one draw from a larger
    population; this measures how much the exact metric moves with the draw.
    Returns one row per size with the empirical mean and variance.
    """
    if not pool.has_full_labels:
        raise ValueError("needs a fully labeled pool")
    rows = []
    for size in subset_sizes:
        size = int(size)
        if size > pool.size:
            raise ValueError("subset size cannot exceed the pool size")
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), size]))
        values = []
        failures = 0
        for _ in range(trials):
            chosen = rng.permutation(pool.size)[:size]
            try:
                values.append(exact_fscore(pool.labels[chosen], pool.predicted[chosen], alpha))
            except LowshotError:
                failures += 1
        arr = np.array(values)
        rows.append({
            "size": size,
            "trials": trials,
            "mean": float(arr.mean()) if values else float("nan"),
            "variance": float(arr.var()) if values else float("nan"),
            "failures": failures,
        })
    return rows


def _row_dict(report: TrialReport) -> dict:
    data = asdict(report)
    return {key: data[key] for key in _COLUMNS}


def emit_report(reports: list[TrialReport], path, fmt: str = "csv") -> None:
    """Write reports as a CSV or JSON table with a stable column order."""
    if fmt not in ("csv", "json"):
        raise ValueError("format must be 'csv' or 'json'")
    try:
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(_COLUMNS)
                for report in reports:
                    row = _row_dict(report)
                    writer.writerow(
                        ["" if row[c] is None else
                         (repr(row[c]) if isinstance(row[c], float) else row[c])
                         for c in _COLUMNS])
        else:
            with open(path, "w") as fh:
                json.dump([_row_dict(r) for r in reports], fh, indent=2)
                fh.write("\n")
    except OSError as exc:
        raise ReportIoError(f"could not write report to {path}: {exc}") from exc


def load_report(path, fmt: str | None = None) -> list[TrialReport]:
    """Read back a report table written by emit_report."""
    if fmt is None:
        fmt = "json" if str(path).endswith(".json") else "csv"
    try:
        if fmt == "csv":
            with open(path, newline="") as fh:
                rows = list(csv.DictReader(fh))
        else:
            with open(path) as fh:
                rows = json.load(fh)
    except OSError as exc:
        raise ReportIoError(f"could not read report from {path}: {exc}") from exc
    out = []
    for row in rows:
        out.append(TrialReport(
            method=row["method"],
            budget=int(row["budget"]),
            trials=int(row["trials"]),
            mse=float(row["mse"]),
            bias=float(row["bias"]),
            empirical_var=float(row["empirical_var"]),
            mean_predicted_var=(None if row["mean_predicted_var"] in ("", None)
                                else float(row["mean_predicted_var"])),
            runtime_ms=float(row["runtime_ms"]),
            failures=int(row["failures"]),
        ))
    return out


def mse_identity_holds(report: TrialReport, atol: float = 1e-9) -> bool:
    """Check mse = bias^2 + empirical_var (population forms)."""
    if math.isnan(report.mse):
        return True
    return abs(report.mse - (report.bias**2 + report.empirical_var)) <= atol
