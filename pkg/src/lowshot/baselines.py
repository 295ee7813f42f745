"""Comparison methods for F-score estimation under a labeling budget.

Every baseline answers the same question as the adaptive loop — "what is
this classifier's F-score on the pool?" — from at most ``budget`` oracle
labels, but with simpler selection or inference:

- ``topk``: label the highest-scored items, count everything else negative.
- ``gmm``: label the highest-scored items, infer the rest from a
  two-component Gaussian mixture over the score distribution.
- ``herding``: deterministic kernel herding picks score-space
  representatives; plug-in on the labeled set.
- ``sawade``: one-shot importance sampling that trusts the raw scores as
  probabilities (no calibration, no iteration).
- ``rand``: uniform labels, plug-in on the sample.
- ``iso`` / ``platt``: uniform labels, fit a calibrator, estimate from
  expected true/false positive counts over the whole pool.
- ``acis_last``: the adaptive loop without trailing-window averaging
  (final batch only).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acis import AcisConfig, acis_run
from .calibration import _clamp_affine, fit_isotonic, fit_platt
from .errors import (
    DegenerateMetricError,
    DegenerateWeightsError,
    InsufficientDrawsError,
)
from .estimator import (
    exact_fscore,
    importance_distribution,
    is_fscore,
    make_draws,
    sample_until_new,
    variance_estimate,
)
from .pool import ScoredPool


@dataclass
class BaselineResult:
    """A single method's answer at a given budget."""

    method: str
    budget: int
    g_hat: float
    labels_used: list[tuple[int, int]]
    estimate_var: float | None = None


def _top_indices(pool: ScoredPool, k: int) -> np.ndarray:
    """The k highest-score indices, ties broken by item order."""
    order = np.argsort(-pool.scores, kind="stable")
    return order[: min(k, pool.size)]


def _plugin_fscore(true_labels, predicted_labels, alpha: float) -> float:
    return exact_fscore(true_labels, predicted_labels, alpha)


def topk_estimate(pool: ScoredPool, oracle, budget: int, alpha: float = 0.5) -> BaselineResult:
    """Label the top-scored items; treat every unlabeled item as a true negative."""
    if budget > pool.size:
        raise ValueError("budget cannot exceed the pool size")
    top = _top_indices(pool, budget)
    labels = [(int(i), int(oracle(int(i)))) for i in top]
    y_eff = np.zeros(pool.size, dtype=int)
    for i, y in labels:
        y_eff[i] = y
    g = _plugin_fscore(y_eff, pool.predicted, alpha)
    return BaselineResult(method="topk", budget=budget, g_hat=g, labels_used=labels)


def fit_gmm_1d(values, init_means, init_vars, init_mix, max_iter: int = 500,
               tol: float = 1e-9, var_floor: float = 1e-6):
    """Two-component 1-D Gaussian mixture by expectation-maximization.

    Returns ``(means, variances, mixing, responsibilities, loglik_trace)``
    where responsibilities has shape (n, 2) and the trace holds the total
    log-likelihood after every iteration (nondecreasing up to tolerance).
    """
    x = np.asarray(values, dtype=float)
    means = np.array(init_means, dtype=float)
    variances = np.maximum(np.array(init_vars, dtype=float), var_floor)
    mix = np.array(init_mix, dtype=float)
    mix = mix / mix.sum()

    trace: list[float] = []
    resp = np.full((x.size, 2), 0.5)
    prev_ll = -np.inf
    for _ in range(max_iter):
        log_pdf = (-0.5 * ((x[:, None] - means[None, :]) ** 2 / variances[None, :]
                           + np.log(2.0 * np.pi * variances[None, :])))
        weighted = np.log(mix)[None, :] + log_pdf
        norm = np.logaddexp(weighted[:, 0], weighted[:, 1])
        resp = np.exp(weighted - norm[:, None])
        ll = float(norm.sum())
        trace.append(ll)
        if ll - prev_ll < tol and np.isfinite(prev_ll):
            break
        prev_ll = ll
        counts = resp.sum(axis=0)
        counts = np.maximum(counts, 1e-12)
        mix = counts / x.size
        means = (resp * x[:, None]).sum(axis=0) / counts
        variances = (resp * (x[:, None] - means[None, :]) ** 2).sum(axis=0) / counts
        variances = np.maximum(variances, var_floor)
    return means, variances, mix, resp, trace


def gmm_estimate(pool: ScoredPool, oracle, budget: int, alpha: float = 0.5) -> BaselineResult:
    """Label the top-scored items; infer the rest from a score-space mixture.

    The labeled items' class statistics initialize the two components (an
    absent class starts at the corresponding score extreme); after fitting,
    the higher-mean component plays the positive class and each unlabeled
    item takes the label of its higher-posterior component.
    """
    if budget < 2:
        raise ValueError("needs at least two labels")
    top = _top_indices(pool, budget)
    labels = [(int(i), int(oracle(int(i)))) for i in top]
    labeled_idx = np.array([i for i, _ in labels], dtype=np.intp)
    labeled_y = np.array([y for _, y in labels], dtype=int)
    s = pool.scores.astype(float)
    global_var = max(float(s.var()), 1e-6)

    init_means = np.empty(2)
    init_vars = np.empty(2)
    for cls in (0, 1):
        member = s[labeled_idx[labeled_y == cls]]
        if member.size == 0:
            # class absent from the labels: anchor at the score extreme
            init_means[cls] = float(s.min()) if cls == 0 else float(s.max())
            init_vars[cls] = global_var
        else:
            init_means[cls] = float(member.mean())
            init_vars[cls] = max(float(member.var()), 1e-6)
    pos_frac = float(np.clip(labeled_y.mean(), 0.05, 0.95))
    means, variances, mix, resp, _ = fit_gmm_1d(
        s, init_means, init_vars, np.array([1.0 - pos_frac, pos_frac]))

    pos_comp = int(np.argmax(means))
    inferred = (resp[:, pos_comp] >= 0.5).astype(int)
    y_eff = inferred.copy()
    y_eff[labeled_idx] = labeled_y
    g = _plugin_fscore(y_eff, pool.predicted, alpha)
    return BaselineResult(method="gmm", budget=budget, g_hat=g, labels_used=labels)


def silverman_bandwidth(values) -> float:
    """Silverman's rule-of-thumb kernel bandwidth for 1-D data."""
    x = np.asarray(values, dtype=float)
    std = float(x.std())
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25)
    spread = min(std, iqr / 1.34) if iqr > 0 else std
    h = 0.9 * spread * x.size ** (-0.2)
    return h if h > 0 else 1.0


def herding_select(pool: ScoredPool, budget: int) -> list[int]:
    """Greedy kernel herding in score space; deterministic, no repeats.

    Gaussian kernel with Silverman bandwidth. Each step picks the index
    maximizing the mean kernel embedding minus the running average embedding
    of the selection so far; longer budgets extend shorter ones.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    budget = min(budget, pool.size)
    s = pool.scores.astype(float)
    h = silverman_bandwidth(s)
    inv = 1.0 / (2.0 * h * h)

    # mean kernel embedding evaluated at every candidate, chunked to bound memory
    mean_k = np.empty(pool.size)
    chunk = max(1, 2**22 // max(pool.size, 1))
    for start in range(0, pool.size, chunk):
        block = np.exp(-((s[start:start + chunk, None] - s[None, :]) ** 2) * inv)
        mean_k[start:start + chunk] = block.mean(axis=1)

    objective = mean_k.copy()
    selected: list[int] = []
    for t in range(budget):
        pick = int(np.argmax(objective))
        selected.append(pick)
        kernel_col = np.exp(-((s - s[pick]) ** 2) * inv)
        objective = objective * ((t + 1) / (t + 2)) + (mean_k - kernel_col) / (t + 2)
        objective[selected] = -np.inf
    return selected


def herding_estimate(pool: ScoredPool, oracle, budget: int, alpha: float = 0.5) -> BaselineResult:
    """Plug-in F-score over the herding-selected labeled subset."""
    chosen = herding_select(pool, budget)
    labels = [(i, int(oracle(i))) for i in chosen]
    y = np.array([v for _, v in labels])
    yhat = pool.predicted[np.array(chosen, dtype=np.intp)]
    g = _plugin_fscore(y, yhat, alpha)
    return BaselineResult(method="herding", budget=budget, g_hat=g, labels_used=labels)


def sawade_estimate(pool: ScoredPool, oracle, budget: int, alpha: float = 0.5,
                    seed: int = 0, eps: float = 1e-4) -> BaselineResult:
    """One-shot importance sampling that trusts raw scores as probabilities.

    Min-max-rescaled, eps-clamped scores stand in for p(y=1|x); the
    variance-minimizing plan needs a metric guess, which comes from the
    scores' own expected counts (tp = sum of scores over predicted
    positives, and so on). Samples over the full pool until ``budget``
    distinct items are labeled, keeping duplicate draws in the estimate.
    """
    if budget > pool.size:
        raise ValueError("budget cannot exceed the pool size")
    probs = _clamp_affine(pool.rescaled_scores(), eps)
    yhat = pool.predicted
    tp = float(probs[yhat == 1].sum())
    fp = float((1.0 - probs[yhat == 1]).sum())
    fn = float(probs[yhat == 0].sum())
    denom = alpha * (tp + fp) + (1.0 - alpha) * (tp + fn)
    g_guess = tp / denom if denom > 0 else 0.5

    plan = importance_distribution(probs, yhat, g_guess, alpha,
                                   np.arange(pool.size), pool.size)
    rng = np.random.default_rng(seed)
    drawn, fresh = sample_until_new(plan, budget, rng)
    labels = {i: int(oracle(i)) for i in fresh}
    draws = make_draws(drawn, plan, pool, labels, alpha)
    g = is_fscore(draws)
    try:
        _, estimate_var = variance_estimate(draws, g)
    except (InsufficientDrawsError, DegenerateWeightsError):
        estimate_var = None
    return BaselineResult(method="sawade", budget=budget, g_hat=g,
                          labels_used=[(i, labels[i]) for i in fresh],
                          estimate_var=estimate_var)


def rand_estimate(pool: ScoredPool, oracle, budget: int, alpha: float = 0.5,
                  seed: int = 0) -> BaselineResult:
    """Uniform labels without replacement; plug-in on the sample.

    Raises DegenerateMetric when the sample holds neither predicted nor true
    positives (the plug-in is undefined on it).
    """
    if budget > pool.size:
        raise ValueError("budget cannot exceed the pool size")
    rng = np.random.default_rng(seed)
    chosen = rng.permutation(pool.size)[:budget]
    labels = [(int(i), int(oracle(int(i)))) for i in chosen]
    y = np.array([v for _, v in labels])
    g = _plugin_fscore(y, pool.predicted[chosen], alpha)
    return BaselineResult(method="rand", budget=budget, g_hat=g, labels_used=labels)


def calibrate_infer_estimate(pool: ScoredPool, oracle, budget: int, alpha: float = 0.5,
                             kind: str = "isotonic", seed: int = 0,
                             eps: float = 1e-4) -> BaselineResult:
    """Uniform labels, one calibration fit, expected-count plug-in.

    Fits a calibrator of the given kind on the labeled (score, label) pairs,
    then forms expected counts over the whole pool — each unlabeled item
    contributes its calibrated probability where a label would go, labeled
    items contribute their true labels — and plugs them into the F-score.
    """
    if kind not in ("isotonic", "platt"):
        raise ValueError("kind must be 'isotonic' or 'platt'")
    if budget < 2:
        raise ValueError("needs at least two labels")
    if budget > pool.size:
        raise ValueError("budget cannot exceed the pool size")
    rng = np.random.default_rng(seed)
    chosen = rng.permutation(pool.size)[:budget]
    labels = [(int(i), int(oracle(int(i)))) for i in chosen]

    scores = pool.rescaled_scores()
    pairs = [(float(scores[i]), float(y)) for i, y in labels]
    fit = fit_isotonic(pairs, eps=eps) if kind == "isotonic" else fit_platt(pairs, eps=eps)

    contrib = fit.values_at(scores)
    for i, y in labels:
        contrib[i] = float(y)
    yhat = pool.predicted
    tp = float(contrib[yhat == 1].sum())
    fp = float((1.0 - contrib)[yhat == 1].sum())
    fn = float(contrib[yhat == 0].sum())
    denom = alpha * (tp + fp) + (1.0 - alpha) * (tp + fn)
    if denom == 0:
        raise DegenerateMetricError("expected counts give an undefined F-score")
    method = "iso" if kind == "isotonic" else "platt"
    return BaselineResult(method=method, budget=budget, g_hat=tp / denom, labels_used=labels)


def acis_last_estimate(pool: ScoredPool, oracle, budget: int, alpha: float = 0.5,
                       seed: int = 0) -> BaselineResult:
    """The adaptive loop with the final answer taken from the last batch only."""
    config = AcisConfig(budget=budget, alpha=alpha, avg_window=1, seed=seed)
    result = acis_run(pool, oracle, config)
    return BaselineResult(method="acis_last", budget=budget, g_hat=result.g,
                          labels_used=sorted(result.labels.items()),
                          estimate_var=result.var)
