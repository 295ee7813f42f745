"""Importance-sampling estimation of F-scores from partially labeled pools.

The metric is the alpha-weighted F-score

    G = tp / (alpha*(tp+fp) + (1-alpha)*(tp+fn)),

with alpha=0.5 giving F1, alpha=1 precision, and alpha=0 recall. Drawing
items x from a proposal distribution q and labeling them yields the
self-normalized estimator

    G_hat = sum(w*l) / sum(w),   w = p(x)/q(x) * v,   v = alpha*yhat + (1-alpha)*y,

where l = 1 iff yhat == y and p is the uniform population density 1/n.
This module provides that estimator, the variance-minimizing proposal built
from a calibrator, a single-run variance estimate with a generalized Bessel
correction, and the mass-weighted combination of estimates across batches.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllZeroMassError,
    DegenerateMetricError,
    DegenerateWeightsError,
    EmptyInputError,
    IdMismatchError,
    InsufficientDrawsError,
    MissingLabelError,
    ZeroWeightMassError,
)
from .pool import ScoredPool


@dataclass(frozen=True)
class LabeledDraw:
    """One draw of a labeled item, carrying its importance weight.

    ``loss_complement`` is 1 when the prediction matched the true label.
    ``provenance`` distinguishes items drawn from this batch's proposal
    ("fresh") from previously labeled items folded back in ("reused").
    """

    index: int
    true_label: int
    weight: float
    loss_complement: int
    provenance: str = "fresh"


@dataclass
class SamplingPlan:
    """A discrete proposal distribution over pool indices.

    ``mass`` is a pool-length vector of probabilities summing to 1; ``domain``
    lists exactly the indices with positive mass. ``p_x`` is the uniform
    population density each draw's weight is measured against.
    """

    domain: np.ndarray
    mass: np.ndarray
    pool_size: int

    def __post_init__(self):
        self.domain = np.asarray(self.domain, dtype=np.intp)
        self.mass = np.asarray(self.mass, dtype=float)
        if self.mass.shape != (self.pool_size,):
            raise ValueError("mass must have one entry per pool item")
        inside = self.mass[self.domain]
        if np.any(inside <= 0):
            raise ValueError("every domain index must carry positive mass")
        if abs(inside.sum() - 1.0) > 1e-9:
            raise ValueError("plan mass must sum to 1 over the domain")
        if not np.isclose(self.mass.sum(), inside.sum(), rtol=0, atol=1e-12):
            raise ValueError("mass outside the domain must be zero")

    @property
    def p_x(self) -> float:
        return 1.0 / self.pool_size


@dataclass
class IterationRecord:
    """Everything one estimation batch produced.

    ``estimate_var`` is the estimated variance of ``g_hat`` itself
    (asymptotic variance divided by the draw count); both variance fields are
    None when no stable estimate existed (too few draws, or one weight
    dominating). ``weight_mass`` is the total importance weight of ``draws``.
    """

    iteration: int
    batch_size: int
    draws: list[LabeledDraw]
    g_hat: float
    asymptotic_var: float | None
    estimate_var: float | None
    weight_mass: float
    warnings: list[str] = field(default_factory=list)


def exact_fscore(true_labels, predicted_labels, alpha: float = 0.5) -> float:
    """Alpha-weighted F-score from fully known labels.

    Raises DegenerateMetric when there are neither predicted positives nor
    true positives (the denominator vanishes).
    """
    y = np.asarray(true_labels)
    yhat = np.asarray(predicted_labels)
    if y.shape != yhat.shape:
        raise ValueError("label vectors must have equal length")
    tp = int(np.sum((y == 1) & (yhat == 1)))
    fp = int(np.sum((y == 0) & (yhat == 1)))
    fn = int(np.sum((y == 1) & (yhat == 0)))
    denom = alpha * (tp + fp) + (1.0 - alpha) * (tp + fn)
    if denom == 0:
        raise DegenerateMetricError(
            "undefined F-score: no predicted positives and no true positives"
        )
    return tp / denom


def restrict_domain(pool: ScoredPool, iteration_index: int, topk_multiplier: int) -> np.ndarray:
    """Indices of the top-scored slice the proposal is allowed to touch.

    Size grows linearly with the 0-based iteration index:
    ``topk_multiplier * (iteration_index + 1) * n_pos`` where n_pos counts
    predicted positives; ties broken by item order; capped at the pool size.
    With no predicted positives the whole pool is returned.
    """
    n_pos = int(pool.predicted.sum())
    if n_pos == 0:
        return np.arange(pool.size, dtype=np.intp)
    k = min(pool.size, topk_multiplier * (iteration_index + 1) * n_pos)
    order = np.argsort(-pool.scores, kind="stable")
    return np.sort(order[:k]).astype(np.intp)


def importance_distribution(probs, predicted_labels, g_prev: float, alpha: float,
                            domain, pool_size: int) -> SamplingPlan:
    """Variance-minimizing proposal given calibrated positive-probabilities.

    For an item with calibrated probability c and current estimate g, the
    unnormalized mass is

        predicted 1:  p * sqrt(c*(1-g)^2 + alpha^2*(1-c)*g^2)
        predicted 0:  p * (1-alpha) * sqrt(c*g^2)

    with p = 1/pool_size, zero outside ``domain``, normalized to sum 1.
    Raises AllZeroMass when every mass vanishes (e.g. alpha=1 with only
    predicted negatives in the domain).
    """
    probs = np.asarray(probs, dtype=float)
    yhat = np.asarray(predicted_labels)
    d = np.sort(np.asarray(list(domain), dtype=np.intp))
    if d.size == 0:
        raise EmptyInputError("domain must be nonempty")
    c = probs[d]
    if np.any((c <= 0.0) | (c >= 1.0)):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    g = float(g_prev)
    p = 1.0 / pool_size
    m_pos = p * np.sqrt(c * (1.0 - g) ** 2 + alpha**2 * (1.0 - c) * g**2)
    m_neg = p * (1.0 - alpha) * np.sqrt(c * g**2)
    m = np.where(yhat[d] == 1, m_pos, m_neg)
    total = m.sum()
    if total <= 0.0:
        raise AllZeroMassError("every sampling mass is zero; widen the domain or sample uniformly")
    mass = np.zeros(pool_size)
    mass[d] = m / total
    return SamplingPlan(domain=d[m > 0], mass=mass, pool_size=pool_size)


def uniform_plan(pool_size: int, domain=None) -> SamplingPlan:
    """Equal mass over ``domain`` (default: the whole pool)."""
    if domain is None:
        d = np.arange(pool_size, dtype=np.intp)
    else:
        d = np.sort(np.asarray(list(domain), dtype=np.intp))
    if d.size == 0:
        raise EmptyInputError("domain must be nonempty")
    mass = np.zeros(pool_size)
    mass[d] = 1.0 / d.size
    return SamplingPlan(domain=d, mass=mass, pool_size=pool_size)


def weighted_sample(plan: SamplingPlan, n_draws: int, rng: np.random.Generator) -> np.ndarray:
    """``n_draws`` i.i.d. index draws (with replacement) from the plan.

    Inverse-CDF sampling over the domain: robust to the ±1e-9 normalization
    slack and deterministic given the generator state.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be at least 1")
    cdf = np.cumsum(plan.mass[plan.domain])
    u = rng.random(n_draws) * cdf[-1]
    pos = np.searchsorted(cdf, u, side="right")
    return plan.domain[np.minimum(pos, cdf.size - 1)]


def sample_until_new(plan: SamplingPlan, target: int, rng: np.random.Generator,
                     known=frozenset()) -> tuple[list[int], list[int]]:
    """Draw i.i.d. until ``target`` distinct indices outside ``known`` appear.

    Returns ``(drawn, fresh)``: every draw up to and including the one that
    completed the quota (duplicates and re-draws of known indices are kept —
    they carry importance weight but cost no labeling budget), and the
    distinct new indices in first-drawn order. Draws in deterministic chunks
    so the generator state after the call is a pure function of its inputs.
    """
    if target < 1:
        raise ValueError("target must be at least 1")
    known = set(known)
    drawn: list[int] = []
    fresh: list[int] = []
    fresh_set: set[int] = set()
    chunk = max(64, 4 * target)
    while True:
        for raw in weighted_sample(plan, chunk, rng):
            idx = int(raw)
            drawn.append(idx)
            if idx not in known and idx not in fresh_set:
                fresh_set.add(idx)
                fresh.append(idx)
                if len(fresh) == target:
                    return drawn, fresh
        chunk = min(chunk * 2, 1 << 20)


def make_draws(indices, plan: SamplingPlan, pool: ScoredPool, labels: dict[int, int],
               alpha: float) -> list[LabeledDraw]:
    """Attach weights and agreement flags to freshly drawn indices.

    Per draw: v = alpha*yhat + (1-alpha)*y, weight = (p/q)*v with q the
    plan's mass at the index. True negatives get weight 0 and never move the
    estimate. Raises MissingLabel when a drawn index has no label.
    """
    idx = np.asarray(list(indices), dtype=np.intp)
    if idx.size == 0:
        return []
    try:
        y = np.array([labels[int(i)] for i in idx], dtype=float)
    except KeyError as exc:
        raise MissingLabelError(f"no label available for drawn index {exc.args[0]}") from None
    yhat = pool.predicted[idx].astype(float)
    v = alpha * yhat + (1.0 - alpha) * y
    w = (plan.p_x / plan.mass[idx]) * v
    match = (y == yhat).astype(int)
    return [
        LabeledDraw(index=int(i), true_label=int(yi), weight=float(wi),
                    loss_complement=int(mi), provenance="fresh")
        for i, yi, wi, mi in zip(idx, y, w, match)
    ]


def reuse_draws(prior_labeled, pool: ScoredPool, alpha: float) -> list[LabeledDraw]:
    """Fold previously labeled items back into the current batch's estimate.

    Prior labels are deterministic by now, so each reused item carries the
    density ratio |L|/|X| in place of p/q: weight = (|L|/|X|) * v. Items are
    emitted in index order.
    """
    pairs = sorted((int(i), int(y)) for i, y in prior_labeled)
    if not pairs:
        return []
    density = len(pairs) / pool.size
    out = []
    for i, y in pairs:
        yhat = int(pool.predicted[i])
        v = alpha * yhat + (1.0 - alpha) * y
        out.append(LabeledDraw(index=i, true_label=y, weight=float(density * v),
                               loss_complement=int(y == yhat), provenance="reused"))
    return out


def is_fscore(draws: list[LabeledDraw]) -> float:
    """Self-normalized importance-sampling estimate sum(w*l)/sum(w).

    Raises ZeroWeightMass when the total weight is zero (no informative
    draws yet); callers typically keep their previous estimate.
    """
    if not draws:
        raise ZeroWeightMassError("no draws")
    w = np.array([d.weight for d in draws])
    total = w.sum()
    if total <= 0.0:
        raise ZeroWeightMassError("total importance weight is zero")
    l = np.array([d.loss_complement for d in draws], dtype=float)
    return float((w * l).sum() / total)


def variance_estimate(draws: list[LabeledDraw], g_hat: float) -> tuple[float, float]:
    """Single-run variance of the importance-sampling estimate.

    Returns ``(asymptotic_var, estimate_var)`` where

        asymptotic_var = (1/C) * sum(w^2*(l-g)^2) / ((1/n)*sum(w)^2),
        C = 1 - sum(w^2)/sum(w)^2,

    and ``estimate_var = asymptotic_var / n`` is the variance of the
    estimate itself. n counts all draws, zero-weight ones included. With
    unit weights this reduces exactly to the Bessel-corrected sample
    variance of the agreement flags. Raises InsufficientDraws for n < 2 and
    DegenerateWeights when C <= 0 (one draw dominating the weight mass).
    """
    n = len(draws)
    if n < 2:
        raise InsufficientDrawsError("variance needs at least two draws")
    w = np.array([d.weight for d in draws])
    l = np.array([d.loss_complement for d in draws], dtype=float)
    sw = w.sum()
    if sw <= 0.0:
        raise DegenerateWeightsError("total importance weight is zero")
    c = 1.0 - (w * w).sum() / (sw * sw)
    if c <= 0.0:
        raise DegenerateWeightsError("weight mass concentrated on a single draw")
    asymptotic = float((w * w * (l - g_hat) ** 2).sum() / ((sw * sw) / n) / c)
    return asymptotic, asymptotic / n


def combine_estimates(records: list[IterationRecord], window: int) -> tuple[float, float]:
    """Weight-mass-weighted average of the last ``window`` batch estimates.

    g = sum(m_i/M * g_i) and var = sum((m_i/M)^2 * var_i) with m_i each
    record's weight mass and M their sum over the window — variances add
    with squared weights because the batches are treated as uncorrelated.
    Records with unavailable variance contribute zero variance. If the
    window carries no weight mass at all, falls back to the unweighted mean
    with zero variance.
    """
    if not records:
        raise EmptyInputError("need at least one record to combine")
    if window < 1:
        raise ValueError("window must be at least 1")
    tail = records[-window:]
    masses = np.array([r.weight_mass for r in tail])
    gs = np.array([r.g_hat for r in tail])
    variances = np.array([r.estimate_var if r.estimate_var is not None else 0.0 for r in tail])
    total = masses.sum()
    if total <= 0.0:
        return float(gs.mean()), 0.0
    frac = masses / total
    return float((frac * gs).sum()), float((frac * frac * variances).sum())


def worst_case_variance(records: list[IterationRecord], window: int) -> float:
    """Combined variance if the batch estimates were perfectly correlated.

    Equals (sum(m_i/M * sd_i))^2; always at least the uncorrelated
    combination from combine_estimates.
    """
    if not records:
        raise EmptyInputError("need at least one record to combine")
    if window < 1:
        raise ValueError("window must be at least 1")
    tail = records[-window:]
    masses = np.array([r.weight_mass for r in tail])
    sds = np.sqrt([r.estimate_var if r.estimate_var is not None else 0.0 for r in tail])
    total = masses.sum()
    if total <= 0.0:
        return 0.0
    frac = masses / total
    return float((frac * sds).sum() ** 2)


def reuse_validation_set(records: list[IterationRecord], plans: list[SamplingPlan],
                         other_pool: ScoredPool, alpha: float, *,
                         item_ids: list[str] | None = None,
                         window: int = 3) -> tuple[float, float]:
    """Re-score stored draws against a different model's predictions.

    The labels were collected once; any model scoring the same items can be
    evaluated by recomputing v, w, and the agreement flag per draw from the
    other model's predicted labels (fresh draws keep their original sampling
    masses; reused draws keep the |L|/|X| density rule), then re-running the
    estimate, variance, and combination. Pass the original pool's
    ``item_ids`` to verify both pools describe the same items.
    """
    if len(records) != len(plans):
        raise ValueError("records and plans must align one-to-one")
    if not records:
        raise EmptyInputError("need at least one record")
    if item_ids is not None and list(item_ids) != list(other_pool.item_ids):
        raise IdMismatchError("pools do not describe the same items in the same order")
    if plans[0].pool_size != other_pool.size:
        raise IdMismatchError("pool size differs from the one the draws came from")

    new_records = []
    g_prev = None
    for record, plan in zip(records, plans):
        reused_count = sum(1 for d in record.draws if d.provenance == "reused")
        density = reused_count / other_pool.size
        draws = []
        for d in record.draws:
            yhat = int(other_pool.predicted[d.index])
            v = alpha * yhat + (1.0 - alpha) * d.true_label
            if d.provenance == "fresh":
                w = (plan.p_x / plan.mass[d.index]) * v
            else:
                w = density * v
            draws.append(LabeledDraw(index=d.index, true_label=d.true_label,
                                     weight=float(w),
                                     loss_complement=int(yhat == d.true_label),
                                     provenance=d.provenance))
        try:
            g = is_fscore(draws)
        except ZeroWeightMassError:
            g = g_prev if g_prev is not None else record.g_hat
        try:
            avar, evar = variance_estimate(draws, g)
        except (InsufficientDrawsError, DegenerateWeightsError):
            avar, evar = None, None
        new_records.append(IterationRecord(
            iteration=record.iteration, batch_size=record.batch_size, draws=draws,
            g_hat=g, asymptotic_var=avar, estimate_var=evar,
            weight_mass=float(sum(d.weight for d in draws))))
        g_prev = g
    return combine_estimates(new_records, window)
