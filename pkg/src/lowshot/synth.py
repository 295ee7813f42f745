"""Synthetic rare-category pools with exact ground truth.

Labels are Bernoulli draws at a configurable prevalence; each class emits
scores from its own Beta distribution; a monotone warp then miscalibrates
the scores (the model "believes" the warped value), and predictions come
from thresholding the warped score. Because true labels are retained, every
estimator can be judged against the exact F-score.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import RegenerationLimitError
from .pool import ScoredPool


def warp_scores(scores, kind: str, strength: float = 1.0) -> np.ndarray:
    """Apply a monotone miscalibration warp to scores in [0, 1].

    ``sharpen`` pushes scores toward 0/1 (overconfidence):
    s^k / (s^k + (1-s)^k); ``flatten`` is its inverse-exponent counterpart
    (underconfidence); ``identity`` leaves scores untouched.
    """
    s = np.asarray(scores, dtype=float)
    if kind == "identity":
        return s.copy()
    if kind not in ("sharpen", "flatten"):
        raise ValueError(f"unknown warp kind: {kind!r}")
    if strength <= 0:
        raise ValueError("warp strength must be positive")
    k = strength if kind == "sharpen" else 1.0 / strength
    num = s**k
    return num / (num + (1.0 - s) ** k)


@dataclass
class SynthConfig:
    """Recipe for one synthetic pool.

    Defaults produce the benchmark's standard setting: a rare class
    (prevalence 0.005 in 20,000 items) whose positives score broadly high
    while negatives pile up near zero with a thin confusable tail, strongly
    sharpened so the model overstates its confidence, and thresholded low
    enough that the classifier runs recall-heavy and precision does the
    work.
    """

    pool_size: int = 20000
    prevalence: float = 0.005
    pos_score_dist: tuple[float, float] = (3.0, 2.0)
    neg_score_dist: tuple[float, float] = (3e-4, 0.25)
    miscalibration: str = "sharpen"
    warp_strength: float = 4.0
    threshold: float = 0.045
    seed: int = 0

    def __post_init__(self):
        if self.pool_size < 1:
            raise ValueError("pool_size must be at least 1")
        if not (0.0 < self.prevalence <= 1.0):
            raise ValueError("prevalence must lie in (0, 1]")
        if self.miscalibration not in ("identity", "sharpen", "flatten"):
            raise ValueError("miscalibration must be identity, sharpen, or flatten")
        if self.warp_strength <= 0:
            raise ValueError("warp_strength must be positive")


def synth_generate(cfg: SynthConfig) -> ScoredPool:
    """Generate a pool with oracle labels; deterministic given cfg.seed.

    A draw that ends up with no positives or no predicted positives is
    retried with the seed incremented (up to 100 times, then
    RegenerationLimit); the number of retries is recorded in the pool meta.
    """
    pa, pb = cfg.pos_score_dist
    na, nb = cfg.neg_score_dist
    for attempt in range(100):
        seed = cfg.seed + attempt
        rng = np.random.default_rng(seed)
        labels = (rng.random(cfg.pool_size) < cfg.prevalence).astype(int)
        pos_scores = rng.beta(pa, pb, cfg.pool_size)
        neg_scores = rng.beta(na, nb, cfg.pool_size)
        raw = np.where(labels == 1, pos_scores, neg_scores)
        scores = warp_scores(raw, cfg.miscalibration, cfg.warp_strength)
        predicted = (scores > cfg.threshold).astype(int)
        if labels.sum() >= 1 and predicted.sum() >= 1:
            width = len(str(cfg.pool_size - 1))
            ids = [f"item-{i:0{width}d}" for i in range(cfg.pool_size)]
            return ScoredPool(
                item_ids=ids, scores=scores, predicted=predicted, labels=labels,
                meta={"generator_seed": seed, "regenerations": attempt})
    raise RegenerationLimitError(
        "no pool with at least one positive and one predicted positive after 100 seeds")


def pool_with_threshold(pool: ScoredPool, threshold: float) -> ScoredPool:
    """The same items and labels re-predicted at a different score threshold.

    Models in a threshold family share scores; only the decision boundary
    moves. Useful for evaluating label reuse across related models.
    """
    predicted = (pool.scores > threshold).astype(int)
    meta = dict(pool.meta)
    meta["threshold"] = threshold
    return ScoredPool(item_ids=list(pool.item_ids), scores=pool.scores.copy(),
                      predicted=predicted,
                      labels=None if pool.labels is None else pool.labels.copy(),
                      extras=pool.extras, meta=meta)


def config_from_dict(raw: dict) -> SynthConfig:
    """Build a SynthConfig from parsed JSON, tolerating warp sub-objects.

    Accepts either flat fields (``"miscalibration": "sharpen",
    "warp_strength": 3.0``) or a nested form
    (``"miscalibration": {"kind": "sharpen", "strength": 3.0}``).
    """
    data = dict(raw)
    warp = data.get("miscalibration")
    if isinstance(warp, dict):
        data["miscalibration"] = warp.get("kind", "identity")
        if "strength" in warp:
            data["warp_strength"] = warp["strength"]
    for key in ("pos_score_dist", "neg_score_dist"):
        if key in data:
            data[key] = tuple(data[key])
    known = {f for f in SynthConfig.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown synthetic-config fields: {sorted(unknown)}")
    return SynthConfig(**data)


def vary_seed(cfg: SynthConfig, seed: int) -> SynthConfig:
    """The same recipe under a different seed."""
    return replace(cfg, seed=seed)
