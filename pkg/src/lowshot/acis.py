"""Active calibrated importance sampling: the iterative estimation loop.

Each batch: blend the self-calibration prior with the latest label-trained
calibrator, build the variance-minimizing proposal over a growing top-score
domain, draw until the batch quota of new items is met (re-draws of known
items keep their weights but cost no budget), label the new items, fold all
previously labeled items back in, re-estimate, and retrain the calibrator.
Batch sizes double; the final answer mass-weights the last few batches.

The loop is packaged as a resumable state machine (`AcisSession`) so that a
caller with an oracle (`acis_run`) and a request-driven labeling service can
execute bit-for-bit identical runs.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .calibration import Calibrator, blend_calibrators, fit_calibration_prior, fit_isotonic
from .errors import (
    AllZeroMassError,
    AlreadyLabeledError,
    DegenerateWeightsError,
    InsufficientDrawsError,
    InvalidLabelError,
    UnknownItemError,
    ZeroWeightMassError,
)
from .estimator import (
    IterationRecord,
    LabeledDraw,
    SamplingPlan,
    combine_estimates,
    importance_distribution,
    is_fscore,
    make_draws,
    restrict_domain,
    reuse_draws,
    sample_until_new,
    uniform_plan,
    variance_estimate,
)
from .pool import ScoredPool


@dataclass
class AcisConfig:
    """Knobs for one estimation run.

    ``budget`` is the total number of items that may be labeled. ``alpha``
    selects the metric (0.5 = F1). ``g0`` seeds the estimate before any
    labels exist. ``blend_iters`` controls how fast trust shifts from the
    self-calibration prior to the label-trained calibrator, and
    ``avg_window`` how many trailing batches the final answer averages.
    ``restrict_domain=False`` samples from the whole pool every batch.
    """

    budget: int
    alpha: float = 0.5
    first_batch: int = 10
    batch_growth: float = 2.0
    eps: float = 1e-4
    g0: float = 0.5
    blend_iters: int = 3
    avg_window: int = 3
    topk_multiplier: int = 3
    restrict_domain: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must lie in [0, 1]")
        if self.first_batch < 1:
            raise ValueError("first_batch must be at least 1")
        if self.batch_growth <= 0:
            raise ValueError("batch_growth must be positive")
        if not (0.0 < self.eps < 0.5):
            raise ValueError("eps must lie in (0, 0.5)")
        if not (0.0 <= self.g0 <= 1.0):
            raise ValueError("g0 must lie in [0, 1]")
        if self.blend_iters < 1:
            raise ValueError("blend_iters must be at least 1")
        if self.avg_window < 1:
            raise ValueError("avg_window must be at least 1")
        if self.topk_multiplier < 1:
            raise ValueError("topk_multiplier must be at least 1")


@dataclass
class PendingBatch:
    """A drawn batch whose fresh items still need labels."""

    plan: SamplingPlan
    drawn: list[int]
    fresh: list[int]
    warnings: list[str]
    new_labels: dict[int, int] = field(default_factory=dict)

    @property
    def remaining(self) -> list[int]:
        return [i for i in self.fresh if i not in self.new_labels]


@dataclass
class AcisResult:
    """Everything a finished run produced."""

    records: list[IterationRecord]
    plans: list[SamplingPlan]
    g: float
    var: float
    labels: dict[int, int]


class AcisSession:
    """The estimation loop, stoppable at every labeling boundary.

    After construction, ``pending.fresh`` lists the indices awaiting labels;
    feed them through ``submit_labels`` (all at once or piecemeal). When a
    batch completes the session records the estimate, retrains, and draws
    the next batch, until the label budget is spent (``complete``).
    """

    def __init__(self, pool: ScoredPool, config: AcisConfig,
                 _defer_first_batch: bool = False):
        if config.budget > pool.size:
            raise ValueError("budget cannot exceed the pool size")
        self.pool = pool
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.c0 = fit_calibration_prior(pool, eps=config.eps)
        self.calibrator: Calibrator = self.c0
        self.g_prev = config.g0
        self.labels: dict[int, int] = {}
        self.records: list[IterationRecord] = []
        self.plans: list[SamplingPlan] = []
        self.iteration = 1
        self.batch_quota = float(config.first_batch)
        self.pending: PendingBatch | None = None
        self.complete = False
        if not _defer_first_batch:
            self._prepare_batch()

    # -- batch lifecycle ---------------------------------------------------

    def _prepare_batch(self) -> None:
        cfg = self.config
        while True:
            if len(self.labels) >= cfg.budget:
                self.pending = None
                self.complete = True
                return
            if cfg.restrict_domain:
                domain = restrict_domain(self.pool, self.iteration - 1, cfg.topk_multiplier)
            else:
                domain = np.arange(self.pool.size, dtype=np.intp)
            beta = max(0.0, 1.0 - (self.iteration - 1) / cfg.blend_iters)
            blended = blend_calibrators(self.c0, self.calibrator, beta)
            probs = blended.values_at(self.pool.rescaled_scores())
            warnings: list[str] = []
            try:
                plan = importance_distribution(probs, self.pool.predicted, self.g_prev,
                                               cfg.alpha, domain, self.pool.size)
            except AllZeroMassError:
                plan = uniform_plan(self.pool.size, domain)
                warnings.append("all sampling masses were zero; fell back to uniform over the domain")

            sampleable = int(np.sum([int(i) not in self.labels for i in plan.domain]))
            quota = int(round(self.batch_quota))
            target = min(quota, cfg.budget - len(self.labels), sampleable)
            if target <= 0:
                if domain.size >= self.pool.size:
                    # nothing left to label anywhere
                    self.pending = None
                    self.complete = True
                    return
                self.iteration += 1  # widen the domain and retry
                continue
            if target < quota and target < cfg.budget - len(self.labels):
                warnings.append("domain had fewer unlabeled items than the scheduled batch")
            drawn, fresh = sample_until_new(plan, target, self.rng, self.labels.keys())
            self.pending = PendingBatch(plan=plan, drawn=drawn, fresh=fresh, warnings=warnings)
            return

    def submit_labels(self, new_labels: dict[int, int]) -> None:
        """Record labels for pending fresh items; advance when complete.

        Validates the whole submission before touching state: unknown
        indices, repeats, and non-binary values are rejected atomically.
        """
        if self.pending is None:
            raise UnknownItemError("no batch is awaiting labels")
        fresh_set = set(self.pending.fresh)
        for idx, label in new_labels.items():
            if idx not in fresh_set:
                raise UnknownItemError(f"index {idx} is not in the pending batch")
            if idx in self.pending.new_labels:
                raise AlreadyLabeledError(f"index {idx} was already labeled")
            if label not in (0, 1):
                raise InvalidLabelError(f"label for index {idx} must be 0 or 1")
        self.pending.new_labels.update({int(i): int(v) for i, v in new_labels.items()})
        if not self.pending.remaining:
            self._complete_iteration()

    def _complete_iteration(self) -> None:
        cfg = self.config
        pending = self.pending
        assert pending is not None and not pending.remaining
        prior = dict(self.labels)
        for idx in pending.fresh:
            self.labels[idx] = pending.new_labels[idx]

        fresh_draws = make_draws(pending.drawn, pending.plan, self.pool, self.labels, cfg.alpha)
        reused = reuse_draws(prior.items(), self.pool, cfg.alpha)
        draws = fresh_draws + reused
        warnings = list(pending.warnings)
        try:
            g = is_fscore(draws)
        except ZeroWeightMassError:
            g = self.g_prev
            warnings.append("all draw weights were zero; kept the previous estimate")
        try:
            asymptotic_var, estimate_var = variance_estimate(draws, g)
        except (InsufficientDrawsError, DegenerateWeightsError) as exc:
            asymptotic_var, estimate_var = None, None
            warnings.append(f"variance unavailable: {exc}")

        self.records.append(IterationRecord(
            iteration=self.iteration, batch_size=len(pending.fresh), draws=draws,
            g_hat=g, asymptotic_var=asymptotic_var, estimate_var=estimate_var,
            weight_mass=float(sum(d.weight for d in draws)), warnings=warnings))
        self.plans.append(pending.plan)

        scores = self.pool.rescaled_scores()
        pairs = [(float(scores[i]), float(label)) for i, label in sorted(self.labels.items())]
        self.calibrator = fit_isotonic(pairs, eps=cfg.eps)
        self.g_prev = g
        self.batch_quota *= cfg.batch_growth
        self.iteration += 1
        self.pending = None
        self._prepare_batch()

    # -- results -----------------------------------------------------------

    def estimate(self) -> tuple[float, float]:
        """Mass-weighted (g, var) over the trailing averaging window."""
        return combine_estimates(self.records, self.config.avg_window)

    # -- state round-trip ----------------------------------------------------

    def to_state(self) -> dict:
        """JSON-safe snapshot of everything needed to resume the run.

        Floats survive a JSON round-trip exactly (shortest-repr encoding),
        so a restored session continues bit-for-bit where this one stopped.
        """
        state = {
            "config": asdict(self.config),
            "rng": self.rng.bit_generator.state,
            "labels": [[int(i), int(v)] for i, v in self.labels.items()],
            "g_prev": float(self.g_prev),
            "batch_quota": float(self.batch_quota),
            "iteration": int(self.iteration),
            "complete": bool(self.complete),
            "records": [_record_state(r) for r in self.records],
            "plans": [_plan_state(p) for p in self.plans],
            "pending": None,
        }
        if self.pending is not None:
            state["pending"] = {
                "plan": _plan_state(self.pending.plan),
                "drawn": [int(i) for i in self.pending.drawn],
                "fresh": [int(i) for i in self.pending.fresh],
                "warnings": list(self.pending.warnings),
                "new_labels": [[int(i), int(v)] for i, v in self.pending.new_labels.items()],
            }
        return state

    @classmethod
    def from_state(cls, pool: ScoredPool, state: dict) -> "AcisSession":
        """Rebuild a session from a to_state snapshot against the same pool."""
        config = AcisConfig(**state["config"])
        session = cls(pool, config, _defer_first_batch=True)
        session.rng.bit_generator.state = state["rng"]
        session.labels = {int(i): int(v) for i, v in state["labels"]}
        session.g_prev = float(state["g_prev"])
        session.batch_quota = float(state["batch_quota"])
        session.iteration = int(state["iteration"])
        session.complete = bool(state["complete"])
        session.records = [_record_from_state(r) for r in state["records"]]
        session.plans = [_plan_from_state(p) for p in state["plans"]]
        if session.labels:
            scores = pool.rescaled_scores()
            pairs = [(float(scores[i]), float(v)) for i, v in sorted(session.labels.items())]
            session.calibrator = fit_isotonic(pairs, eps=config.eps)
        pending = state.get("pending")
        if pending is not None:
            session.pending = PendingBatch(
                plan=_plan_from_state(pending["plan"]),
                drawn=[int(i) for i in pending["drawn"]],
                fresh=[int(i) for i in pending["fresh"]],
                warnings=list(pending["warnings"]),
                new_labels={int(i): int(v) for i, v in pending["new_labels"]},
            )
        return session


def _plan_state(plan: SamplingPlan) -> dict:
    domain = [int(i) for i in plan.domain]
    return {"domain": domain,
            "mass": [float(plan.mass[i]) for i in domain],
            "pool_size": int(plan.pool_size)}


def _plan_from_state(state: dict) -> SamplingPlan:
    pool_size = int(state["pool_size"])
    domain = np.array(state["domain"], dtype=np.intp)
    mass = np.zeros(pool_size)
    mass[domain] = state["mass"]
    return SamplingPlan(domain=domain, mass=mass, pool_size=pool_size)


def _record_state(record: IterationRecord) -> dict:
    return {
        "iteration": record.iteration,
        "batch_size": record.batch_size,
        "g_hat": record.g_hat,
        "asymptotic_var": record.asymptotic_var,
        "estimate_var": record.estimate_var,
        "weight_mass": record.weight_mass,
        "warnings": list(record.warnings),
        "draws": [[d.index, d.true_label, d.weight, d.loss_complement, d.provenance]
                  for d in record.draws],
    }


def _record_from_state(state: dict) -> IterationRecord:
    return IterationRecord(
        iteration=int(state["iteration"]),
        batch_size=int(state["batch_size"]),
        draws=[LabeledDraw(index=int(i), true_label=int(y), weight=float(w),
                           loss_complement=int(m), provenance=str(p))
               for i, y, w, m, p in state["draws"]],
        g_hat=float(state["g_hat"]),
        asymptotic_var=None if state["asymptotic_var"] is None else float(state["asymptotic_var"]),
        estimate_var=None if state["estimate_var"] is None else float(state["estimate_var"]),
        weight_mass=float(state["weight_mass"]),
        warnings=list(state["warnings"]),
    )


def acis_run(pool: ScoredPool, label_source, config: AcisConfig) -> AcisResult:
    """Run the full loop against a labeling callback (index -> 0/1).

    Deterministic given ``config.seed``: the same pool and config always
    produce the same draws, records, and final estimate.
    """
    session = AcisSession(pool, config)
    while not session.complete:
        batch = session.pending.fresh
        session.submit_labels({idx: int(label_source(idx)) for idx in batch})
    g, var = session.estimate()
    return AcisResult(records=session.records, plans=session.plans, g=g, var=var,
                      labels=dict(session.labels))
