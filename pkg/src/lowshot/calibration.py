"""Monotone score->probability calibrators.

All calibrators map a score to an estimate of P(y=1 | score) and are
nondecreasing in the score. Raw fits live on [0, 1]; before use they are
linearly rescaled onto [eps, 1-eps] so that importance-sampling masses built
from them are never zero. Fitting is done in the pool's min-max-rescaled
score space, but nothing here depends on score values beyond their order
(step functions + rank lookups), which is what makes the whole ACIS loop
invariant under strictly increasing score transforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError
from .pool import ScoredPool


class Calibrator:
    """Base: a clamped, monotone score -> probability map."""

    kind: str
    eps: float

    def values_at(self, scores) -> np.ndarray:
        raise NotImplementedError

    def value_at(self, score: float) -> float:
        return float(self.values_at(np.array([float(score)]))[0])


def _clamp_affine(values: np.ndarray, eps: float) -> np.ndarray:
    # linear [0,1] -> [eps, 1-eps]; midpoint 0.5 is a fixed point
    return eps + (1.0 - 2.0 * eps) * values


@dataclass
class StepCalibrator(Calibrator):
    """Nondecreasing step function given by (score, raw value) breakpoints.

    Evaluation takes the value of the nearest breakpoint at or below the
    query, with constant extrapolation past both ends. Raw values are kept
    on [0, 1]; ``values_at`` applies the [eps, 1-eps] rescale.
    """

    xs: np.ndarray
    raw: np.ndarray
    eps: float
    kind: str = "isotonic"

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.raw = np.asarray(self.raw, dtype=float)
        if self.xs.size == 0:
            raise EmptyInputError("a step calibrator needs at least one breakpoint")

    @property
    def breakpoints(self) -> list[tuple[float, float]]:
        """(score, clamped value) pairs."""
        clamped = _clamp_affine(self.raw, self.eps)
        return list(zip(self.xs.tolist(), clamped.tolist()))

    def values_at(self, scores) -> np.ndarray:
        q = np.asarray(scores, dtype=float)
        idx = np.searchsorted(self.xs, q, side="right") - 1
        idx = np.clip(idx, 0, len(self.xs) - 1)
        return _clamp_affine(self.raw[idx], self.eps)


@dataclass
class SigmoidCalibrator(Calibrator):
    """Two-parameter sigmoid value(s) = 1 / (1 + exp(a*s + b))."""

    a: float
    b: float
    eps: float
    kind: str = "platt"

    def values_at(self, scores) -> np.ndarray:
        q = np.asarray(scores, dtype=float)
        z = self.a * q + self.b
        with np.errstate(over="ignore", invalid="ignore"):
            raw = np.where(z >= 0, np.exp(-z) / (1.0 + np.exp(-z)),
                           1.0 / (1.0 + np.exp(z)))
        return _clamp_affine(raw, self.eps)


@dataclass
class BlendedCalibrator(Calibrator):
    """Pointwise convex combination beta*c0 + (1-beta)*ci, evaluated lazily."""

    c0: Calibrator
    ci: Calibrator
    beta: float
    kind: str = "prior-blend"

    def __post_init__(self):
        self.eps = self.c0.eps

    def values_at(self, scores) -> np.ndarray:
        if self.beta == 1.0:
            return self.c0.values_at(scores)
        if self.beta == 0.0:
            return self.ci.values_at(scores)
        return self.beta * self.c0.values_at(scores) + (1.0 - self.beta) * self.ci.values_at(scores)


def pava(scores, targets) -> tuple[np.ndarray, np.ndarray]:
    """Pool-adjacent-violators: least-squares nondecreasing step fit.

    Equal scores are pooled (targets averaged, weights summed) before the
    sweep. Returns unique sorted scores and the fitted value at each.
    """
    s = np.asarray(scores, dtype=float)
    t = np.asarray(targets, dtype=float)
    if s.size == 0:
        raise EmptyInputError("isotonic fit needs at least one pair")
    order = np.argsort(s, kind="stable")
    s, t = s[order], t[order]

    # pool ties
    xs, starts = np.unique(s, return_index=True)
    bounds = np.append(starts, s.size)
    means = np.empty(xs.size)
    weights = np.empty(xs.size)
    for k in range(xs.size):
        seg = t[bounds[k]:bounds[k + 1]]
        means[k] = seg.mean()
        weights[k] = seg.size

    # stack of blocks (value, weight); merge while decreasing
    vals: list[float] = []
    wts: list[float] = []
    sizes: list[int] = []
    for v, w in zip(means, weights):
        vals.append(float(v))
        wts.append(float(w))
        sizes.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v1, w1 = vals.pop(), wts.pop()
            n1 = sizes.pop()
            vals[-1] = (vals[-1] * wts[-1] + v1 * w1) / (wts[-1] + w1)
            wts[-1] += w1
            sizes[-1] += n1

    fitted = np.repeat(np.array(vals), np.array(sizes))
    return xs, fitted


def fit_isotonic(pairs, eps: float = 1e-4) -> StepCalibrator:
    """Isotonic regression of targets on scores, clamp-rescaled to [eps, 1-eps]."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyInputError("isotonic fit needs at least one pair")
    scores = np.array([p[0] for p in pairs], dtype=float)
    targets = np.array([p[1] for p in pairs], dtype=float)
    xs, fitted = pava(scores, targets)
    return StepCalibrator(xs=xs, raw=fitted, eps=eps, kind="isotonic")


def fit_platt(pairs, eps: float = 1e-4, tol: float = 1e-8, max_iter: int = 100) -> Calibrator:
    """Sigmoid calibration by Bernoulli maximum likelihood (Newton's method).

    Fits value(s) = 1/(1+exp(a*s+b)). Iterates damped Newton steps until the
    gradient norm drops below ``tol`` or ``max_iter`` is hit. If all targets
    are identical there is no sloped solution; falls back to the constant
    mean target (clamped).
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyInputError("platt fit needs at least one pair")
    s = np.array([p[0] for p in pairs], dtype=float)
    t = np.array([p[1] for p in pairs], dtype=float)

    if np.all(t == t[0]):
        # degenerate: constant function at the shared target value
        return StepCalibrator(xs=np.array([0.0]), raw=np.array([float(t.mean())]),
                              eps=eps, kind="platt")

    a, b = 0.0, 0.0

    def probs(a_, b_):
        z = a_ * s + b_
        with np.errstate(over="ignore", invalid="ignore"):
            return np.where(z >= 0, np.exp(-z) / (1.0 + np.exp(-z)),
                            1.0 / (1.0 + np.exp(z)))

    def nll(a_, b_):
        z = a_ * s + b_
        # -log p = log(1+e^z) - 0*z ; -log(1-p) = log(1+e^-z) + 0; stable forms
        log_p = -np.logaddexp(0.0, z)
        log_1mp = -np.logaddexp(0.0, -z)
        return float(-(t * log_p + (1.0 - t) * log_1mp).sum())

    for _ in range(max_iter):
        p = probs(a, b)
        # d nll / dz = t - p  (p decreases in z)
        g = np.array([((t - p) * s).sum(), (t - p).sum()])
        if np.linalg.norm(g) < tol:
            break
        w = p * (1.0 - p)
        h_aa = (w * s * s).sum() + 1e-12
        h_ab = (w * s).sum()
        h_bb = w.sum() + 1e-12
        det = h_aa * h_bb - h_ab * h_ab
        if det <= 0:
            step = -g / np.array([h_aa, h_bb])
        else:
            step = np.array([
                (-g[0] * h_bb + g[1] * h_ab) / det,
                (-g[1] * h_aa + g[0] * h_ab) / det,
            ])
        # backtrack if the step overshoots
        base = nll(a, b)
        scale = 1.0
        while scale > 1e-8:
            na, nb = a + scale * step[0], b + scale * step[1]
            if nll(na, nb) <= base + 1e-12:
                a, b = na, nb
                break
            scale *= 0.5
        else:
            break

    return SigmoidCalibrator(a=a, b=b, eps=eps)


def clamp_rescale(calibrator: Calibrator, eps: float) -> Calibrator:
    """Re-target a calibrator's output range to [eps, 1-eps]."""
    if not (0.0 < eps < 0.5):
        raise ValueError("eps must lie in (0, 0.5)")
    if isinstance(calibrator, StepCalibrator):
        return StepCalibrator(xs=calibrator.xs, raw=calibrator.raw, eps=eps,
                              kind=calibrator.kind)
    if isinstance(calibrator, SigmoidCalibrator):
        return SigmoidCalibrator(a=calibrator.a, b=calibrator.b, eps=eps)
    raise TypeError(f"cannot rescale {type(calibrator).__name__}")


def fit_calibration_prior(pool: ScoredPool, eps: float = 1e-4) -> StepCalibrator:
    """Isotonic fit of the model's own predicted labels against its scores.

    This is the calibrator used before any true labels exist: it encodes
    only what the model already believes about itself.
    """
    if pool.size == 0:
        raise EmptyInputError("empty pool")
    scores = pool.rescaled_scores()
    return fit_isotonic(list(zip(scores, pool.predicted.astype(float))), eps=eps)


def blend_calibrators(c0: Calibrator, ci: Calibrator, beta: float) -> Calibrator:
    """Convex combination beta*c0 + (1-beta)*ci; both must share eps."""
    if not (0.0 <= beta <= 1.0):
        raise ValueError("beta must lie in [0, 1]")
    if c0.eps != ci.eps:
        raise ValueError("calibrators must share eps to be blended")
    return BlendedCalibrator(c0=c0, ci=ci, beta=float(beta))
