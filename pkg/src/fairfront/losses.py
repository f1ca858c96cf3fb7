"""Differentiable objectives for the accuracy/fairness trade-off.

f1 is binary cross entropy over the whole batch. f2 is the squared difference
between the two groups' class-balanced cross entropies (CBA). Both come with
analytic gradients with respect to the logistic head's flat parameter vector
(feature weights followed by the bias).

CBA has two normalizations. ``normalized`` weights each class by the inverse
of its own size, so CBA is the sum of the per-class mean losses and equals
twice the BCE when the classes are balanced. ``literal`` weights the minority
class by q/N and the majority class by p/N; it equals ``normalized`` times
p*q/N. The factor differs between groups, so the two modes yield different
fairness losses.
"""

from __future__ import annotations

import logging
import warnings
import weakref
from dataclasses import dataclass
from typing import Literal

import numpy as np

from fairfront.dataset import Dataset
from fairfront.linear_model import PROB_EPS, WeightVector, logits, sigmoid

log = logging.getLogger(__name__)

CBAMode = Literal["normalized", "literal"]
CBA_MODES = ("normalized", "literal")


class MissingClassWarning(UserWarning):
    """A class is absent from the evaluated subset; its CBA term was dropped."""


def _check_pair(z: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z = np.asarray(z, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if z.shape != p.shape or z.ndim != 1:
        raise ValueError(f"length mismatch: labels {z.shape}, probabilities {p.shape}")
    if z.size == 0:
        raise ValueError("empty input")
    return z, p


def sample_losses(z: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Per-sample negative log-likelihood for binary labels ``z``."""
    return -np.log(np.where(z == 1, p, 1.0 - p))


def bce(z: np.ndarray, p: np.ndarray) -> float:
    z, p = _check_pair(z, p)
    return float(np.mean(sample_losses(z, p)))


def cba_weights(z: np.ndarray, mode: CBAMode = "normalized") -> tuple[np.ndarray, bool]:
    """Per-sample weights w such that CBA = sum(w * sample_losses).

    The second return value is True when one class is absent, in which case
    that class contributes nothing.
    """
    if mode not in CBA_MODES:
        raise ValueError(f"unknown cba mode {mode!r}")
    z = np.asarray(z)
    n = z.size
    w = np.zeros(n)
    missing = False
    for c in (0, 1):
        mask = z == c
        n_c = int(mask.sum())
        if n_c == 0:
            missing = True
            continue
        w[mask] = 1.0 / n_c if mode == "normalized" else (n - n_c) / n
    return w, missing


def cba(z: np.ndarray, p: np.ndarray, mode: CBAMode = "normalized") -> float:
    """Class-balanced cross entropy.

    Warns with :class:`MissingClassWarning` if only one class is present.
    """
    z, p = _check_pair(z, p)
    w, missing = cba_weights(z, mode)
    if missing:
        warnings.warn("only one class present; CBA term for the absent class dropped",
                      MissingClassWarning, stacklevel=2)
    return float(w @ sample_losses(z, p))


# Per-group CBA weights depend only on labels and groups, which a Dataset
# never changes, so they are computed once per (dataset, mode).
_WEIGHT_CACHE: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


def _group_weights(d: Dataset, mode: CBAMode) -> tuple[np.ndarray, np.ndarray]:
    cached = _WEIGHT_CACHE.setdefault(d, {})
    if mode not in cached:
        weights = []
        for g in (0, 1):
            mask = d.groups == g
            if not mask.any():
                raise ValueError(f"group {g} absent from data")
            wg, missing = cba_weights(d.labels[mask], mode)
            w = np.zeros(d.n)
            w[mask] = wg
            weights.append((w, missing))
        cached[mode] = tuple(weights)
    (w0, m0), (w1, m1) = cached[mode]
    for g, missing in ((0, m0), (1, m1)):
        if missing:
            warnings.warn(f"group {g} has a single class; CBA term dropped",
                          MissingClassWarning, stacklevel=4)
    return w0, w1


def _group_cbas(
    d: Dataset, losses: np.ndarray, mode: CBAMode
) -> tuple[list[float], list[np.ndarray]]:
    w0, w1 = _group_weights(d, mode)
    return [float(w0 @ losses), float(w1 @ losses)], [w0, w1]


def fairness_loss(d: Dataset, p: np.ndarray, mode: CBAMode = "normalized") -> float:
    """(CBA over group 0 - CBA over group 1) squared."""
    z, p = _check_pair(d.labels, p)
    (c0, c1), _ = _group_cbas(d, sample_losses(z, p), mode)
    return (c0 - c1) ** 2


@dataclass(frozen=True, eq=False)
class LossPair:
    f1: float
    f2: float
    g1: np.ndarray
    g2: np.ndarray


class _Forward:
    """Shared forward quantities for one (d, theta) evaluation."""

    def __init__(self, d: Dataset, theta: WeightVector):
        self.d = d
        raw = sigmoid(logits(theta, d.features))
        self.p = np.clip(raw, PROB_EPS, 1.0 - PROB_EPS)
        z = d.labels.astype(np.float64)
        self.losses = sample_losses(z, self.p)
        # d(loss_i)/d(logit_i); zero where the clamp is active
        live = (raw > PROB_EPS) & (raw < 1.0 - PROB_EPS)
        self.residual = np.where(live, self.p - z, 0.0)

    def grad(self, sample_weights: np.ndarray) -> np.ndarray:
        """Gradient of sum(sample_weights * losses) w.r.t. (weights, bias)."""
        v = sample_weights * self.residual
        return np.append(self.d.features.T @ v, v.sum())


def loss_pair(d: Dataset, theta: WeightVector, mode: CBAMode = "normalized") -> LossPair:
    """Evaluate both objectives and their gradients in one forward pass."""
    fw = _Forward(d, theta)
    (c0, c1), (w0, w1) = _group_cbas(d, fw.losses, mode)
    diff = c0 - c1
    return LossPair(
        f1=float(fw.losses.mean()),
        f2=diff * diff,
        g1=fw.grad(np.full(d.n, 1.0 / d.n)),
        g2=fw.grad(2.0 * diff * (w0 - w1)),
    )


def scalarized_loss(
    alpha: float,
    d: Dataset,
    theta: WeightVector,
    mode: CBAMode = "normalized",
    strict: bool = True,
) -> tuple[float, np.ndarray]:
    """alpha * f1 + (1 - alpha) * f2 and its gradient.

    With ``strict=False`` a batch missing one group drops the fairness term
    (logged) instead of raising; mini-batch training relies on this.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    fw = _Forward(d, theta)
    f1 = float(fw.losses.mean())
    if alpha == 1.0:
        return f1, fw.grad(np.full(d.n, 1.0 / d.n))
    try:
        (c0, c1), (w0, w1) = _group_cbas(d, fw.losses, mode)
    except ValueError:
        if strict:
            raise
        log.warning("batch lacks a group; fairness term skipped")
        return alpha * f1, fw.grad(np.full(d.n, alpha / d.n))
    diff = c0 - c1
    value = alpha * f1 + (1.0 - alpha) * diff * diff
    weights = alpha / d.n + (1.0 - alpha) * 2.0 * diff * (w0 - w1)
    return value, fw.grad(weights)


@dataclass(frozen=True)
class GradientCheck:
    f1_error: float
    f2_error: float
    coordinates: tuple[int, ...]

    @property
    def max_error(self) -> float:
        return max(self.f1_error, self.f2_error)


def finite_diff_check(
    d: Dataset,
    theta: WeightVector,
    h: float = 1e-5,
    seed: int = 0,
    n_coords: int = 20,
    mode: CBAMode = "normalized",
) -> GradientCheck:
    """Compare analytic gradients of f1 and f2 with central differences.

    Checks ``n_coords`` randomly chosen coordinates (all of them when the
    parameter vector is shorter). The error per coordinate is
    ``|numeric - analytic| / max(|analytic|, 1e-8)``; the maximum is reported
    separately for each objective.
    """
    if not 1e-7 <= h <= 1e-3:
        raise ValueError("step h must lie in [1e-7, 1e-3]")
    flat = theta.flat()
    dim = flat.size
    rng = np.random.default_rng(seed)
    coords = np.sort(rng.choice(dim, size=min(n_coords, dim), replace=False))
    pair = loss_pair(d, theta, mode)
    errors = [0.0, 0.0]
    for i in coords:
        bumped = []
        for sign in (1.0, -1.0):
            t = flat.copy()
            t[i] += sign * h
            lp = loss_pair(d, WeightVector.from_flat(t), mode)
            if not (np.isfinite(lp.f1) and np.isfinite(lp.f2)):
                raise FloatingPointError(f"non-finite loss perturbing coordinate {i}")
            bumped.append((lp.f1, lp.f2))
        for k, analytic in enumerate((pair.g1[i], pair.g2[i])):
            numeric = (bumped[0][k] - bumped[1][k]) / (2.0 * h)
            err = abs(numeric - analytic) / max(abs(analytic), 1e-8)
            errors[k] = max(errors[k], err)
    return GradientCheck(errors[0], errors[1], tuple(int(i) for i in coords))
