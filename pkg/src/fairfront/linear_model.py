"""Logistic-linear classification head and the AdaMax optimizer that fits it."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from fairfront.dataset import Dataset

log = logging.getLogger(__name__)

PROB_EPS = 1e-7


class TrainingError(RuntimeError):
    """Raised when training produces a non-finite loss or gradient."""


@dataclass(frozen=True, eq=False)
class WeightVector:
    weights: np.ndarray
    bias: float = 0.0

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=np.float64).reshape(-1)
        if w.size == 0:
            raise ValueError("weight vector must have at least one feature weight")
        if not (np.all(np.isfinite(w)) and math.isfinite(self.bias)):
            raise ValueError("weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    @classmethod
    def zeros(cls, feature_dim: int) -> WeightVector:
        return cls(np.zeros(feature_dim), 0.0)

    @classmethod
    def from_flat(cls, theta: np.ndarray) -> WeightVector:
        theta = np.asarray(theta, dtype=np.float64)
        return cls(theta[:-1], float(theta[-1]))

    @property
    def feature_dim(self) -> int:
        return self.weights.size

    def flat(self) -> np.ndarray:
        """Weights followed by the bias, as one fresh array."""
        return np.append(self.weights, self.bias)

    def to_dict(self) -> dict:
        return {
            "feature_dim": self.feature_dim,
            "weights": [float(v) for v in self.weights],
            "bias": self.bias,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> WeightVector:
        wv = cls(np.asarray(obj["weights"], dtype=np.float64), float(obj["bias"]))
        if int(obj["feature_dim"]) != wv.feature_dim:
            raise ValueError("checkpoint feature_dim does not match weights length")
        return wv

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> WeightVector:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class PredictionBatch:
    probabilities: np.ndarray
    hard_labels: np.ndarray


def logits(theta: WeightVector, x: np.ndarray) -> np.ndarray:
    if x.shape[1] != theta.feature_dim:
        raise ValueError(
            f"dimension mismatch: weights have {theta.feature_dim} entries, "
            f"data has {x.shape[1]} features"
        )
    return x @ theta.weights + theta.bias


def sigmoid(s: np.ndarray) -> np.ndarray:
    # exp of a non-positive argument never overflows
    s = np.asarray(s, dtype=np.float64)
    e = np.exp(-np.abs(s))
    return np.where(s >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def forward(theta: WeightVector, d: Dataset) -> PredictionBatch:
    """Clamped logistic probabilities and 0.5-threshold labels for every sample."""
    p = np.clip(sigmoid(logits(theta, d.features)), PROB_EPS, 1.0 - PROB_EPS)
    return PredictionBatch(p, (p >= 0.5).astype(np.int64))


@dataclass(frozen=True, eq=False)
class OptimizerState:
    """AdaMax moment estimates. ``m`` and ``u`` are None until the first step."""

    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    t: int = 0
    m: np.ndarray | None = field(default=None, repr=False)
    u: np.ndarray | None = field(default=None, repr=False)


def adamax_step(
    theta: np.ndarray, state: OptimizerState, gradient: np.ndarray
) -> tuple[np.ndarray, OptimizerState]:
    """One AdaMax update on a flat parameter vector.

    Entries whose infinity-norm accumulator is still zero are left in place.
    """
    g = np.asarray(gradient, dtype=np.float64)
    if g.shape != theta.shape:
        raise ValueError(f"gradient shape {g.shape} does not match parameters {theta.shape}")
    if not np.all(np.isfinite(g)):
        raise TrainingError("non-finite gradient")
    m = np.zeros_like(theta) if state.m is None else state.m
    u = np.zeros_like(theta) if state.u is None else state.u
    t = state.t + 1
    m = state.beta1 * m + (1.0 - state.beta1) * g
    u = np.maximum(state.beta2 * u, np.abs(g))
    step_size = state.learning_rate / (1.0 - state.beta1**t)
    new = theta.copy()
    live = u > 0
    new[live] -= step_size * m[live] / u[live]
    return new, replace(state, t=t, m=m, u=u)


LossGradient = Callable[[WeightVector, Dataset], "tuple[float, np.ndarray]"]


def train(
    d: Dataset,
    loss_gradient: LossGradient,
    steps: int,
    init: WeightVector | None = None,
    state: OptimizerState | None = None,
    batch_size: int | None = None,
    seed: int = 0,
) -> tuple[WeightVector, np.ndarray]:
    """Run ``steps`` AdaMax updates of ``loss_gradient`` starting from ``init``.

    ``loss_gradient(theta, batch)`` returns the loss and its flat gradient
    (weights then bias). With ``batch_size=None`` every step sees all of
    ``d``; otherwise each step draws a batch without replacement.

    Returns the final weights and the loss recorded before each update.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    theta = (init or WeightVector.zeros(d.feature_dim)).flat()
    state = state or OptimizerState()
    rng = np.random.default_rng(seed) if batch_size else None
    trace = np.empty(steps)
    for k in range(steps):
        batch = d
        if rng is not None and batch_size < d.n:
            batch = d.subset(np.sort(rng.choice(d.n, size=batch_size, replace=False)))
        loss, grad = loss_gradient(WeightVector.from_flat(theta), batch)
        if not math.isfinite(loss):
            raise TrainingError(f"non-finite loss at step {k}")
        trace[k] = loss
        theta, state = adamax_step(theta, state, grad)
    return WeightVector.from_flat(theta), trace
