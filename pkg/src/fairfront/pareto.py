"""Trace the accuracy-vs-fairness front by sweeping the scalarization weight.

Each alpha is solved by training the logistic head on
``alpha * f1 + (1 - alpha) * f2``. The result is accepted as Pareto-stationary
when some convex combination of the two objective gradients nearly vanishes
(Fritz-John residual at most ``epsilon``).
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TypeVar

import numpy as np

from fairfront.dataset import Dataset
from fairfront.linear_model import OptimizerState, WeightVector, forward, train
from fairfront.losses import CBAMode, loss_pair, scalarized_loss
from fairfront.metrics import GroupReport, evaluate, flat_metrics

log = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-3
DEFAULT_STEPS = 4000

CSV_COLUMNS = (
    "alpha", "f1", "f2", "fj_residual", "accepted",
    "acc_overall", "acc_g0", "acc_g1", "acc_gap", "fpr_g0", "fpr_g1",
)


def default_alphas(n: int = 11) -> list[float]:
    """``n`` evenly spaced weights from 1.0 down to 0.0."""
    if n < 2:
        return [1.0]
    return [(n - 1 - k) / (n - 1) for k in range(n)]


def fj_residual(g1: np.ndarray, g2: np.ndarray) -> tuple[float, float]:
    """Smallest norm of ``lam * g1 + (1 - lam) * g2`` over lam in [0, 1].

    Returns ``(residual, lam)``. A zero residual means non-negative
    multipliers, not both zero, cancel the two gradients: the Fritz-John
    stationarity condition for an unconstrained bi-objective problem.

    Swapping the arguments returns the same residual bit for bit and
    exactly ``1 - lam``.
    """
    g1 = np.asarray(g1, dtype=np.float64)
    g2 = np.asarray(g2, dtype=np.float64)
    if g1.shape != g2.shape:
        raise ValueError(f"length mismatch: {g1.shape} vs {g2.shape}")
    # The optimum puts weight >= 1/2 on the shorter gradient. Solving with
    # that one first keeps lam in [1/2, 1], where 1 - lam is exact.
    n1, n2 = float(g1 @ g1), float(g2 @ g2)
    if n1 > n2 or (n1 == n2 and tuple(g1) > tuple(g2)):
        res, lam = _fj_ordered(g2, g1)
        return res, 1.0 - lam
    return _fj_ordered(g1, g2)


def _fj_ordered(short: np.ndarray, long: np.ndarray) -> tuple[float, float]:
    diff = short - long
    denom = float(diff @ diff)
    if denom == 0.0:
        lam = 0.5
    else:
        lam = min(1.0, max(0.5, float(long @ (long - short)) / denom))
    return float(np.linalg.norm(long + lam * diff)), lam


T = TypeVar("T")


def _objectives(p) -> tuple[float, float]:
    if hasattr(p, "f1"):
        return float(p.f1), float(p.f2)
    return float(p[0]), float(p[1])


def dominance_filter(points: Sequence[T]) -> list[T]:
    """Keep the points no other point strictly dominates (both minimized).

    Accepts objects with ``f1``/``f2`` attributes or plain pairs; input order
    is preserved.
    """
    vals = np.array([_objectives(p) for p in points], dtype=np.float64).reshape(-1, 2)
    keep = []
    for i, v in enumerate(vals):
        no_worse = np.all(vals <= v, axis=1)
        better = np.any(vals < v, axis=1)
        if not np.any(no_worse & better):
            keep.append(points[i])
    return keep


@dataclass(frozen=True, eq=False)
class TradeoffPoint:
    alpha: float
    theta: WeightVector
    f1: float
    f2: float
    fj_residual: float
    fj_lambda: float
    metrics: GroupReport
    accepted: bool
    # evaluation on held-out data, filled in by callers that have it
    test: dict | None = None

    def row(self) -> dict:
        return {
            "alpha": self.alpha,
            "f1": self.f1,
            "f2": self.f2,
            "fj_residual": self.fj_residual,
            "accepted": int(self.accepted),
            **flat_metrics(self.metrics),
        }


@dataclass(eq=False)
class ParetoFront:
    points: list[TradeoffPoint]
    epsilon: float = DEFAULT_EPSILON
    provenance: dict = field(default_factory=dict)
    dominated: list[TradeoffPoint] = field(default_factory=list)
    baseline: WeightVector | None = None

    @property
    def accepted(self) -> list[TradeoffPoint]:
        return [p for p in self.points if p.accepted]

    def at(self, alpha: float) -> TradeoffPoint:
        for p in self.points + self.dominated:
            if abs(p.alpha - alpha) < 1e-12:
                return p
        raise KeyError(alpha)


def solve_at_alpha(
    alpha: float,
    d_train: Dataset,
    init: WeightVector | None = None,
    steps: int = DEFAULT_STEPS,
    *,
    epsilon: float = DEFAULT_EPSILON,
    cba_mode: CBAMode = "normalized",
    optimizer: OptimizerState | None = None,
    batch_size: int | None = None,
    seed: int = 0,
) -> TradeoffPoint:
    """Train on the alpha-scalarized objective and certify the result."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    strict = batch_size is None

    def objective(theta: WeightVector, batch: Dataset):
        return scalarized_loss(alpha, batch, theta, cba_mode, strict=strict)

    theta, _ = train(
        d_train, objective, steps, init=init, state=optimizer,
        batch_size=batch_size, seed=seed,
    )
    return evaluate_point(alpha, theta, d_train, epsilon=epsilon, cba_mode=cba_mode)


def evaluate_point(
    alpha: float,
    theta: WeightVector,
    d: Dataset,
    *,
    epsilon: float = DEFAULT_EPSILON,
    cba_mode: CBAMode = "normalized",
) -> TradeoffPoint:
    lp = loss_pair(d, theta, cba_mode)
    res, lam = fj_residual(lp.g1, lp.g2)
    return TradeoffPoint(
        alpha=float(alpha),
        theta=theta,
        f1=lp.f1,
        f2=lp.f2,
        fj_residual=res,
        fj_lambda=lam,
        metrics=evaluate(d, forward(theta, d)),
        accepted=res <= epsilon,
    )


def fit_baseline(
    d_train: Dataset,
    steps: int = DEFAULT_STEPS,
    optimizer: OptimizerState | None = None,
    batch_size: int | None = None,
    seed: int = 0,
) -> WeightVector:
    """Accuracy-only (pure BCE) weights from a zero start: the sweep's anchor."""
    def objective(theta: WeightVector, batch: Dataset):
        return scalarized_loss(1.0, batch, theta)

    theta, _ = train(d_train, objective, steps, state=optimizer,
                     batch_size=batch_size, seed=seed)
    return theta


def sweep_front(
    d_train: Dataset,
    alphas: Iterable[float] | None = None,
    warm_start: bool = True,
    *,
    steps: int = DEFAULT_STEPS,
    epsilon: float = DEFAULT_EPSILON,
    cba_mode: CBAMode = "normalized",
    optimizer: OptimizerState | None = None,
    batch_size: int | None = None,
    seed: int = 0,
    baseline: WeightVector | None = None,
) -> ParetoFront:
    """Solve every alpha in descending order and dominance-filter the results.

    All solves start from the accuracy-only baseline; with ``warm_start`` each
    later alpha instead continues from the previous alpha's solution. Every
    solve gets a fresh optimizer state built from ``optimizer``'s
    hyper-parameters.
    """
    grid = sorted({float(a) for a in (default_alphas() if alphas is None else alphas)},
                  reverse=True)
    if not grid:
        raise ValueError("empty alpha grid")
    if any(not 0.0 <= a <= 1.0 for a in grid):
        raise ValueError("alpha values must lie in [0, 1]")
    hp = optimizer or OptimizerState()
    fresh = lambda: OptimizerState(hp.learning_rate, hp.beta1, hp.beta2)  # noqa: E731
    if baseline is None:
        baseline = fit_baseline(d_train, steps, fresh(), batch_size, seed)
    solved = []
    init = baseline
    for a in grid:
        point = solve_at_alpha(
            a, d_train, init, steps, epsilon=epsilon, cba_mode=cba_mode,
            optimizer=fresh(), batch_size=batch_size, seed=seed,
        )
        log.info("alpha=%.4g f1=%.6g f2=%.6g fj=%.3g accepted=%s",
                 a, point.f1, point.f2, point.fj_residual, point.accepted)
        solved.append(point)
        if warm_start:
            init = point.theta
    kept = dominance_filter(solved)
    dominated = [p for p in solved if p not in kept]
    return ParetoFront(
        points=kept,
        epsilon=epsilon,
        provenance={
            "steps": steps,
            "cba_mode": cba_mode,
            "seed": seed,
            "warm_start": warm_start,
            "learning_rate": hp.learning_rate,
            "beta1": hp.beta1,
            "beta2": hp.beta2,
            "batch_size": batch_size,
            "alphas": grid,
        },
        dominated=dominated,
        baseline=baseline,
    )


def is_monotone(points: Sequence[TradeoffPoint], slack: float = 1e-4) -> bool:
    """True if, in order of descending alpha, f1 never falls and f2 never rises
    by more than ``slack``."""
    pts = sorted(points, key=lambda p: -p.alpha)
    return all(
        b.f1 >= a.f1 - slack and b.f2 <= a.f2 + slack for a, b in zip(pts, pts[1:])
    )


def checkpoint_name(alpha: float) -> str:
    return f"theta_alpha_{alpha!r}.json"


def _point_to_dict(p: TradeoffPoint, checkpoint: str | None) -> dict:
    out = {
        "alpha": p.alpha,
        "f1": p.f1,
        "f2": p.f2,
        "fj_residual": p.fj_residual,
        "fj_lambda": p.fj_lambda,
        "accepted": p.accepted,
        "theta": p.theta.to_dict(),
        "checkpoint": checkpoint,
        "metrics": p.metrics.to_dict(),
    }
    if p.test is not None:
        out["test"] = p.test
    return out


def _point_from_dict(obj: dict) -> TradeoffPoint:
    return TradeoffPoint(
        alpha=float(obj["alpha"]),
        theta=WeightVector.from_dict(obj["theta"]),
        f1=float(obj["f1"]),
        f2=float(obj["f2"]),
        fj_residual=float(obj["fj_residual"]),
        fj_lambda=float(obj["fj_lambda"]),
        metrics=GroupReport.from_dict(obj["metrics"]),
        accepted=bool(obj["accepted"]),
        test=obj.get("test"),
    )


def export_front(
    front: ParetoFront,
    path: str | Path,
    fmt: str = "csv",
    checkpoint_dir: str | Path | None = None,
) -> Path:
    """Write the front as CSV (one row per point) or JSON (full record).

    For JSON, ``checkpoint_dir`` additionally receives one weight file per
    point, referenced from the JSON by path relative to it.
    """
    if not front.points:
        raise ValueError("cannot export an empty front")
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for p in front.points:
                row = p.row()
                w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        return path
    if fmt != "json":
        raise ValueError(f"unknown format {fmt!r}")
    refs: dict[int, str] = {}
    if checkpoint_dir is not None:
        cdir = Path(checkpoint_dir)
        cdir.mkdir(parents=True, exist_ok=True)
        for p in front.points + front.dominated:
            target = cdir / checkpoint_name(p.alpha)
            p.theta.save(target)
            refs[id(p)] = str(target.relative_to(path.parent)) if target.is_relative_to(
                path.parent) else str(target)
    doc = {
        "epsilon": front.epsilon,
        "provenance": front.provenance,
        "baseline": front.baseline.to_dict() if front.baseline is not None else None,
        "points": [_point_to_dict(p, refs.get(id(p))) for p in front.points],
        "dominated": [_point_to_dict(p, refs.get(id(p))) for p in front.dominated],
    }
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path


def load_front(path: str | Path) -> ParetoFront:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    base = doc.get("baseline")
    return ParetoFront(
        points=[_point_from_dict(p) for p in doc["points"]],
        epsilon=float(doc["epsilon"]),
        provenance=doc.get("provenance", {}),
        dominated=[_point_from_dict(p) for p in doc.get("dominated", [])],
        baseline=WeightVector.from_dict(base) if base else None,
    )


def _fmt(v) -> str:
    if isinstance(v, (bool, int, np.integer)):
        return str(int(v))
    # repr gives the shortest string that round-trips (at most 17 digits)
    return repr(float(v))
