"""Post-hoc group metrics: accuracy per group, accuracy gap and false positive rates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from fairfront.dataset import Dataset
from fairfront.linear_model import PredictionBatch


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class GroupReport:
    """Accuracy and FPR overall and per group, with raw confusion cells.

    Undefined rates are reported as NaN (empty group) or 0.0 (FPR of a group
    without true negatives) and named in ``flags``.
    """

    acc_overall: float
    acc_group: tuple[float, float]
    acc_gap: float
    fpr_group: tuple[float, float]
    counts: tuple[Confusion, Confusion]
    flags: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        per_group = {}
        for g in (0, 1):
            c = self.counts[g]
            per_group[f"g{g}"] = {
                "acc": self.acc_group[g],
                "fpr": self.fpr_group[g],
                "tp": c.tp,
                "fp": c.fp,
                "tn": c.tn,
                "fn": c.fn,
            }
        return {
            "overall": self.acc_overall,
            "per_group": per_group,
            "gap": self.acc_gap,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> GroupReport:
        pg = [obj["per_group"][f"g{g}"] for g in (0, 1)]
        return cls(
            acc_overall=float(obj["overall"]),
            acc_group=(float(pg[0]["acc"]), float(pg[1]["acc"])),
            acc_gap=float(obj["gap"]),
            fpr_group=(float(pg[0]["fpr"]), float(pg[1]["fpr"])),
            counts=tuple(Confusion(p["tp"], p["fp"], p["tn"], p["fn"]) for p in pg),
            flags=tuple(obj.get("flags", ())),
        )


def evaluate(d: Dataset, pred: PredictionBatch) -> GroupReport:
    """Confusion cells per group from hard labels, and the rates derived from them."""
    yhat = np.asarray(pred.hard_labels)
    if yhat.shape != (d.n,):
        raise ValueError(f"length mismatch: {yhat.shape[0]} predictions for {d.n} samples")
    y = d.labels
    counts, accs, fprs, flags = [], [], [], []
    for g in (0, 1):
        m = d.groups == g
        c = Confusion(
            tp=int(np.sum(m & (y == 1) & (yhat == 1))),
            fp=int(np.sum(m & (y == 0) & (yhat == 1))),
            tn=int(np.sum(m & (y == 0) & (yhat == 0))),
            fn=int(np.sum(m & (y == 1) & (yhat == 0))),
        )
        counts.append(c)
        if c.n == 0:
            flags.append(f"g{g}_empty")
            accs.append(math.nan)
        else:
            accs.append((c.tp + c.tn) / c.n)
        if c.fp + c.tn == 0:
            flags.append(f"g{g}_no_negatives")
            fprs.append(0.0)
        else:
            fprs.append(c.fp / (c.fp + c.tn))
    correct = sum(c.tp + c.tn for c in counts)
    return GroupReport(
        acc_overall=correct / d.n,
        acc_group=(accs[0], accs[1]),
        acc_gap=abs(accs[0] - accs[1]),
        fpr_group=(fprs[0], fprs[1]),
        counts=(counts[0], counts[1]),
        flags=tuple(flags),
    )


METRIC_NAMES = ("acc_overall", "acc_g0", "acc_g1", "acc_gap", "fpr_g0", "fpr_g1")


def flat_metrics(r: GroupReport) -> dict[str, float]:
    return {
        "acc_overall": r.acc_overall,
        "acc_g0": r.acc_group[0],
        "acc_g1": r.acc_group[1],
        "acc_gap": r.acc_gap,
        "fpr_g0": r.fpr_group[0],
        "fpr_g1": r.fpr_group[1],
    }


def compare_train_test(train: GroupReport, test: GroupReport) -> dict:
    """Absolute train/test deviation of each metric, plus the union of flags."""
    a, b = flat_metrics(train), flat_metrics(test)
    return {
        "deviation": {k: abs(a[k] - b[k]) for k in METRIC_NAMES},
        "flags": sorted(set(train.flags) | set(test.flags)),
    }
