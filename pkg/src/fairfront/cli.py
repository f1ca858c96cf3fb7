"""Command-line entry point: ``fairfront {synth,baseline,sweep,verify,plotdata}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from fairfront.config import RunConfig, resolve_config, sub_seed
from fairfront.dataset import (
    Dataset,
    DatasetError,
    SplitSpec,
    dataset_stats,
    generate_synthetic,
    load_csv,
    stratified_split,
    write_csv,
)
from fairfront.linear_model import OptimizerState, TrainingError, WeightVector, forward
from fairfront.losses import loss_pair
from fairfront.metrics import GroupReport, compare_train_test, evaluate, flat_metrics
from fairfront.pareto import (
    ParetoFront,
    TradeoffPoint,
    export_front,
    fit_baseline,
    fj_residual,
    load_front,
    solve_at_alpha,
    sweep_front,
)

log = logging.getLogger("fairfront")

VERIFY_TOL = 1e-9


class CLIError(Exception):
    """Precondition failure reported to the user with exit code 2."""


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_provenance(cfg: RunConfig, out: Path, command: str) -> None:
    _dump({"command": command, "config": cfg.to_dict(),
           "sub_seeds": {n: sub_seed(cfg.seed, n) for n in ("synth", "split", "train")}},
          out / "provenance.json")


def load_data(cfg: RunConfig) -> Dataset:
    if cfg.data is None:
        return generate_synthetic(cfg.synth_config())
    path = Path(cfg.data)
    if not path.is_file():
        raise CLIError(f"data file not found: {path}")
    return load_csv(path)


def split_data(cfg: RunConfig, d: Dataset) -> tuple[Dataset, Dataset]:
    return stratified_split(d, SplitSpec(cfg.train_fraction, sub_seed(cfg.seed, "split")))


def _optimizer(cfg: RunConfig) -> OptimizerState:
    return OptimizerState(cfg.learning_rate, cfg.beta1, cfg.beta2)


def test_summary(point: TradeoffPoint, test: Dataset, cba_mode: str) -> dict:
    """Held-out losses and metrics of a trained point, with train/test deviations."""
    lp = loss_pair(test, point.theta, cba_mode)
    report = evaluate(test, forward(point.theta, test))
    return {
        "f1": lp.f1,
        "f2": lp.f2,
        "metrics": report.to_dict(),
        "deviation": compare_train_test(point.metrics, report),
    }


def cmd_synth(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    d = generate_synthetic(cfg.synth_config())
    write_csv(d, out / "data.csv")
    _dump(dataset_stats(d).to_dict(), out / "data.stats.json")
    _write_provenance(cfg, out, "synth")
    print(f"wrote {d.n} samples to {out / 'data.csv'}")
    return 0


def baseline_point(cfg: RunConfig, train: Dataset) -> TradeoffPoint:
    """The accuracy-only model: identical to the alpha=1 point of a sweep."""
    anchor = fit_baseline(train, cfg.steps, _optimizer(cfg), cfg.batch_size,
                          sub_seed(cfg.seed, "train"))
    return solve_at_alpha(
        1.0, train, anchor, cfg.steps, epsilon=cfg.epsilon, cba_mode=cfg.cba_mode,
        optimizer=_optimizer(cfg), batch_size=cfg.batch_size,
        seed=sub_seed(cfg.seed, "train"),
    )


def cmd_baseline(cfg: RunConfig) -> int:
    d = load_data(cfg)
    train, test = split_data(cfg, d)
    out = _outdir(cfg)
    point = baseline_point(cfg, train)
    summary = test_summary(point, test, cfg.cba_mode)
    point.theta.save(out / "theta_baseline.json")
    _dump({
        "alpha": 1.0,
        "f1": point.f1,
        "f2": point.f2,
        "fj_residual": point.fj_residual,
        "accepted": point.accepted,
        "train": point.metrics.to_dict(),
        "test": summary["metrics"],
        "deviation": summary["deviation"],
    }, out / "baseline_report.json")
    _write_provenance(cfg, out, "baseline")
    m = summary["metrics"]
    print(f"baseline test accuracy {m['overall']:.4f}  "
          f"g0 {m['per_group']['g0']['acc']:.4f}  g1 {m['per_group']['g1']['acc']:.4f}  "
          f"gap {m['gap']:.4f}")
    return 0


def run_sweep(cfg: RunConfig) -> tuple[ParetoFront, Dataset, Dataset]:
    d = load_data(cfg)
    train, test = split_data(cfg, d)
    front = sweep_front(
        train, cfg.alphas, cfg.warm_start, steps=cfg.steps, epsilon=cfg.epsilon,
        cba_mode=cfg.cba_mode, optimizer=_optimizer(cfg), batch_size=cfg.batch_size,
        seed=sub_seed(cfg.seed, "train"),
    )
    front.points = [_with_test(p, test, cfg) for p in front.points]
    front.dominated = [_with_test(p, test, cfg) for p in front.dominated]
    front.provenance = {**front.provenance, "config": cfg.to_dict()}
    return front, train, test


def _with_test(p: TradeoffPoint, test: Dataset, cfg: RunConfig) -> TradeoffPoint:
    return replace(p, test=test_summary(p, test, cfg.cba_mode))


def cmd_sweep(cfg: RunConfig) -> int:
    front, _, _ = run_sweep(cfg)
    out = _outdir(cfg)
    export_front(front, out / "front.csv", "csv")
    export_front(front, out / "front.json", "json", checkpoint_dir=out / "checkpoints")
    _write_provenance(cfg, out, "sweep")
    n_acc = len(front.accepted)
    print(f"front: {len(front.points)} points ({n_acc} accepted, "
          f"{len(front.dominated)} dominated) -> {out / 'front.csv'}")
    return 0


def cmd_verify(front_path: Path, data: str | None, tol: float = VERIFY_TOL) -> int:
    if not front_path.is_file():
        raise CLIError(f"front file not found: {front_path}")
    front = load_front(front_path)
    if not front.points:
        raise CLIError(f"front file has no points: {front_path}")
    cfg = RunConfig.from_dict(front.provenance.get("config", {}))
    if data is not None:
        cfg.data = data
    train, _ = split_data(cfg, load_data(cfg))
    raw = json.loads(front_path.read_text(encoding="utf-8"))
    mismatches = []
    for p, entry in zip(front.points, raw["points"]):
        ref = entry.get("checkpoint")
        if not ref:
            raise CLIError(f"point alpha={p.alpha} has no checkpoint reference")
        ckpt = Path(ref) if Path(ref).is_absolute() else front_path.parent / ref
        if not ckpt.is_file():
            raise CLIError(f"missing checkpoint: {ckpt}")
        lp = loss_pair(train, WeightVector.load(ckpt), cfg.cba_mode)
        res, _ = fj_residual(lp.g1, lp.g2)
        for name, stored, fresh in (("f1", p.f1, lp.f1), ("f2", p.f2, lp.f2),
                                    ("fj_residual", p.fj_residual, res)):
            if abs(stored - fresh) > tol:
                mismatches.append({"alpha": p.alpha, "quantity": name,
                                   "stored": stored, "recomputed": fresh})
        if (res <= front.epsilon) != p.accepted:
            mismatches.append({"alpha": p.alpha, "quantity": "accepted",
                               "stored": p.accepted, "recomputed": res <= front.epsilon})
    report = {"front": str(front_path), "points": len(front.points),
              "tolerance": tol, "mismatches": mismatches}
    _dump(report, front_path.parent / "verify_report.json")
    for m in mismatches:
        print(f"MISMATCH alpha={m['alpha']} {m['quantity']}: "
              f"stored {m['stored']} recomputed {m['recomputed']}")
    print(f"verified {len(front.points)} points, {len(mismatches)} mismatches")
    return 1 if mismatches else 0


PLOT_METRICS = ("f1", "f2", "acc_overall", "acc_gap", "fpr_g0", "fpr_g1")


def cmd_plotdata(front_path: Path, out: Path | None) -> int:
    if not front_path.is_file():
        raise CLIError(f"front file not found: {front_path}")
    front = load_front(front_path)
    if not front.points:
        raise CLIError(f"front file has no points: {front_path}")
    out = out or front_path.parent / "plotdata"
    out.mkdir(parents=True, exist_ok=True)
    for metric in PLOT_METRICS:
        lines = ["alpha,train,test"]
        for p in front.points:
            train_v = _metric(p, metric, test=False)
            test_v = _metric(p, metric, test=True)
            lines.append(f"{p.alpha!r},{train_v!r},{test_v!r}")
        (out / f"{metric}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(PLOT_METRICS)} tables of {len(front.points)} rows to {out}")
    return 0


def _metric(p: TradeoffPoint, name: str, test: bool) -> float:
    if name in ("f1", "f2"):
        if test:
            return float(p.test[name]) if p.test else float("nan")
        return float(getattr(p, name))
    if test:
        if not p.test:
            return float("nan")
        return flat_metrics(GroupReport.from_dict(p.test["metrics"]))[name]
    return flat_metrics(p.metrics)[name]


def _add_run_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", type=Path, help="flat key=value config file")
    sp.add_argument("--data", help="CSV dataset (default: synthetic preset)")
    sp.add_argument("--cells", help="synthetic cell counts g0c1,g0c0,g1c1,g1c0")
    sp.add_argument("--feature-dim", type=int)
    sp.add_argument("--separation", help="class separation for group 0,1")
    sp.add_argument("--group-shift", type=float)
    sp.add_argument("--noise-scale", type=float)
    sp.add_argument("--layout", choices=("split", "shared"))
    sp.add_argument("--train-fraction", type=float)
    sp.add_argument("--learning-rate", "--lr", type=float)
    sp.add_argument("--beta1", type=float)
    sp.add_argument("--beta2", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--batch-size", type=int, help="0 or omitted: full batch")
    sp.add_argument("--cba-mode", choices=("normalized", "literal"))
    sp.add_argument("--alphas", help="comma-separated trade-off weights")
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--warm-start", dest="warm_start", action="store_true", default=None)
    sp.add_argument("--no-warm-start", dest="warm_start", action="store_false")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="output directory")


_RUN_KEYS = ("data", "cells", "feature_dim", "separation", "group_shift", "noise_scale", "layout",
             "train_fraction", "learning_rate", "beta1", "beta2", "steps", "batch_size",
             "cba_mode", "alphas", "epsilon", "warm_start", "seed", "out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairfront", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("synth", "write a synthetic dataset CSV"),
                        ("baseline", "train the accuracy-only model"),
                        ("sweep", "trace the trade-off front")):
        _add_run_flags(sub.add_parser(name, help=help_))
    v = sub.add_parser("verify", help="recompute a saved front from its checkpoints")
    v.add_argument("front", type=Path)
    v.add_argument("--data", help="CSV dataset overriding the one recorded in the front")
    v.add_argument("--tolerance", type=float, default=VERIFY_TOL)
    pd = sub.add_parser("plotdata", help="per-metric alpha tables for plotting")
    pd.add_argument("front", type=Path)
    pd.add_argument("--out", type=Path)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "verify":
            return cmd_verify(args.front, args.data, args.tolerance)
        if args.command == "plotdata":
            return cmd_plotdata(args.front, args.out)
        cfg = resolve_config(args.config, {k: getattr(args, k) for k in _RUN_KEYS})
        return {"synth": cmd_synth, "baseline": cmd_baseline, "sweep": cmd_sweep}[
            args.command](cfg)
    except (CLIError, DatasetError, FileNotFoundError, ValueError, TrainingError) as exc:
        print(f"fairfront: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
