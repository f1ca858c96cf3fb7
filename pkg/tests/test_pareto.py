from __future__ import annotations

import csv
import math

import numpy as np
import pytest

from fairfront.config import RunConfig, sub_seed
from fairfront.cli import load_data, split_data
from fairfront.linear_model import OptimizerState, WeightVector
from fairfront.pareto import (
    CSV_COLUMNS,
    ParetoFront,
    default_alphas,
    dominance_filter,
    export_front,
    fit_baseline,
    fj_residual,
    is_monotone,
    load_front,
    solve_at_alpha,
    sweep_front,
)

import oracles


class TestFjResidual:
    def test_opposing(self):
        res, lam = fj_residual(np.array([1.0, -2.0]), np.array([-1.0, 2.0]))
        assert (res, lam) == (0.0, 0.5)

    def test_equal(self):
        g = np.array([3.0, 4.0])
        res, lam = fj_residual(g, g)
        assert lam == 0.5 and res == 5.0

    def test_orthogonal_units(self):
        res, lam = fj_residual(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        want_res, want_lam = oracles.fj_grid([1.0, 0.0], [0.0, 1.0])
        assert lam == pytest.approx(want_lam, abs=1e-12)
        assert res == pytest.approx(want_res, abs=1e-12)
        assert res == pytest.approx(math.sqrt(0.5), abs=1e-12)

    def test_clamped(self):
        # g1 is small and aligned with g2: best is all weight on g1
        res, lam = fj_residual(np.array([0.1, 0.0]), np.array([1.0, 0.0]))
        assert lam == 1.0 and res == pytest.approx(0.1)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            fj_residual(np.ones(2), np.ones(3))


class TestDominance:
    def test_drop_dominated(self):
        assert dominance_filter([(1, 2), (2, 1), (2, 2)]) == [(1, 2), (2, 1)]

    def test_identical(self):
        pts = [(1.0, 1.0)] * 3
        assert dominance_filter(pts) == pts

    def test_chain(self):
        pts = [(1, 3), (2, 2), (3, 1)]
        assert dominance_filter(pts) == pts

    def test_empty(self):
        assert dominance_filter([]) == []


class TestAlphas:
    def test_default_grid(self):
        g = default_alphas()
        assert len(g) == 11
        assert g[0] == 1.0 and g[-1] == 0.0
        assert g[1] == 0.9 and g[5] == 0.5

    def test_monotone_helper(self):
        class P:
            def __init__(self, a, f1, f2):
                self.alpha, self.f1, self.f2 = a, f1, f2

        assert is_monotone([P(1, 0.1, 5), P(0.5, 0.2, 3), P(0, 0.3, 1)])
        assert not is_monotone([P(1, 0.1, 5), P(0.5, 0.05, 3)])
        assert is_monotone([P(1, 0.1, 5), P(0.5, 0.1 - 5e-5, 3)])


@pytest.fixture(scope="module")
def small_front(request):
    from conftest import random_dataset

    d = random_dataset(np.random.default_rng(3), n=120, f=3)
    return d, sweep_front(d, [1.0, 0.5, 0.0], steps=300,
                          optimizer=OptimizerState(learning_rate=0.02))


class TestSweep:
    def test_descending_and_provenance(self, small_front):
        _, front = small_front
        alphas = [p.alpha for p in front.points + front.dominated]
        assert sorted(alphas, reverse=True) == [1.0, 0.5, 0.0]
        assert front.provenance["alphas"] == [1.0, 0.5, 0.0]
        assert front.baseline is not None

    def test_endpoints_extreme(self, small_front):
        _, front = small_front
        pts = front.points + front.dominated
        assert front.at(1.0).f1 <= min(p.f1 for p in pts) + 1e-6
        assert front.at(0.0).f2 <= min(p.f2 for p in pts) + 1e-6

    def test_single_alpha_is_baseline(self, small_front):
        d, _ = small_front
        opt = OptimizerState(learning_rate=0.02)
        front = sweep_front(d, [1.0], steps=300, optimizer=opt)
        anchor = fit_baseline(d, 300, opt)
        expected = solve_at_alpha(1.0, d, anchor, 300, optimizer=opt)
        assert len(front.points) == 1
        assert np.array_equal(front.points[0].theta.flat(), expected.theta.flat())

    def test_epsilon_zero_rejects(self, small_front):
        d, _ = small_front
        front = sweep_front(d, [1.0, 0.0], steps=50, epsilon=0.0)
        assert all(not p.accepted for p in front.points)

    def test_empty_grid(self, small_front):
        d, _ = small_front
        with pytest.raises(ValueError, match="empty"):
            sweep_front(d, [])

    def test_bad_alpha(self, small_front):
        d, _ = small_front
        with pytest.raises(ValueError):
            sweep_front(d, [1.0, 1.5])

    def test_deterministic(self, small_front):
        d, front = small_front
        again = sweep_front(d, [1.0, 0.5, 0.0], steps=300,
                            optimizer=OptimizerState(learning_rate=0.02))
        for a, b in zip(front.points, again.points):
            assert np.array_equal(a.theta.flat(), b.theta.flat())


class TestExport:
    def test_csv_one_point(self, small_front, tmp_path):
        _, front = small_front
        one = ParetoFront(points=front.points[:1], epsilon=front.epsilon)
        export_front(one, tmp_path / "f.csv")
        lines = (tmp_path / "f.csv").read_text().splitlines()
        assert len(lines) == 2
        assert lines[0] == ",".join(CSV_COLUMNS)

    def test_csv_lossless(self, small_front, tmp_path):
        _, front = small_front
        export_front(front, tmp_path / "f.csv")
        with open(tmp_path / "f.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        for p, row in zip(front.points, rows):
            for k, v in p.row().items():
                assert float(row[k]) == float(v)

    def test_json_round_trip(self, small_front, tmp_path):
        _, front = small_front
        export_front(front, tmp_path / "f.json", "json", checkpoint_dir=tmp_path / "ck")
        back = load_front(tmp_path / "f.json")
        assert back.epsilon == front.epsilon
        assert back.provenance == front.provenance
        for a, b in zip(front.points + front.dominated, back.points + back.dominated):
            assert (a.alpha, a.f1, a.f2, a.fj_residual, a.accepted) == (
                b.alpha, b.f1, b.f2, b.fj_residual, b.accepted)
            assert np.array_equal(a.theta.flat(), b.theta.flat())
            assert a.metrics == b.metrics
        for p in front.points:
            ck = WeightVector.load(tmp_path / "ck" / f"theta_alpha_{p.alpha!r}.json")
            assert np.array_equal(ck.flat(), p.theta.flat())

    def test_empty_front(self, tmp_path):
        with pytest.raises(ValueError, match="empty"):
            export_front(ParetoFront(points=[]), tmp_path / "f.csv")

    def test_unknown_format(self, small_front, tmp_path):
        with pytest.raises(ValueError, match="format"):
            export_front(small_front[1], tmp_path / "f.x", "xml")


@pytest.mark.slow
class TestDefaultSweep:
    """Properties of the front traced with every setting at its default."""

    def test_eleven_rows(self, default_run):
        with open(default_run / "front.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [float(r["alpha"]) for r in rows] == default_alphas()

    def test_enough_accepted(self, default_front):
        assert len(default_front.accepted) >= 9

    def test_endpoints_extreme(self, default_front):
        pts = default_front.points + default_front.dominated
        assert default_front.at(1.0).f1 <= min(p.f1 for p in pts) + 1e-6
        assert default_front.at(0.0).f2 <= min(p.f2 for p in pts) + 1e-6

    def test_warm_start_insensitive(self, default_front):
        cfg = RunConfig()
        train, _ = split_data(cfg, load_data(cfg))
        cold = sweep_front(train, cfg.alphas, warm_start=False,
                           seed=sub_seed(cfg.seed, "train"))
        warm = {p.alpha: p for p in default_front.accepted}
        # small alpha leaves f1 nearly free along the f2 = 0 set, so the start
        # point picks the minimizer there; warm starts keep the lower f1
        for p in cold.accepted:
            if p.alpha in warm:
                assert abs(p.f2 - warm[p.alpha].f2) <= 1e-3
                if p.alpha >= 0.5:
                    assert abs(p.f1 - warm[p.alpha].f1) <= 5e-3
                else:
                    assert warm[p.alpha].f1 <= p.f1 + 1e-4
