from datetime import date

import numpy as np
import pytest

from eskg.analytics.tkge import (
    N_TIME_BUCKETS,
    Quadruple,
    TemporalEmbeddingModel,
    TrainingConfig,
    pair_loss_and_grads,
    quadruples_from_tkg,
    score_quadruple,
    time_bucket,
    train_temporal_model,
)
from eskg.errors import UnknownSymbolError, ValidationError
from eskg.fixtures import saturday_tkg


def test_time_bucket_is_weekday():
    assert time_bucket(date(2024, 1, 6)) == 5  # Saturday
    assert time_bucket(date(2024, 1, 8)) == 0  # Monday


class TestGradients:
    def test_analytic_matches_central_differences(self):
        # 100 random configurations; relative agreement to 1e-4 on every
        # touched coordinate.
        rng = np.random.default_rng(123)
        h = 1e-6
        checked = 0
        while checked < 100:
            n_e, n_r, dim = rng.integers(2, 6), rng.integers(1, 4), int(rng.integers(2, 8))
            E = rng.normal(size=(n_e, dim))
            R = rng.normal(size=(n_r, dim))
            T = rng.normal(size=(N_TIME_BUCKETS, dim))
            pos = (int(rng.integers(n_e)), int(rng.integers(n_r)), int(rng.integers(n_e)), int(rng.integers(7)))
            neg = (pos[0], pos[1], int(rng.integers(n_e)), int(rng.integers(7)))
            if neg == pos:
                continue
            margin = 5.0  # keeps the hinge active for almost any draw
            loss, grads = pair_loss_and_grads(E, R, T, pos, neg, margin)
            if loss <= 1e-6 or not grads:
                continue
            checked += 1
            mats = {"E": E, "R": R, "T": T}
            for (name, row), grad in grads.items():
                mat = mats[name]
                for col in range(dim):
                    orig = mat[row, col]
                    mat[row, col] = orig + h
                    up, _ = pair_loss_and_grads(E, R, T, pos, neg, margin)
                    mat[row, col] = orig - h
                    down, _ = pair_loss_and_grads(E, R, T, pos, neg, margin)
                    mat[row, col] = orig
                    fd = (up - down) / (2 * h)
                    # relative 1e-4 with an absolute floor for exact-zero
                    # coordinates, where central differences only see noise
                    assert abs(fd - grad[col]) < max(1e-4 * max(abs(fd), abs(grad[col])), 1e-7)

    def test_inactive_margin_has_zero_gradient(self):
        E = np.zeros((2, 4))
        R = np.zeros((1, 4))
        T = np.zeros((N_TIME_BUCKETS, 4))
        E[1] = 10.0  # negative scores far worse than positive
        loss, grads = pair_loss_and_grads(E, R, T, (0, 0, 0, 0), (0, 0, 1, 0), margin=1.0)
        assert loss == 0.0 and grads == {}


class TestTraining:
    def test_zero_epochs_returns_initial_state(self):
        tkg = saturday_tkg(weeks=4)
        model = train_temporal_model(tkg, TrainingConfig(epochs=0, seed=3))
        assert len(model.loss_history) == 1
        assert model.loss_history[0] > 0

    def test_no_dated_events_rejected(self):
        with pytest.raises(ValidationError):
            train_temporal_model([], TrainingConfig())

    def test_seeded_determinism(self):
        tkg = saturday_tkg(weeks=4)
        cfg = TrainingConfig(epochs=5, dim=8, seed=11)
        a = train_temporal_model(tkg, cfg)
        b = train_temporal_model(tkg, cfg)
        assert np.array_equal(a.E, b.E) and np.array_equal(a.T, b.T)
        assert a.loss_history == b.loss_history

    def test_loss_descends_on_weekly_fixture(self):
        model = train_temporal_model(saturday_tkg(), TrainingConfig(epochs=60, dim=16, seed=5))
        history = model.loss_history
        assert history[-1] < history[0]
        for earlier, later in zip(history, history[1:]):
            assert later <= earlier * 1.05 + 1e-9

    def test_saturday_separates_from_wednesday(self):
        tkg = saturday_tkg()
        model = train_temporal_model(tkg, TrainingConfig(epochs=80, dim=16, seed=5))
        saturday = Quadruple("ent-0001", "rel-0001", "ent-0001", date(2024, 6, 1))
        wednesday = Quadruple("ent-0001", "rel-0001", "ent-0001", date(2024, 5, 29))
        assert model.distance(saturday) < model.distance(wednesday)
        assert model.plausibility(saturday) > model.plausibility(wednesday)

    def test_max_training_date_recorded(self):
        tkg = saturday_tkg(weeks=3)
        model = train_temporal_model(tkg, TrainingConfig(epochs=1, dim=4))
        assert model.max_training_date == max(q.date for q in quadruples_from_tkg(tkg))


@pytest.fixture(scope="module")
def trained_model():
    return train_temporal_model(saturday_tkg(weeks=6), TrainingConfig(epochs=20, dim=8, seed=2))


class TestScoring:
    @pytest.fixture
    def model(self, trained_model):
        return trained_model

    def test_plausibility_in_unit_interval(self, model):
        for q in quadruples_from_tkg(saturday_tkg(weeks=6)):
            assert 0.0 < score_quadruple(model, q) <= 1.0

    def test_plausibility_decreases_with_distance(self, model):
        quads = quadruples_from_tkg(saturday_tkg(weeks=6))[:10]
        pairs = [(model.distance(q), model.plausibility(q)) for q in quads]
        pairs.sort()
        for (d1, p1), (d2, p2) in zip(pairs, pairs[1:]):
            if d2 > d1:
                assert p2 < p1

    def test_unknown_symbol_named_in_error(self, model):
        with pytest.raises(UnknownSymbolError, match="ghost"):
            model.distance(Quadruple("ghost", "rel-0001", "ent-0001", date(2024, 6, 1)))
        with pytest.raises(UnknownSymbolError, match="r-ghost"):
            model.distance(Quadruple("ent-0001", "r-ghost", "ent-0001", date(2024, 6, 1)))

    def test_model_roundtrip(self, model, tmp_path):
        path = tmp_path / "model.json"
        model.save(path)
        again = TemporalEmbeddingModel.load(path)
        q = Quadruple("ent-0001", "rel-0001", "ent-0001", date(2024, 6, 1))
        assert again.distance(q) == pytest.approx(model.distance(q), abs=1e-12)
        assert again.max_training_date == model.max_training_date
