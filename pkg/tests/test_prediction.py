from datetime import date, timedelta

import pytest

from eskg.analytics.prediction import (
    RandomScorer,
    WeekdayFrequencyBaseline,
    evaluate_prediction,
)
from eskg.analytics.tkge import Quadruple, TrainingConfig, quadruples_from_tkg, train_temporal_model
from eskg.errors import ValidationError
from eskg.fixtures import saturday_held_out, saturday_tkg

ENTITIES = ["ent-0001", "ent-0002", "ent-0003", "ent-0004"]


def test_perfect_scorer_has_ap_one():
    truths = {Quadruple("ent-0001", "r", "ent-0001", date(2024, 6, 1) + timedelta(weeks=i)) for i in range(5)}
    scorer = lambda q: 1.0 if q in truths else 0.0
    report = evaluate_prediction(scorer, sorted(truths, key=lambda q: q.date), ENTITIES, seed=1)
    assert report.average_precision == 1.0 and report.hits_at_1 == 1.0


def test_random_scorer_near_half_hits():
    held_out = [
        Quadruple("ent-0001", "r", "ent-0001", date(2024, 6, 1) + timedelta(days=i))
        for i in range(1000)
    ]
    report = evaluate_prediction(RandomScorer(seed=5).plausibility, held_out, ENTITIES, seed=5)
    assert abs(report.hits_at_1 - 0.5) < 0.05


def test_empty_held_out_rejected():
    with pytest.raises(ValidationError):
        evaluate_prediction(lambda q: 0.0, [], ENTITIES)


def test_held_out_must_postdate_training():
    held_out = [Quadruple("ent-0001", "r", "ent-0001", date(2024, 1, 1))]
    with pytest.raises(ValidationError):
        evaluate_prediction(lambda q: 0.0, held_out, ENTITIES, training_cutoff=date(2024, 6, 1))


def test_weekday_baseline_beats_random_on_weekly_fixture():
    tkg = saturday_tkg()
    train = quadruples_from_tkg(tkg)
    held_out = saturday_held_out(tkg)
    cutoff = max(q.date for q in train)
    baseline = WeekdayFrequencyBaseline().fit(train)
    base_report = evaluate_prediction(
        baseline.plausibility, held_out, ENTITIES, seed=3, training_cutoff=cutoff
    )
    rnd_report = evaluate_prediction(
        RandomScorer(seed=3).plausibility, held_out * 250, ENTITIES, seed=3, training_cutoff=cutoff
    )
    # Brute-force count oracle: 20 Saturdays vs 0 of any other weekday for
    # the happy-state relation, so the true quadruple always ranks first.
    assert base_report.average_precision == 1.0
    assert base_report.average_precision > rnd_report.hits_at_1


def test_trained_model_at_least_matches_baseline():
    tkg = saturday_tkg()
    train = quadruples_from_tkg(tkg)
    held_out = saturday_held_out(tkg)
    cutoff = max(q.date for q in train)
    model = train_temporal_model(tkg, TrainingConfig(epochs=80, dim=16, seed=5))
    baseline = WeekdayFrequencyBaseline().fit(train)
    model_report = evaluate_prediction(
        model.plausibility, held_out, ENTITIES, seed=7, training_cutoff=cutoff
    )
    base_report = evaluate_prediction(
        baseline.plausibility, held_out, ENTITIES, seed=7, training_cutoff=cutoff
    )
    assert model_report.average_precision >= base_report.average_precision
