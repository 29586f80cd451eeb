from eskg.analytics.patterns import OrderPattern, mine_order_patterns
from eskg.analytics.prediction import (
    PredictionReport,
    RandomScorer,
    WeekdayFrequencyBaseline,
    corruptions_for,
    evaluate_prediction,
)
from eskg.analytics.stats import RelationStats, dated_events, relation_stats
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
from eskg.analytics.walks import (
    TemporalWalk,
    WalkStep,
    anonymize_walk,
    default_pseudonyms,
    iso_week,
    sample_temporal_walk,
)

__all__ = [
    "N_TIME_BUCKETS",
    "OrderPattern",
    "PredictionReport",
    "Quadruple",
    "RandomScorer",
    "RelationStats",
    "TemporalEmbeddingModel",
    "TemporalWalk",
    "TrainingConfig",
    "WalkStep",
    "WeekdayFrequencyBaseline",
    "anonymize_walk",
    "corruptions_for",
    "dated_events",
    "default_pseudonyms",
    "evaluate_prediction",
    "iso_week",
    "mine_order_patterns",
    "pair_loss_and_grads",
    "quadruples_from_tkg",
    "relation_stats",
    "sample_temporal_walk",
    "score_quadruple",
    "time_bucket",
    "train_temporal_model",
]
