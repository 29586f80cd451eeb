"""Translational temporal embeddings for quadruple plausibility.

A dated fact (s, r, o, b) with b the weekly-cycle bucket (weekday) scores

    f(s, r, o, b) = || v_s + v_r + v_b - v_o ||_2

and trains by SGD on the margin ranking loss

    L = max(0, margin + f(positive) - f(negative))

with negatives corrupting either the object or the time bucket. Plausibility
is exp(-f), a monotone score in (0, 1], not a calibrated probability.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from eskg.errors import UnknownSymbolError, ValidationError
from eskg.kg.model import ChildTKG

N_TIME_BUCKETS = 7


def time_bucket(day: date) -> int:
    """Position in the weekly cycle (Monday = 0)."""
    return day.weekday()


@dataclass(frozen=True)
class Quadruple:
    subject: str
    relation: str
    object: str
    date: date

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "relation": self.relation,
            "object": self.object,
            "date": self.date.isoformat(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Quadruple:
        return cls(d["subject"], d["relation"], d["object"], date.fromisoformat(d["date"]))


@dataclass
class TrainingConfig:
    dim: int = 32
    learning_rate: float = 0.05
    margin: float = 1.0
    epochs: int = 150
    negatives: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1 or self.epochs < 0 or self.negatives < 1:
            raise ValidationError("bad training configuration")
        if self.learning_rate <= 0 or self.margin <= 0:
            raise ValidationError("learning_rate and margin must be positive")

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "learning_rate": self.learning_rate,
            "margin": self.margin,
            "epochs": self.epochs,
            "negatives": self.negatives,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> TrainingConfig:
        return cls(**{k: d[k] for k in cls().to_dict() if k in d})


def quadruples_from_tkg(tkg: ChildTKG) -> list[Quadruple]:
    """Live, dated events as quadruples (interval events use their start)."""
    quads = []
    for event in tkg.live_events():
        if not event.time.is_known:
            continue
        t = event.triple
        quads.append(Quadruple(t.subject, t.relation, t.object, event.time.start.date()))
    return quads


def pair_loss_and_grads(
    E: np.ndarray,
    R: np.ndarray,
    T: np.ndarray,
    pos: tuple[int, int, int, int],
    neg: tuple[int, int, int, int],
    margin: float,
) -> tuple[float, dict[tuple[str, int], np.ndarray]]:
    """Margin ranking loss for one positive/negative pair with its analytic
    gradient, keyed by (matrix name, row). Rows shared between the positive
    and the negative accumulate both contributions."""
    grads: dict[tuple[str, int], np.ndarray] = {}

    def residual(idx):
        s, r, o, b = idx
        return E[s] + R[r] + T[b] - E[o]

    u_pos, u_neg = residual(pos), residual(neg)
    f_pos, f_neg = float(np.linalg.norm(u_pos)), float(np.linalg.norm(u_neg))
    loss = margin + f_pos - f_neg
    if loss <= 0.0:
        return 0.0, grads

    def add(name, row, vec):
        key = (name, row)
        grads[key] = grads.get(key, 0.0) + vec

    for idx, u, f, sign in ((pos, u_pos, f_pos, 1.0), (neg, u_neg, f_neg, -1.0)):
        if f < 1e-12:
            continue
        g = sign * u / f
        s, r, o, b = idx
        add("E", s, g)
        add("R", r, g)
        add("T", b, g)
        add("E", o, -g)
    return loss, grads


class TemporalEmbeddingModel:
    def __init__(
        self,
        entity_index: dict[str, int],
        relation_index: dict[str, int],
        E: np.ndarray,
        R: np.ndarray,
        T: np.ndarray,
        config: TrainingConfig,
        loss_history: list[float],
        max_training_date: date | None = None,
    ):
        self.entity_index = entity_index
        self.relation_index = relation_index
        self.E = E
        self.R = R
        self.T = T
        self.config = config
        self.loss_history = loss_history
        self.max_training_date = max_training_date

    @property
    def entities(self) -> list[str]:
        return sorted(self.entity_index, key=self.entity_index.get)

    def _indices(self, q: Quadruple) -> tuple[int, int, int, int]:
        try:
            s = self.entity_index[q.subject]
        except KeyError:
            raise UnknownSymbolError(q.subject, "subject entity") from None
        try:
            r = self.relation_index[q.relation]
        except KeyError:
            raise UnknownSymbolError(q.relation, "relation") from None
        try:
            o = self.entity_index[q.object]
        except KeyError:
            raise UnknownSymbolError(q.object, "object entity") from None
        return s, r, o, time_bucket(q.date)

    def distance(self, q: Quadruple) -> float:
        s, r, o, b = self._indices(q)
        return float(np.linalg.norm(self.E[s] + self.R[r] + self.T[b] - self.E[o]))

    def plausibility(self, q: Quadruple) -> float:
        return float(np.exp(-self.distance(q)))

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "config": self.config.to_dict(),
            "entities": {name: self.E[i].tolist() for name, i in sorted(self.entity_index.items())},
            "relations": {name: self.R[i].tolist() for name, i in sorted(self.relation_index.items())},
            "time_buckets": self.T.tolist(),
            "loss_history": list(self.loss_history),
            "max_training_date": self.max_training_date.isoformat() if self.max_training_date else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> TemporalEmbeddingModel:
        entity_index = {name: i for i, name in enumerate(sorted(d["entities"]))}
        relation_index = {name: i for i, name in enumerate(sorted(d["relations"]))}
        E = np.array([d["entities"][name] for name in sorted(d["entities"])])
        R = np.array([d["relations"][name] for name in sorted(d["relations"])])
        return cls(
            entity_index=entity_index,
            relation_index=relation_index,
            E=E,
            R=R,
            T=np.array(d["time_buckets"]),
            config=TrainingConfig.from_dict(d.get("config", {})),
            loss_history=list(d.get("loss_history", [])),
            max_training_date=(
                date.fromisoformat(d["max_training_date"]) if d.get("max_training_date") else None
            ),
        )

    def save(self, path: str | Path):
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> TemporalEmbeddingModel:
        return cls.from_dict(json.loads(Path(path).read_text()))


def score_quadruple(model: TemporalEmbeddingModel, q: Quadruple) -> float:
    return model.plausibility(q)


def _corrupt(
    pos: tuple[int, int, int, int], n_entities: int, rng: np.random.Generator
) -> tuple[int, int, int, int]:
    s, r, o, b = pos
    corrupt_object = n_entities > 1 and rng.random() < 0.5
    if corrupt_object:
        new_o = int(rng.integers(n_entities - 1))
        if new_o >= o:
            new_o += 1
        return (s, r, new_o, b)
    new_b = int(rng.integers(N_TIME_BUCKETS - 1))
    if new_b >= b:
        new_b += 1
    return (s, r, o, new_b)


def train_temporal_model(
    source: ChildTKG | list[Quadruple],
    config: TrainingConfig | None = None,
    entities: list[str] | None = None,
    relations: list[str] | None = None,
) -> TemporalEmbeddingModel:
    """SGD over margin ranking loss; deterministic under the config seed.

    Entity rows are re-projected onto the unit ball after every epoch, the
    usual translational-embedding regularizer.
    """
    config = config or TrainingConfig()
    if isinstance(source, ChildTKG):
        positives = quadruples_from_tkg(source)
        entities = sorted(source.entities)
        relations = sorted(source.relations)
    else:
        positives = list(source)
        entities = sorted(entities or {q.subject for q in positives} | {q.object for q in positives})
        relations = sorted(relations or {q.relation for q in positives})
    if not positives:
        raise ValidationError("no dated events to train on")

    entity_index = {name: i for i, name in enumerate(entities)}
    relation_index = {name: i for i, name in enumerate(relations)}
    rng = np.random.default_rng(config.seed)
    bound = 6.0 / np.sqrt(config.dim)
    E = rng.uniform(-bound, bound, size=(len(entities), config.dim))
    R = rng.uniform(-bound, bound, size=(len(relations), config.dim))
    T = rng.uniform(-bound, bound, size=(N_TIME_BUCKETS, config.dim))

    pos_indices = [
        (entity_index[q.subject], relation_index[q.relation], entity_index[q.object], time_bucket(q.date))
        for q in positives
    ]

    def renorm_entities():
        norms = np.linalg.norm(E, axis=1, keepdims=True)
        np.divide(E, norms, out=E, where=norms > 1.0)

    def epoch_loss_no_update() -> float:
        total = 0.0
        for pos in pos_indices:
            for _ in range(config.negatives):
                neg = _corrupt(pos, len(entities), rng)
                loss, _ = pair_loss_and_grads(E, R, T, pos, neg, config.margin)
                total += loss
        return total / (len(pos_indices) * config.negatives)

    renorm_entities()
    loss_history = [epoch_loss_no_update()]

    matrices = {"E": E, "R": R, "T": T}
    for _ in range(config.epochs):
        order = rng.permutation(len(pos_indices))
        total = 0.0
        for i in order:
            pos = pos_indices[i]
            for _ in range(config.negatives):
                neg = _corrupt(pos, len(entities), rng)
                loss, grads = pair_loss_and_grads(E, R, T, pos, neg, config.margin)
                total += loss
                for (name, row), grad in grads.items():
                    matrices[name][row] -= config.learning_rate * grad
        renorm_entities()
        loss_history.append(total / (len(pos_indices) * config.negatives))

    return TemporalEmbeddingModel(
        entity_index=entity_index,
        relation_index=relation_index,
        E=E,
        R=R,
        T=T,
        config=config,
        loss_history=loss_history,
        max_training_date=max(q.date for q in positives),
    )
