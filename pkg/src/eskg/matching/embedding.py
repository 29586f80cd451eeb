"""Deterministic label embeddings.

Each slot's normalized label is split into space-padded character trigrams;
every trigram is hashed into one of d signed buckets and the bucket vector is
L2-normalized. No training, no external model, bit-identical across runs.
Slot-specific hash salts decorrelate the three slot spaces so a bucket
collision in one slot does not echo in the others.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from eskg.kg.model import TripleText, normalize_label

_SLOT_SALTS = {"subject": b"subject", "relation": b"relation", "object": b"object"}


@dataclass(frozen=True)
class TripleEmbedding:
    subject_vec: np.ndarray
    relation_vec: np.ndarray
    object_vec: np.ndarray

    @property
    def dim(self) -> int:
        return self.subject_vec.shape[0]


def _trigrams(label: str) -> list[str]:
    s = normalize_label(label)
    if not s:
        return []
    s = f" {s} "
    if len(s) < 3:
        return [s]
    return [s[i : i + 3] for i in range(len(s) - 2)]


def embed_label(label: str, dim: int, salt: bytes) -> np.ndarray:
    vec = np.zeros(dim)
    for gram in _trigrams(label):
        digest = hashlib.blake2b(salt + b"\x00" + gram.encode(), digest_size=8).digest()
        bucket = int.from_bytes(digest[:4], "big") % dim
        vec[bucket] += 1.0 if digest[4] & 1 else -1.0
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


class TrigramEmbedder:
    """Default embedder. Swap in anything with the same ``embed`` signature
    to use a learned model instead."""

    def __init__(self, dim: int = 64):
        if dim < 1:
            raise ValueError("embedding dimension must be positive")
        self.dim = dim

    def embed(self, triple: TripleText) -> TripleEmbedding:
        return TripleEmbedding(
            subject_vec=embed_label(triple.subject, self.dim, _SLOT_SALTS["subject"]),
            relation_vec=embed_label(triple.relation, self.dim, _SLOT_SALTS["relation"]),
            object_vec=embed_label(triple.object, self.dim, _SLOT_SALTS["object"]),
        )
