"""Free-marginal multi-rater agreement.

For item i with n raters over k categories, where n_ic raters picked
category c:

    P_o,i = sum_c n_ic * (n_ic - 1) / (n * (n - 1))
    P_o   = mean_i P_o,i
    P_e   = 1 / k                       (raters unconstrained in assignment)
    kappa = (P_o - P_e) / (1 - P_e)     (itemwise with P_o,i likewise)

kappa ranges over [-1/(k-1), 1]; 1 iff every item is unanimous.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from eskg.corpus.categories import ESCategory
from eskg.errors import ValidationError


@dataclass(frozen=True)
class CategoryAnnotation:
    statement_id: str
    rater_id: str
    category: ESCategory


@dataclass
class AgreementReport:
    p_o: float
    p_e: float
    kappa: float
    per_item: dict[str, float]
    k: int
    n: int
    n_items: int
    excluded_items: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "p_o": self.p_o,
            "p_e": self.p_e,
            "kappa": self.kappa,
            "per_item": dict(sorted(self.per_item.items())),
            "k": self.k,
            "n": self.n,
            "n_items": self.n_items,
            "excluded_items": list(self.excluded_items),
        }

    @classmethod
    def from_dict(cls, d: dict) -> AgreementReport:
        return cls(
            p_o=d["p_o"],
            p_e=d["p_e"],
            kappa=d["kappa"],
            per_item=dict(d["per_item"]),
            k=d["k"],
            n=d["n"],
            n_items=d["n_items"],
            excluded_items=list(d.get("excluded_items", [])),
        )


def group_by_item(annotations: list[CategoryAnnotation]) -> dict[str, Counter]:
    """Category counts per statement; rejects duplicate (statement, rater) pairs."""
    seen: set[tuple[str, str]] = set()
    counts: dict[str, Counter] = {}
    for ann in annotations:
        pair = (ann.statement_id, ann.rater_id)
        if pair in seen:
            raise ValidationError(f"duplicate annotation by {ann.rater_id!r} on {ann.statement_id!r}")
        seen.add(pair)
        counts.setdefault(ann.statement_id, Counter())[ann.category] += 1
    return counts


def item_observed_agreement(counts: Counter, n: int) -> float:
    return sum(c * (c - 1) for c in counts.values()) / (n * (n - 1))


def free_marginal_kappa(annotations: list[CategoryAnnotation], k: int) -> AgreementReport:
    """Chance-corrected agreement with chance fixed at 1/k.

    The reference rater count n is the most common count across items; items
    with a deviating count are excluded from the statistic and reported.
    """
    if k < 2:
        raise ValidationError(f"need at least 2 categories, got k={k}")
    counts = group_by_item(annotations)
    if not counts:
        raise ValidationError("no annotations given")
    sizes = Counter(sum(c.values()) for c in counts.values())
    # Most common rater count; ties broken toward more raters.
    n = max(sizes, key=lambda size: (sizes[size], size))
    if n < 2:
        raise ValidationError(f"need at least 2 raters per item, got n={n}")

    p_e = 1.0 / k
    per_item: dict[str, float] = {}
    excluded: list[str] = []
    total_po = 0.0
    for item_id, item_counts in sorted(counts.items()):
        if sum(item_counts.values()) != n:
            excluded.append(item_id)
            continue
        p_oi = item_observed_agreement(item_counts, n)
        per_item[item_id] = (p_oi - p_e) / (1.0 - p_e)
        total_po += p_oi
    if not per_item:
        raise ValidationError("no item has the reference rater count")

    p_o = total_po / len(per_item)
    return AgreementReport(
        p_o=p_o,
        p_e=p_e,
        kappa=(p_o - p_e) / (1.0 - p_e),
        per_item=per_item,
        k=k,
        n=n,
        n_items=len(per_item),
        excluded_items=excluded,
    )
