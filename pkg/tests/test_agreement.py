import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eskg.corpus.agreement import CategoryAnnotation, free_marginal_kappa
from eskg.corpus.categories import CATEGORY_COUNT, ESCategory
from eskg.errors import ValidationError

CATS = list(ESCategory)


def annotate(item, raters_to_cats):
    return [
        CategoryAnnotation(item, f"rater-{i}", cat) for i, cat in enumerate(raters_to_cats)
    ]


def test_two_raters_seventy_percent_agreement():
    # 10 items, 2 raters, k=2; agreement on 7 -> P_o 0.7, P_e 0.5, kappa 0.4.
    annotations = []
    for i in range(7):
        annotations += annotate(f"s{i}", [ESCategory.APP, ESCategory.APP])
    for i in range(7, 10):
        annotations += annotate(f"s{i}", [ESCategory.APP, ESCategory.SUP])
    report = free_marginal_kappa(annotations, k=2)
    assert report.p_o == pytest.approx(0.7, abs=1e-9)
    assert report.p_e == pytest.approx(0.5, abs=1e-9)
    assert report.kappa == pytest.approx(0.4, abs=1e-9)


def test_unanimous_items_give_kappa_one():
    annotations = []
    for i in range(5):
        annotations += annotate(f"s{i}", [CATS[i]] * 4)
    report = free_marginal_kappa(annotations, k=CATEGORY_COUNT)
    assert report.p_o == 1.0 and report.kappa == 1.0


def test_single_item_four_one_split():
    # Counts {EMP:4, SUP:1} with 5 raters, k=10: P_o 0.6, kappa 5/9.
    annotations = annotate("s0", [ESCategory.EMP] * 4 + [ESCategory.SUP])
    report = free_marginal_kappa(annotations, k=10)
    assert report.per_item["s0"] == pytest.approx(0.5555555555555556, abs=1e-9)
    assert report.p_o == pytest.approx(0.6, abs=1e-9)


def test_deviating_rater_count_excluded_and_reported():
    annotations = annotate("s0", [ESCategory.EMP] * 5) + annotate("s1", [ESCategory.EMP] * 5)
    annotations += annotate("odd", [ESCategory.EMP] * 3)
    report = free_marginal_kappa(annotations, k=10)
    assert report.n == 5
    assert report.excluded_items == ["odd"]
    assert "odd" not in report.per_item


def test_duplicate_rater_item_pair_rejected():
    annotations = annotate("s0", [ESCategory.EMP] * 2)
    annotations.append(CategoryAnnotation("s0", "rater-0", ESCategory.SUP))
    with pytest.raises(ValidationError, match="duplicate"):
        free_marginal_kappa(annotations, k=10)


@pytest.mark.parametrize("k", [0, 1])
def test_too_few_categories(k):
    with pytest.raises(ValidationError):
        free_marginal_kappa(annotate("s0", [ESCategory.EMP] * 2), k=k)


def test_too_few_raters():
    with pytest.raises(ValidationError):
        free_marginal_kappa(annotate("s0", [ESCategory.EMP]), k=10)


@settings(max_examples=200, deadline=None)
@given(
    data=st.lists(
        st.lists(st.integers(min_value=0, max_value=9), min_size=3, max_size=3),
        min_size=1,
        max_size=30,
    )
)
def test_kappa_bounds_property(data):
    # 3 raters per item, k=10: kappa must stay in [-1/(k-1), 1], hitting 1
    # exactly when every item is unanimous.
    annotations = []
    for i, cats in enumerate(data):
        annotations += annotate(f"s{i}", [CATS[c] for c in cats])
    report = free_marginal_kappa(annotations, k=CATEGORY_COUNT)
    lower = -1.0 / (CATEGORY_COUNT - 1)
    assert lower - 1e-12 <= report.kappa <= 1.0 + 1e-12
    unanimous = all(len(set(cats)) == 1 for cats in data)
    assert (report.kappa == pytest.approx(1.0)) == unanimous


def test_chance_floor_two_uniform_raters():
    # 10k items randomly labeled by 2 raters over k=10: kappa ~ 0.
    rng = random.Random(20240301)
    annotations = []
    for i in range(10_000):
        annotations += annotate(f"s{i}", [rng.choice(CATS), rng.choice(CATS)])
    report = free_marginal_kappa(annotations, k=CATEGORY_COUNT)
    assert abs(report.kappa) < 0.05


def test_report_roundtrip():
    annotations = annotate("s0", [ESCategory.EMP] * 4 + [ESCategory.SUP])
    report = free_marginal_kappa(annotations, k=10)
    from eskg.corpus.agreement import AgreementReport

    assert AgreementReport.from_dict(report.to_dict()).to_dict() == report.to_dict()
