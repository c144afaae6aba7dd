import math

import pytest
from hypothesis import assume, given, strategies as st

from oracles import hazen_oracle
from rankcompare.errors import DomainError, EmptySeriesError, KindMismatchError
from rankcompare.series import IndicatorSeries
from rankcompare.stats import skewness
from rankcompare.transforms import (ClassThresholds, cap_for_top, class_shares,
                                    distance_to_median_classes, normalize_by_max, percentile_rank,
                                    quantify_classes, teaching_score)

positive = st.floats(0.01, 1e6, allow_nan=False, allow_infinity=False)
pow2 = st.integers(-20, 20).map(lambda e: 2.0 ** e)


def num(values, **kw):
    return IndicatorSeries("S", "x", {f"i{k:03d}": v for k, v in enumerate(values)}, **kw)


def vals(series):
    return list(series.values.values())


def cls(values, name="x"):
    return IndicatorSeries("U", name, {f"i{k}": v for k, v in enumerate(values)}, kind="class_A_to_E")


# -- normalize_by_max ---------------------------------------------------------

def test_normalize_examples():
    assert vals(normalize_by_max(num([2.0, 4.0]))) == [50.0, 100.0]
    assert vals(normalize_by_max(num([50.0, 100.0, 25.0]))) == [50.0, 100.0, 25.0]


def test_normalize_keeps_missing():
    assert vals(normalize_by_max(num([2.0, None, 4.0]))) == [50.0, None, 100.0]


def test_normalize_errors():
    with pytest.raises(EmptySeriesError):
        normalize_by_max(num([None, None]))
    with pytest.raises(DomainError):
        normalize_by_max(num([-1.0, 0.0]))
    with pytest.raises(KindMismatchError):
        normalize_by_max(cls(["A"]))


def test_cap_pins_ten_at_100():
    # 14 institutions; the cap is set at the 10th highest value
    raw = [250.0, 240.0, 199.0, 180.0, 171.0, 160.0, 155.0, 150.0, 149.0, 140.0, 139.9, 90.0, 50.0, 7.0]
    s = num(raw)
    cap = cap_for_top(s, 10)
    assert cap == 140.0
    out = normalize_by_max(s, cap)
    assert sum(1 for v in vals(out) if v == 100.0) == 10
    assert out.values["i010"] == pytest.approx(100 * 139.9 / 140.0)
    assert max(vals(out)) == 100.0


@given(st.lists(positive, min_size=1, max_size=30))
def test_normalize_max_is_100(values):
    out = vals(normalize_by_max(num(values)))
    assert max(out) == 100.0
    assert all(0 < v <= 100 for v in out)


@given(st.lists(positive, min_size=1, max_size=30), pow2)
def test_normalize_scale_invariant_exact(values, k):
    assert vals(normalize_by_max(num([v * k for v in values]))) == vals(normalize_by_max(num(values)))


@given(st.lists(positive, min_size=1, max_size=30), st.floats(1e-3, 1e3))
def test_normalize_scale_invariant(values, k):
    a = vals(normalize_by_max(num(values)))
    b = vals(normalize_by_max(num([v * k for v in values])))
    assert b == pytest.approx(a, rel=1e-12, abs=1e-12)


# -- percentile_rank ---------------------------------------------------------

def test_percentile_examples():
    assert vals(percentile_rank(num([10.0, 20.0, 30.0, 40.0]))) == [12.5, 37.5, 62.5, 87.5]
    assert vals(percentile_rank(num([5.0, 5.0, 5.0]))) == [50.0, 50.0, 50.0]


def test_percentile_lower_is_better_flips():
    out = percentile_rank(num([1, 2, 3, 4], kind="rank", higher_is_better=False))
    assert vals(out) == [87.5, 62.5, 37.5, 12.5]


def test_percentile_variants():
    s = num([10.0, 20.0, 30.0, 40.0])
    assert vals(percentile_rank(s, "rank_over_n")) == [25.0, 50.0, 75.0, 100.0]
    assert vals(percentile_rank(s, "rank_minus_one")) == pytest.approx([0.0, 100 / 3, 200 / 3, 100.0])


def test_percentile_empty():
    with pytest.raises(EmptySeriesError):
        percentile_rank(num([None]))


@given(st.lists(st.one_of(st.none(), st.integers(-20, 20)), min_size=1, max_size=25))
def test_percentile_matches_oracle_and_keeps_missing(values):
    assume(any(v is not None for v in values))
    out = vals(percentile_rank(num(values)))
    present = [v for v in values if v is not None]
    expected = iter(hazen_oracle(present))
    for v, o in zip(values, out):
        if v is None:
            assert o is None
        else:
            assert o == pytest.approx(next(expected), abs=1e-12)
            assert 0 < o < 100


@given(st.lists(st.floats(-1e9, 1e9, allow_nan=False), min_size=3, max_size=60, unique=True))
def test_percentile_law_distinct(values):
    out = vals(percentile_rank(num(values)))
    n = len(values)
    assert sorted(out) == pytest.approx([100 * (i - 0.5) / n for i in range(1, n + 1)], abs=1e-12)
    assert abs(skewness(out)) <= 1e-9
    # applying it again is a fixed point (the diagonal property)
    again = vals(percentile_rank(num(out)))
    assert again == pytest.approx(out, abs=1e-12)


@given(st.lists(st.integers(-50, 50), min_size=2, max_size=30))
def test_percentile_order_preserving(values):
    out = vals(percentile_rank(num(values)))
    for i in range(len(values)):
        for j in range(len(values)):
            if values[i] < values[j]:
                assert out[i] < out[j]
            elif values[i] == values[j]:
                assert out[i] == out[j]


# -- distance to median classes ------------------------------------------------

@pytest.mark.parametrize("ratio,label", [
    (3.0, "A"), (2.0, "A"), (1.99, "B"), (1.25, "B"), (1.0, "C"), (0.75, "C"), (0.5, "D"),
    (0.25, "D"), (0.2, "E"),
])
def test_default_threshold_table(ratio, label):
    assert ClassThresholds().classify(ratio) == label


def test_value_at_median_is_c():
    out = distance_to_median_classes(num([1.0, 2.0, 3.0]))
    assert out.values["i001"] == "C"


def test_classes_fixture_and_missing():
    # median 10: ratios 3.0, 1.5, 1.0, 0.5, 0.1
    out = distance_to_median_classes(num([30.0, 15.0, 10.0, 5.0, 1.0, None]))
    assert vals(out) == ["A", "B", "C", "D", "E", None]
    shares = class_shares(out)
    assert shares["A"] == pytest.approx(1 / 6) and shares["missing"] == pytest.approx(1 / 6)


def test_class_shares_can_be_uneven():
    # most values bunched just above the median give no A and many B/C
    out = distance_to_median_classes(num([10.0] * 5 + [13.0] * 4 + [1.0]))
    s = class_shares(out)
    assert s["A"] == 0.0 and s["C"] == 0.5 and s["B"] == 0.4 and s["E"] == 0.1


def test_classes_need_positive_median():
    with pytest.raises(DomainError):
        distance_to_median_classes(num([-1.0, 0.0, 0.0]))


def test_thresholds_validation():
    with pytest.raises(ValueError):
        ClassThresholds(1.0, 1.0, 0.5, 0.1)
    with pytest.raises(ValueError):
        ClassThresholds(2.0, 1.0, 0.5, 0.0)


@given(st.lists(positive, min_size=1, max_size=30), pow2)
def test_classes_scale_invariant_exact(values, k):
    a = vals(distance_to_median_classes(num(values)))
    b = vals(distance_to_median_classes(num([v * k for v in values])))
    assert a == b


@given(st.lists(st.integers(1, 1000), min_size=1, max_size=30), st.integers(1, 50))
def test_classes_scale_invariant_integer_scale(values, k):
    a = vals(distance_to_median_classes(num([float(v) for v in values])))
    b = vals(distance_to_median_classes(num([float(v * k) for v in values])))
    assert a == b


@given(st.lists(positive, min_size=1, max_size=40))
def test_classes_monotone(values):
    q = vals(quantify_classes(distance_to_median_classes(num(values))))
    pairs = sorted(zip(values, q))
    assert all(p[1] <= r[1] for p, r in zip(pairs, pairs[1:]))


def test_classes_lower_is_better_invert():
    out = distance_to_median_classes(num([1.0, 2.0, 4.0], kind="rank", higher_is_better=False))
    assert vals(out) == ["A", "C", "D"]


# -- quantify / teaching score -----------------------------------------------

def test_quantify():
    assert vals(quantify_classes(cls(["A", "B", "C", "D", "E", None]))) == [5.0, 4.0, 3.0, 2.0, 1.0, None]
    with pytest.raises(KindMismatchError):
        quantify_classes(num([1.0]))


def test_teaching_score_examples():
    f1 = IndicatorSeries("U", "f1", {"a": "A", "b": "B", "c": "E"}, kind="class_A_to_E")
    f2 = IndicatorSeries("U", "f2", {"a": "B", "b": None, "c": "E"}, kind="class_A_to_E")
    f3 = IndicatorSeries("U", "f3", {"c": "E"}, kind="class_A_to_E")
    out = teaching_score([f1, f2, f3])
    assert out.values["a"] == 4.5
    assert out.values["b"] is None
    assert out.values["c"] == 1.0
    assert out.kind == "numeric" and out.name == "teaching_score"


@given(st.lists(st.lists(st.sampled_from(["A", "B", "C", "D", "E", None]), min_size=4, max_size=4),
                min_size=1, max_size=4), st.integers(1, 4))
def test_teaching_score_mean_rule(fields, min_fields):
    series = [cls(f, name=f"f{i}") for i, f in enumerate(fields)]
    out = teaching_score(series, min_fields)
    points = {"A": 5, "B": 4, "C": 3, "D": 2, "E": 1}
    for k in range(4):
        got = [points[f[k]] for f in fields if f[k] is not None]
        expect = sum(got) / len(got) if len(got) >= min_fields else None
        v = out.values[f"i{k}"]
        assert v == expect if expect is None else math.isclose(v, expect)
