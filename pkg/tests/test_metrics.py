import random

import pytest

from langadhere.errors import MetricError
from langadhere.matcher import CorrectSets
from langadhere.metrics import (
    UNDEFINED,
    build_overlap_matrix,
    build_report,
    cococola_general,
    cococola_simplified,
    cumulative_accuracy,
    delta_accuracy,
    is_defined,
    jaccard,
    known_unknown,
)


# --- independent element-wise oracles ----------------------------------------

def brute_jaccard(a, b):
    elements = set()
    elements.update(a)
    elements.update(b)
    inter = sum(1 for x in elements if x in a and x in b)
    return inter / len(elements) if elements else 0.0


def brute_known_unknown(a, b):
    only_a = sum(1 for x in a if x not in b)
    only_b = sum(1 for x in b if x not in a)
    return only_a, only_b


def brute_cococola_general(c_ii, union_other):
    only_input = only_other = 0
    for x in c_ii | union_other:
        in_a, in_b = x in c_ii, x in union_other
        if in_a and not in_b:
            only_input += 1
        elif in_b and not in_a:
            only_other += 1
    denom = only_input + only_other
    return None if denom == 0 else only_input / denom


def brute_cumulative(c_ii, c_ref, universe):
    return sum(1 for x in universe if x in c_ii or x in c_ref) / len(universe)


def make_sets(c_ii, by_other, universe=None):
    universe = set(universe) if universe is not None else set(c_ii)
    for s in by_other.values():
        universe |= set(s)
    mapping = {"fr": frozenset(c_ii)}
    mapping.update({l: frozenset(s) for l, s in by_other.items()})
    return CorrectSets("fr", frozenset(universe), mapping)


def random_family(rng, max_ids=60):
    n = rng.randrange(0, max_ids)
    universe = {f"q{i}" for i in range(n)}
    def pick():
        if not universe:
            return set()
        p = rng.choice((0.0, 0.1, 0.4, 0.9))
        return {x for x in universe if rng.random() < p}
    return universe, pick


# --- jaccard ------------------------------------------------------------------

def test_jaccard_identity():
    assert jaccard({1, 2, 3}, {1, 2, 3}) == 1.0


def test_jaccard_half():
    assert jaccard({1, 2, 3}, {2, 3, 4}) == 0.5


def test_jaccard_empty_pair_is_zero():
    assert jaccard(set(), set()) == 0.0


def test_jaccard_matches_brute_force(rng):
    for _ in range(1000):
        universe, pick = random_family(rng)
        a, b = pick(), pick()
        assert jaccard(a, b) == brute_jaccard(a, b)


def test_jaccard_bounds_symmetry_monotonicity(rng):
    for _ in range(300):
        _, pick = random_family(rng)
        a, b = pick(), pick()
        v = jaccard(a, b)
        assert 0.0 <= v <= 1.0
        assert v == jaccard(b, a)
        if a:
            assert jaccard(a, a) == 1.0
        # adding a shared element never lowers the overlap
        grown_a, grown_b = a | {"shared"}, b | {"shared"}
        assert jaccard(grown_a, grown_b) >= v


# --- known/unknown -----------------------------------------------------------

def test_known_unknown_equal_sets():
    assert known_unknown({1, 2}, {1, 2}) == (0, 0)


def test_known_unknown_counts():
    assert known_unknown({1, 2}, {2, 3, 4}) == (1, 2)


def test_known_unknown_partition_identity(rng):
    for _ in range(500):
        _, pick = random_family(rng)
        a, b = pick(), pick()
        only_a, only_b = known_unknown(a, b)
        assert (only_a, only_b) == brute_known_unknown(a, b)
        assert only_a + len(a & b) == len(a)
        assert only_b + len(a & b) == len(b)


# --- adherence ratios ---------------------------------------------------------

def test_general_disjoint_counts():
    sets = make_sets({f"i{i}" for i in range(9)}, {"en": {"e1"}})
    assert cococola_general(sets) == pytest.approx(0.9)


def test_general_total_overlap_is_undefined():
    ids = {"a", "b", "c"}
    sets = make_sets(ids, {"en": set(ids)})
    assert cococola_general(sets) is UNDEFINED


def test_general_extremes():
    only_input = make_sets({"a", "b"}, {"en": set()})
    assert cococola_general(only_input) == 1.0
    only_other = make_sets(set(), {"en": {"a"}})
    assert cococola_general(only_other) == 0.0


def test_general_rejects_reference_input():
    sets = CorrectSets("en", frozenset({"a"}), {"en": frozenset({"a"})})
    with pytest.raises(MetricError):
        cococola_general(sets)


def test_general_matches_element_oracle(rng):
    for _ in range(2000):
        _, pick = random_family(rng)
        c_ii = pick()
        others = {"en": pick(), "de": pick()}
        sets = make_sets(c_ii, others)
        got = cococola_general(sets)
        want = brute_cococola_general(c_ii, others["en"] | others["de"])
        if want is None:
            assert got is UNDEFINED
        else:
            assert got == want


def test_simplified_direct_arithmetic():
    sets = make_sets({f"i{i}" for i in range(9)}, {"en": {"e1"}})
    assert cococola_simplified(sets) == pytest.approx(0.9)


def test_simplified_total_reference_bias():
    sets = make_sets(set(), {"en": {f"e{i}" for i in range(7)}})
    assert cococola_simplified(sets) == 0.0


def test_simplified_undefined_when_both_empty():
    sets = make_sets(set(), {"en": set()}, universe={"u1", "u2"})
    assert cococola_simplified(sets) is UNDEFINED


def test_simplified_raises_on_overlap():
    sets = make_sets({"a", "b"}, {"en": {"b", "c"}})
    with pytest.raises(MetricError, match="overlap"):
        cococola_simplified(sets)


def test_general_equals_simplified_under_disjointness(rng):
    # the filtered-subset condition: input and reference sets disjoint and
    # the reference set is the whole non-input union
    for _ in range(2000):
        universe, pick = random_family(rng)
        c_ii = pick()
        c_ref = {x for x in pick() if x not in c_ii}
        sets = make_sets(c_ii, {"en": c_ref}, universe=universe)
        general = cococola_general(sets)
        simplified = cococola_simplified(sets)
        if is_defined(general) or is_defined(simplified):
            assert general == simplified


# --- cumulative accuracy -------------------------------------------------------

def test_cumulative_all_input_correct():
    ids = {f"q{i}" for i in range(4)}
    sets = make_sets(set(ids), {}, universe=ids)
    assert cumulative_accuracy(sets) == 1.0


def test_cumulative_disjoint_counting():
    universe = {f"q{i}" for i in range(10)}
    sets = make_sets(
        {f"q{i}" for i in range(6)}, {"en": {"q6", "q7", "q8"}}, universe=universe
    )
    assert cumulative_accuracy(sets) == pytest.approx(0.9)


def test_cumulative_empty_universe_errors():
    sets = CorrectSets("fr", frozenset(), {})
    with pytest.raises(MetricError):
        cumulative_accuracy(sets)


def test_cumulative_matches_brute_force_and_lower_bound(rng):
    for _ in range(1000):
        universe, pick = random_family(rng)
        if not universe:
            continue
        c_ii = pick()
        c_ref = pick()
        sets = make_sets(c_ii, {"en": c_ref}, universe=universe)
        got = cumulative_accuracy(sets)
        assert got == brute_cumulative(c_ii, c_ref, universe)
        assert got >= max(len(c_ii), len(c_ref)) / len(universe)


# --- delta accuracy ------------------------------------------------------------

def test_delta_accuracy_table_row():
    assert delta_accuracy(13.27, 38.44) == pytest.approx(25.17)


def test_delta_accuracy_zero():
    assert delta_accuracy(33.3, 33.3) == 0.0


def test_delta_accuracy_range_check():
    with pytest.raises(MetricError):
        delta_accuracy(-1.0, 50.0)
    with pytest.raises(MetricError):
        delta_accuracy(10.0, 101.0)


def test_delta_accuracy_full_fixture(accuracy_table_rows):
    for row in accuracy_table_rows:
        got = delta_accuracy(row["plm"], row["sft"])
        assert got == pytest.approx(row["delta"], abs=0.01), row


# --- report and overlap matrix --------------------------------------------------

def test_build_report_counts_and_ratios():
    universe = {f"q{i}" for i in range(10)}
    sets = make_sets(
        {f"q{i}" for i in range(6)}, {"en": {"q6", "q7"}}, universe=universe
    )
    report = build_report(sets, filtered_universe=True)
    assert report.count_correct_input == 6
    assert report.count_correct_reference == 2
    assert report.universe_size == 10
    assert report.ratio_general == pytest.approx(6 / 8)
    assert report.ratio_simplified == pytest.approx(6 / 8)
    assert report.cumulative_accuracy == pytest.approx(0.8)
    payload = report.to_dict()
    assert payload["counts"]["universe"] == 10


def test_build_report_for_reference_language_input():
    ids = frozenset({"a", "b"})
    sets = CorrectSets("en", ids, {"en": frozenset({"a"})})
    report = build_report(sets)
    assert report.ratio_general is UNDEFINED
    assert report.to_dict()["ratio_general"] is None
    assert report.cumulative_accuracy == 0.5


def test_overlap_matrix_diagonal_symmetry():
    by_lang = {
        "en": {"a", "b", "c"},
        "fr": {"b", "c", "d"},
        "de": set(),
    }
    matrix = build_overlap_matrix(by_lang)
    assert matrix.languages == ("en", "fr", "de")
    assert matrix.value("en", "en") == 1.0
    assert matrix.value("en", "fr") == matrix.value("fr", "en") == 0.5
    assert matrix.value("de", "de") == 0.0  # empty set: flagged, not 1
    assert ("de", "de") in matrix.empty_pairs


def test_overlap_matrix_missing_language_errors():
    with pytest.raises(MetricError):
        build_overlap_matrix({"en": {"a"}}, order=("en", "fr"))
