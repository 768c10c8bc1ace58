"""Set-algebra metrics over correct-answer id sets.

All values are fractions in [0, 1]; reports render percents. Degenerate 0/0
cases return the UNDEFINED sentinel rather than a silent 0 or 1, so empty
subsets can never corrupt an aggregate unnoticed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Iterable, Mapping

from .corpus import canonical_language_order
from .errors import MetricError
from .matcher import CorrectSets


class _Undefined:
    """Singleton marking a metric whose denominator was empty."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "undefined"

    def __bool__(self) -> bool:
        return False


UNDEFINED = _Undefined()


def is_defined(value) -> bool:
    return value is not UNDEFINED


def jaccard(set_a: AbstractSet, set_b: AbstractSet) -> float:
    """Intersection over union; 0.0 when both sets are empty."""
    union = len(set_a | set_b)
    if union == 0:
        return 0.0
    return len(set_a & set_b) / union


def known_unknown(set_a: AbstractSet, set_b: AbstractSet) -> tuple[int, int]:
    """(known in A but not B, known in B but not A)."""
    return len(set_a - set_b), len(set_b - set_a)


def cococola_general(sets: CorrectSets, reference_language: str = "en"):
    """General-form adherence ratio: |C_ii - U| / |C_ii symdiff U|.

    U is the union of correct sets over every output language except the
    input's. Returns UNDEFINED when C_ii and U coincide (empty symmetric
    difference).
    """
    if sets.input_language == reference_language:
        raise MetricError(
            "adherence ratio is undefined for the reference language "
            f"{reference_language!r}"
        )
    c_ii = sets.correct_input
    union = sets.union_other()
    denom = len(c_ii ^ union)
    if denom == 0:
        return UNDEFINED
    return len(c_ii - union) / denom


def cococola_simplified(sets: CorrectSets, reference_language: str = "en"):
    """Filtered-subset adherence ratio: |C_ii| / (|C_ii| + |C_i,ref|).

    Valid only on a filtered-subset universe, where the two sets are
    provably disjoint; an observed overlap means the filter or the
    normalization is broken and is raised, never papered over.
    """
    if sets.input_language == reference_language:
        raise MetricError(
            "adherence ratio is undefined for the reference language "
            f"{reference_language!r}"
        )
    c_ii = sets.correct_input
    c_ref = sets.correct(reference_language)
    overlap = c_ii & c_ref
    if overlap:
        raise MetricError(
            "input-language and reference-language correct sets overlap on "
            f"{len(overlap)} ids (filter/normalization mismatch), e.g. "
            f"{sorted(overlap)[:3]}"
        )
    total = len(c_ii) + len(c_ref)
    if total == 0:
        return UNDEFINED
    return len(c_ii) / total


def cumulative_accuracy(sets: CorrectSets, reference_language: str = "en") -> float:
    """Fraction of the universe answered correctly in the input language or
    the reference language."""
    if not sets.universe:
        raise MetricError("cumulative accuracy over an empty universe")
    hit = sets.correct_input | sets.correct(reference_language)
    return len(hit) / len(sets.universe)


def delta_accuracy(plm: float, sft: float) -> float:
    """Accuracy gain of the fine-tuned model, on the percent scale."""
    for name, value in (("plm", plm), ("sft", sft)):
        if not 0.0 <= value <= 100.0:
            raise MetricError(f"{name} accuracy {value} outside [0, 100]")
    return sft - plm


@dataclass(frozen=True)
class CoCoColaReport:
    """All adherence numbers for one (model, input language) evaluation."""

    input_language: str
    reference_language: str
    ratio_general: object  # float or UNDEFINED
    ratio_simplified: object  # float or UNDEFINED; only on filtered universes
    cumulative_accuracy: float
    count_correct_input: int
    count_correct_reference: int
    count_union_other: int
    universe_size: int
    filtered_universe: bool = False

    def to_dict(self) -> dict:
        def enc(v):
            return None if not is_defined(v) else v

        return {
            "input_language": self.input_language,
            "reference_language": self.reference_language,
            "ratio_general": enc(self.ratio_general),
            "ratio_simplified": enc(self.ratio_simplified),
            "cumulative_accuracy": self.cumulative_accuracy,
            "counts": {
                "correct_input": self.count_correct_input,
                "correct_reference": self.count_correct_reference,
                "union_other": self.count_union_other,
                "universe": self.universe_size,
            },
            "filtered_universe": self.filtered_universe,
        }


def build_report(
    sets: CorrectSets,
    reference_language: str = "en",
    filtered_universe: bool = False,
) -> CoCoColaReport:
    """Compute every adherence metric for one CorrectSets family.

    The simplified ratio presupposes the filtered-subset disjointness
    invariant, so it is only computed when the universe is a filtered
    subset; elsewhere it is reported UNDEFINED.
    """
    is_reference = sets.input_language == reference_language
    general = (
        UNDEFINED if is_reference else cococola_general(sets, reference_language)
    )
    simplified = (
        cococola_simplified(sets, reference_language)
        if filtered_universe and not is_reference
        else UNDEFINED
    )
    return CoCoColaReport(
        input_language=sets.input_language,
        reference_language=reference_language,
        ratio_general=general,
        ratio_simplified=simplified,
        cumulative_accuracy=cumulative_accuracy(sets, reference_language),
        count_correct_input=len(sets.correct_input),
        count_correct_reference=len(sets.correct(reference_language)),
        count_union_other=len(sets.union_other()),
        universe_size=len(sets.universe),
        filtered_universe=filtered_universe,
    )


@dataclass(frozen=True)
class OverlapMatrix:
    """Pairwise Jaccard overlap of per-language correct sets."""

    languages: tuple[str, ...]
    iou: tuple[tuple[float, ...], ...]
    empty_pairs: frozenset[tuple[str, str]]  # both sets empty, value forced 0

    def value(self, lang_a: str, lang_b: str) -> float:
        ia = self.languages.index(lang_a)
        ib = self.languages.index(lang_b)
        return self.iou[ia][ib]


def build_overlap_matrix(
    correct_by_language: Mapping[str, AbstractSet],
    order: Iterable[str] | None = None,
) -> OverlapMatrix:
    """Symmetric Jaccard matrix in report language order."""
    languages = (
        tuple(order)
        if order is not None
        else canonical_language_order(correct_by_language)
    )
    for lang in languages:
        if lang not in correct_by_language:
            raise MetricError(f"no correct set for language {lang!r}")
    rows = []
    empty: set[tuple[str, str]] = set()
    for a in languages:
        row = []
        for b in languages:
            sa, sb = correct_by_language[a], correct_by_language[b]
            row.append(jaccard(sa, sb))
            if not sa and not sb:
                empty.add((a, b))
        rows.append(tuple(row))
    return OverlapMatrix(
        languages=languages, iou=tuple(rows), empty_pairs=frozenset(empty)
    )
