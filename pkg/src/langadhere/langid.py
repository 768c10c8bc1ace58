"""Character n-gram language classifier over a restricted candidate set.

Rank-based out-of-place scoring (Cavnar & Trenkle style): each language gets
a profile of its top-400 character 1..4-grams ranked by frequency; a text is
scored against a candidate by summing rank displacements, with a fixed
penalty for n-grams absent from the candidate profile. Used for diagnostics
only; gold-answer matching is the primary output-language decision.
"""

from __future__ import annotations

import json
import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import LangIdError

PROFILE_SIZE = 400
MISSING_PENALTY = PROFILE_SIZE + 1
DEFAULT_MARGIN_THRESHOLD = 5.0
MIN_TRAIN_QUESTIONS = 50

_LETTER_RUNS = re.compile(r"[^\W\d_]+", re.UNICODE)
_DEVANAGARI = re.compile(r"[ऀ-ॿ]")


@dataclass(frozen=True)
class LanguageProfile:
    language: str
    ngram_ranks: Mapping[str, int]  # n-gram -> rank, 1 = most frequent

    def __post_init__(self):
        ranks = sorted(self.ngram_ranks.values())
        if ranks != list(range(1, len(ranks) + 1)) or len(ranks) > PROFILE_SIZE:
            raise LangIdError(
                f"profile for {self.language!r} has invalid ranks"
            )


@dataclass(frozen=True)
class LangIdResult:
    predicted: str  # a language code or "other"
    margin: float  # second_best - best distance, >= 0
    scores: Mapping[str, float] = field(default_factory=dict)


def _letter_tokens(text: str) -> list[str]:
    return _LETTER_RUNS.findall(unicodedata.normalize("NFKC", text).casefold())


def _ngram_counts(text: str) -> Counter:
    counts: Counter = Counter()
    for tok in _letter_tokens(text):
        padded = f" {tok} "
        for n in range(1, 5):
            for i in range(len(padded) - n + 1):
                gram = padded[i : i + n]
                if not gram.isspace():
                    counts[gram] += 1
    return counts


def _rank(counts: Counter, limit: int = PROFILE_SIZE) -> dict[str, int]:
    # Deterministic: frequency descending, then lexicographic.
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:limit]
    return {gram: i + 1 for i, (gram, _) in enumerate(ordered)}


def build_profiles(corpus) -> dict[str, LanguageProfile]:
    """One profile per corpus language, from its training-split text.

    Profiles are self-contained (no external corpora): question and answer
    text of the training split only. Answers are included because answers
    are what classify() is mostly pointed at.
    """
    train_ids = corpus.train_ids
    profiles: dict[str, LanguageProfile] = {}
    for lang in corpus.languages:
        items = [corpus.item(qid, lang) for qid in sorted(train_ids)]
        if len(items) < MIN_TRAIN_QUESTIONS:
            raise LangIdError(
                f"language {lang!r} has only {len(items)} training "
                f"questions, need at least {MIN_TRAIN_QUESTIONS}"
            )
        counts: Counter = Counter()
        for item in items:
            counts.update(_ngram_counts(item.question))
            counts.update(_ngram_counts(item.answer))
        if not counts:
            raise LangIdError(f"no usable text for language {lang!r}")
        profiles[lang] = LanguageProfile(lang, _rank(counts))
    return profiles


def _devanagari_fraction(text: str) -> float:
    letters = [ch for tok in _letter_tokens(text) for ch in tok]
    if not letters:
        return 0.0
    return sum(1 for ch in letters if _DEVANAGARI.match(ch)) / len(letters)


def out_of_place_distance(
    text_ranks: Mapping[str, int], profile: LanguageProfile
) -> float:
    dist = 0.0
    for gram, rank in text_ranks.items():
        prof_rank = profile.ngram_ranks.get(gram)
        dist += MISSING_PENALTY if prof_rank is None else abs(rank - prof_rank)
    return dist


def classify(
    text: str,
    candidates: Iterable[str],
    profiles: Mapping[str, LanguageProfile],
    threshold: float = DEFAULT_MARGIN_THRESHOLD,
) -> LangIdResult:
    """Classify text among candidate languages, or "other" when unsure.

    "Unsure" means the gap between the best and second-best candidate is
    below the threshold; a zero gap (tie) is always "other". Texts that are
    mostly Devanagari short-circuit to "hi" when it is a candidate.
    """
    candidates = sorted(set(candidates))
    if not candidates:
        raise LangIdError("no candidate languages given")
    for cand in candidates:
        if cand not in profiles:
            raise LangIdError(f"candidate {cand!r} has no profile")

    tokens = _letter_tokens(text)
    if not tokens:
        raise LangIdError("text is empty after normalization")

    if "hi" in candidates and _devanagari_fraction(text) > 0.5:
        return LangIdResult(predicted="hi", margin=math.inf, scores={})

    text_ranks = _rank(_ngram_counts(text))
    scores = {
        cand: out_of_place_distance(text_ranks, profiles[cand])
        for cand in candidates
    }
    ordered = sorted(scores.items(), key=lambda kv: (kv[1], kv[0]))
    best_lang, best = ordered[0]
    margin = (ordered[1][1] - best) if len(ordered) > 1 else math.inf
    if margin <= 0 or margin < threshold:
        predicted = "other"
    else:
        predicted = best_lang
    return LangIdResult(predicted=predicted, margin=margin, scores=scores)


def save_profiles(profiles: Mapping[str, LanguageProfile], path: str | Path) -> None:
    """Serialize profiles to JSON (rank encoded by list position)."""
    payload = {
        lang: [
            gram
            for gram, _ in sorted(p.ngram_ranks.items(), key=lambda kv: kv[1])
        ]
        for lang, p in sorted(profiles.items())
    }
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def load_profiles(path: str | Path) -> dict[str, LanguageProfile]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return {
        lang: LanguageProfile(
            lang, {gram: i + 1 for i, gram in enumerate(grams)}
        )
        for lang, grams in payload.items()
    }
