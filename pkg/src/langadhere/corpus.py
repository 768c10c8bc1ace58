"""Parallel closed-book QA corpus: ingestion, validation, and filtering.

A corpus is a set of question ids, each carrying one QA pair per declared
language, partitioned into train/validation/test splits. Metric code only
ever sees fully parallel rows; partial rows are an ingestion error (strict
mode) or are dropped whole and counted (quarantine mode).
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import IngestError
from .textnorm import normalize

SPLITS = ("train", "validation", "test")

# Rendering order used by reports and overlap matrices; other codes sort after.
CANONICAL_ORDER = ("en", "fr", "de", "hi", "it", "pt", "es")

_LANG_RE = re.compile(r"^[a-z]{2}$")

_REQUIRED_KEYS = ("question_id", "language", "split", "question", "answer")


def is_language_code(code: str) -> bool:
    """True for exactly two ASCII lowercase letters."""
    return isinstance(code, str) and bool(_LANG_RE.match(code))


def canonical_language_order(codes: Iterable[str]) -> tuple[str, ...]:
    """Order codes as the reports do: known codes first, the rest sorted."""
    codes = set(codes)
    known = [c for c in CANONICAL_ORDER if c in codes]
    rest = sorted(codes - set(known))
    return tuple(known + rest)


@dataclass(frozen=True)
class QAItem:
    question_id: str
    language: str
    question: str
    answer: str
    split: str


@dataclass(frozen=True)
class IngestOptions:
    """Ingestion behavior.

    languages: declared language set (ordered); None infers it from the file.
    policy: "strict" errors on partial rows, "quarantine" drops the id across
    all languages and counts it.
    """

    languages: tuple[str, ...] | None = None
    policy: str = "strict"

    def __post_init__(self):
        if self.policy not in ("strict", "quarantine"):
            raise IngestError(f"unknown ingestion policy {self.policy!r}")
        if self.languages is not None:
            for code in self.languages:
                if not is_language_code(code):
                    raise IngestError(f"invalid language code {code!r}")


@dataclass(frozen=True)
class ParallelCorpus:
    """Immutable, fully parallel view of the corpus."""

    languages: tuple[str, ...]
    items: Mapping[str, Mapping[str, QAItem]]  # question_id -> language -> item
    split_of: Mapping[str, str]  # question_id -> split
    quarantined: tuple[str, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def ids_for_split(self, split: str) -> frozenset[str]:
        return frozenset(q for q, s in self.split_of.items() if s == split)

    @property
    def train_ids(self) -> frozenset[str]:
        return self.ids_for_split("train")

    @property
    def eval_ids(self) -> frozenset[str]:
        """Evaluation ids: everything outside the train split."""
        return frozenset(q for q, s in self.split_of.items() if s != "train")

    def item(self, question_id: str, language: str) -> QAItem:
        return self.items[question_id][language]

    def gold_answer(self, question_id: str, language: str) -> str:
        return self.items[question_id][language].answer


@dataclass(frozen=True)
class FilteredSubset:
    """Evaluation ids whose gold answers differ between two languages.

    On this universe the output language of a correct answer is decidable
    from the matched gold string alone.
    """

    input_language: str
    reference_language: str
    question_ids: frozenset[str]

    def __len__(self) -> int:
        return len(self.question_ids)


_DEVANAGARI = re.compile(r"[ऀ-ॿ]")
_LATIN = re.compile(r"[a-zA-Z]")


def _script_warning(item: QAItem) -> str | None:
    # Cheap sanity check for untranslated rows: Devanagari text in a
    # Latin-script row or vice versa.
    has_dev = bool(_DEVANAGARI.search(item.answer))
    if item.language == "hi":
        if not has_dev and _LATIN.search(item.answer):
            return (
                f"answer for {item.question_id!r} in 'hi' contains no "
                f"Devanagari: {item.answer!r}"
            )
    elif has_dev:
        return (
            f"answer for {item.question_id!r} in {item.language!r} contains "
            f"Devanagari: {item.answer!r}"
        )
    return None


def _parse_line(raw: str, line_no: int) -> QAItem:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise IngestError(f"malformed JSON: {exc.msg}", line=line_no) from exc
    if not isinstance(obj, dict):
        raise IngestError("line is not a JSON object", line=line_no)
    for key in _REQUIRED_KEYS:
        if key not in obj:
            raise IngestError(f"missing key {key!r}", line=line_no)
        if not isinstance(obj[key], str):
            raise IngestError(f"key {key!r} is not a string", line=line_no)
    if obj["split"] not in SPLITS:
        raise IngestError(
            f"split must be one of {SPLITS}, got {obj['split']!r}", line=line_no
        )
    if not is_language_code(obj["language"]):
        raise IngestError(
            f"invalid language code {obj['language']!r}", line=line_no
        )
    return QAItem(
        question_id=obj["question_id"],
        language=obj["language"],
        question=unicodedata.normalize("NFC", obj["question"]),
        answer=unicodedata.normalize("NFC", obj["answer"]),
        split=obj["split"],
    )


def ingest_corpus(path: str | Path, options: IngestOptions | None = None) -> ParallelCorpus:
    """Read a UTF-8 JSONL corpus file and return a validated ParallelCorpus.

    Row order in the file is irrelevant: items are keyed by question id, so
    the same bytes always produce the same corpus.
    """
    options = options or IngestOptions()
    path = Path(path)

    declared = set(options.languages) if options.languages is not None else None
    by_id: dict[str, dict[str, QAItem]] = {}
    split_of: dict[str, str] = {}
    seen: set[tuple[str, str, str]] = set()
    warnings: list[str] = []
    invalid_ids: set[str] = set()  # ids with an empty-after-normalization field

    with path.open("r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            item = _parse_line(raw, line_no)
            if declared is not None and item.language not in declared:
                raise IngestError(
                    f"undeclared language code {item.language!r}",
                    line=line_no,
                    file=str(path),
                )
            key = (item.question_id, item.language, item.split)
            if key in seen:
                raise IngestError(
                    f"duplicate (question_id, language, split) {key!r}",
                    line=line_no,
                    file=str(path),
                )
            seen.add(key)
            prior_split = split_of.get(item.question_id)
            if prior_split is not None and prior_split != item.split:
                raise IngestError(
                    f"question_id {item.question_id!r} appears in splits "
                    f"{prior_split!r} and {item.split!r}",
                    line=line_no,
                    file=str(path),
                )
            split_of[item.question_id] = item.split
            if not normalize(item.question) or not normalize(item.answer):
                if options.policy == "strict":
                    raise IngestError(
                        "question or answer empty after normalization",
                        line=line_no,
                        question_id=item.question_id,
                        file=str(path),
                    )
                invalid_ids.add(item.question_id)
            warn = _script_warning(item)
            if warn is not None:
                warnings.append(warn)
            by_id.setdefault(item.question_id, {})[item.language] = item

    languages = (
        tuple(options.languages)
        if options.languages is not None
        else canonical_language_order(
            {item.language for row in by_id.values() for item in row.values()}
        )
    )
    want = set(languages)

    quarantined: list[str] = []
    for qid in sorted(by_id):
        have = set(by_id[qid])
        if have != want or qid in invalid_ids:
            if options.policy == "strict":
                missing = sorted(want - have)
                raise IngestError(
                    f"question_id {qid!r} is not fully parallel"
                    + (f", missing languages {missing}" if missing else ""),
                    question_id=qid,
                    file=str(path),
                )
            quarantined.append(qid)
            del by_id[qid]
            del split_of[qid]

    return ParallelCorpus(
        languages=languages,
        items={q: dict(row) for q, row in by_id.items()},
        split_of=dict(split_of),
        quarantined=tuple(quarantined),
        warnings=tuple(warnings),
    )


def build_filtered_subset(
    corpus: ParallelCorpus,
    input_language: str,
    reference_language: str = "en",
) -> FilteredSubset:
    """Evaluation ids where the input-language gold differs from the reference.

    The comparison uses the matcher's normalization, so ids in the subset are
    exactly those where a correct answer identifies its output language.
    """
    if input_language == reference_language:
        raise IngestError(
            "filtered subset is undefined when input and reference language "
            f"coincide ({input_language!r})"
        )
    for code in (input_language, reference_language):
        if code not in corpus.languages:
            raise IngestError(f"language {code!r} not in corpus")
    eval_ids = corpus.eval_ids
    if not eval_ids:
        raise IngestError("corpus has an empty evaluation split")
    kept = frozenset(
        qid
        for qid in eval_ids
        if normalize(corpus.gold_answer(qid, input_language))
        != normalize(corpus.gold_answer(qid, reference_language))
    )
    return FilteredSubset(
        input_language=input_language,
        reference_language=reference_language,
        question_ids=kept,
    )
