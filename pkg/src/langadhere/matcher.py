"""Decide correctness of generated answers and collect per-language id sets.

An output is matched by exact string equality after normalization, against
the gold answers of every corpus language in priority order: the input
language first, then the reference language (English by default), then the
remaining languages in corpus order. Priority resolves the shared-named-
entity case where one string is a gold answer in several languages.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import ParallelCorpus
from .errors import MatchError
from .langid import LangIdResult, LanguageProfile, classify
from .textnorm import DEFAULT_ARTICLES, normalize

__all__ = [
    "normalize",
    "GenerationRecord",
    "Verdict",
    "CorrectSets",
    "MatcherConfig",
    "judge",
    "collect_sets",
    "read_generation_log",
    "write_verdicts",
]

# Labels a verdict can carry.
CORRECT_INPUT_LANG = "correct_input_lang"
CORRECT_ENGLISH = "correct_english"
CORRECT_OTHER = "correct_other"
INCORRECT = "incorrect"

_SENTENCE_TERMINATORS = ".!?।。！？"  # . ! ? । 。 ！ ？


@dataclass(frozen=True)
class GenerationRecord:
    question_id: str
    input_language: str
    output: str
    model_tag: str


@dataclass(frozen=True)
class MatcherConfig:
    articles: tuple[str, ...] = DEFAULT_ARTICLES
    reference_language: str = "en"
    sentence_terminators: str = _SENTENCE_TERMINATORS


@dataclass(frozen=True)
class Verdict:
    question_id: str
    input_language: str
    model_tag: str
    label: str  # one of the four labels above
    matched_language: str | None = None  # language of the matched gold answer
    matched_answer: str | None = None  # the raw gold string that matched
    output: str = ""  # raw model output, kept for audit
    langid: LangIdResult | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        d = {
            "question_id": self.question_id,
            "input_language": self.input_language,
            "model_tag": self.model_tag,
            "label": self.label,
            "matched_language": self.matched_language,
            "matched_answer": self.matched_answer,
            "output": self.output,
        }
        if self.langid is not None:
            d["langid"] = {
                "predicted": self.langid.predicted,
                "margin": self.langid.margin,
            }
        return d


@dataclass(frozen=True)
class CorrectSets:
    """The family of correct-output id sets for one (model, input language).

    by_output_language[L] holds the ids answered correctly in language L for
    inputs in `input_language`, over `universe`.
    """

    input_language: str
    universe: frozenset[str]
    by_output_language: Mapping[str, frozenset[str]]

    def __post_init__(self):
        for lang, ids in self.by_output_language.items():
            stray = ids - self.universe
            if stray:
                raise MatchError(
                    f"correct set for {lang!r} contains ids outside the "
                    f"universe: {sorted(stray)[:3]}..."
                )

    def correct(self, language: str) -> frozenset[str]:
        return self.by_output_language.get(language, frozenset())

    @property
    def correct_input(self) -> frozenset[str]:
        return self.correct(self.input_language)

    def union_other(self) -> frozenset[str]:
        """Union of correct sets over every output language but the input's."""
        out: frozenset[str] = frozenset()
        for lang, ids in self.by_output_language.items():
            if lang != self.input_language:
                out |= ids
        return out


def extract_answer(output: str, config: MatcherConfig | None = None) -> str:
    """First line of the output, cut at the first sentence terminator."""
    config = config or MatcherConfig()
    lines = output.splitlines()
    first = lines[0] if lines else ""
    cut = len(first)
    for ch in config.sentence_terminators:
        idx = first.find(ch)
        if idx != -1:
            cut = min(cut, idx)
    return first[:cut]


def _priority(corpus: ParallelCorpus, input_language: str, reference: str) -> list[str]:
    order = [input_language]
    if reference != input_language and reference in corpus.languages:
        order.append(reference)
    order.extend(l for l in corpus.languages if l not in order)
    return order


def judge(
    record: GenerationRecord,
    corpus: ParallelCorpus,
    profiles: Mapping[str, LanguageProfile] | None = None,
    config: MatcherConfig | None = None,
) -> Verdict:
    """Judge one generation record against the corpus gold answers.

    Pure function of its arguments; safe to call on batches in parallel.
    """
    config = config or MatcherConfig()
    qid = record.question_id
    if qid not in corpus.split_of:
        raise MatchError(f"unknown question_id {qid!r}", question_id=qid)
    if qid not in corpus.eval_ids:
        raise MatchError(
            f"question_id {qid!r} is not in the evaluation split",
            question_id=qid,
        )
    if record.input_language not in corpus.languages:
        raise MatchError(
            f"input language {record.input_language!r} not in corpus",
            question_id=qid,
        )

    got = normalize(extract_answer(record.output, config), config.articles)
    matched_language = None
    matched_answer = None
    if got:
        for lang in _priority(corpus, record.input_language, config.reference_language):
            gold = corpus.gold_answer(qid, lang)
            if normalize(gold, config.articles) == got:
                matched_language = lang
                matched_answer = gold
                break

    if matched_language is None:
        label = INCORRECT
    elif matched_language == record.input_language:
        label = CORRECT_INPUT_LANG
    elif matched_language == config.reference_language:
        label = CORRECT_ENGLISH
    else:
        label = CORRECT_OTHER

    diag = None
    if profiles:
        candidates = frozenset(corpus.languages) & frozenset(profiles)
        try:
            diag = classify(record.output, candidates, profiles)
        except Exception:
            diag = None  # diagnostics only, never block a verdict

    return Verdict(
        question_id=qid,
        input_language=record.input_language,
        model_tag=record.model_tag,
        label=label,
        matched_language=matched_language,
        matched_answer=matched_answer,
        output=record.output,
        langid=diag,
    )


def collect_sets(
    verdicts: Sequence[Verdict],
    universe: Iterable[str],
    reference_language: str = "en",
) -> CorrectSets:
    """Partition correct verdicts into per-output-language id sets.

    Incorrect ids belong to no set. Every verdict id must lie in the
    universe and appear at most once.
    """
    universe = frozenset(universe)
    if not verdicts:
        return CorrectSets("", universe, {})
    input_language = verdicts[0].input_language
    seen: set[str] = set()
    sets: dict[str, set[str]] = {}
    for v in verdicts:
        if v.input_language != input_language:
            raise MatchError(
                f"mixed input languages in one batch: {input_language!r} "
                f"and {v.input_language!r}"
            )
        if v.question_id in seen:
            raise MatchError(
                f"duplicate verdict for question_id {v.question_id!r}",
                question_id=v.question_id,
            )
        seen.add(v.question_id)
        if v.question_id not in universe:
            raise MatchError(
                f"verdict id {v.question_id!r} outside the universe",
                question_id=v.question_id,
            )
        if v.label == INCORRECT:
            continue
        if v.label == CORRECT_INPUT_LANG:
            lang = input_language
        elif v.label == CORRECT_ENGLISH:
            lang = reference_language
        else:
            lang = v.matched_language
            if lang is None:
                raise MatchError(
                    f"correct_other verdict without matched_language for "
                    f"{v.question_id!r}"
                )
        sets.setdefault(lang, set()).add(v.question_id)
    return CorrectSets(
        input_language=input_language,
        universe=universe,
        by_output_language={l: frozenset(s) for l, s in sets.items()},
    )


def read_generation_log(path: str | Path) -> list[GenerationRecord]:
    """Read a JSONL generation log; errors carry the offending line number."""
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise MatchError(
                    f"malformed JSON: {exc.msg}", line=line_no, file=str(path)
                ) from exc
            try:
                records.append(
                    GenerationRecord(
                        question_id=str(obj["question_id"]),
                        input_language=str(obj["input_language"]),
                        output=str(obj["output"]),
                        model_tag=str(obj["model_tag"]),
                    )
                )
            except KeyError as exc:
                raise MatchError(
                    f"missing key {exc.args[0]!r}", line=line_no, file=str(path)
                ) from exc
    return records


def write_verdicts(verdicts: Iterable[Verdict], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for v in verdicts:
            fh.write(json.dumps(v.to_dict(), ensure_ascii=False) + "\n")
