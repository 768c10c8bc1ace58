import json
import random

import pytest

from langadhere import demo
from langadhere.corpus import (
    FilteredSubset,
    IngestOptions,
    build_filtered_subset,
    canonical_language_order,
    ingest_corpus,
    is_language_code,
)
from langadhere.errors import IngestError
from langadhere.textnorm import normalize


def write_rows(path, rows):
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def row(qid, lang, split="test", question=None, answer=None):
    return {
        "question_id": qid,
        "language": lang,
        "split": split,
        "question": question or f"Question {qid} in {lang}?",
        "answer": answer or f"answer-{qid}-{lang}",
    }


def test_language_code_validation():
    assert is_language_code("en")
    assert not is_language_code("EN")
    assert not is_language_code("eng")
    assert not is_language_code("e1")


def test_minimal_two_language_corpus(tmp_path):
    path = tmp_path / "c.jsonl"
    write_rows(path, [row(q, l) for q in ("q1", "q2") for l in ("en", "fr")])
    corpus = ingest_corpus(path)
    assert len(corpus.items) == 2
    assert sum(len(r) for r in corpus.items.values()) == 4
    assert corpus.languages == ("en", "fr")
    assert corpus.quarantined == ()


def test_missing_translation_strict_names_the_id(tmp_path):
    path = tmp_path / "c.jsonl"
    rows = [row(q, l) for q in ("q1", "q2") for l in ("en", "fr")]
    rows = [r for r in rows if not (r["question_id"] == "q2" and r["language"] == "fr")]
    write_rows(path, rows)
    with pytest.raises(IngestError, match="q2"):
        ingest_corpus(path)


def test_missing_translation_quarantine_drops_whole_id(tmp_path):
    path = tmp_path / "c.jsonl"
    rows = [row(q, l) for q in ("q1", "q2") for l in ("en", "fr")]
    rows = [r for r in rows if not (r["question_id"] == "q2" and r["language"] == "fr")]
    write_rows(path, rows)
    corpus = ingest_corpus(path, IngestOptions(policy="quarantine"))
    assert corpus.quarantined == ("q2",)
    assert set(corpus.items) == {"q1"}


def test_seven_language_sample_counts(tmp_path):
    # Oracle: recount the written file independently of the ingester.
    all_rows = demo.demo_rows()
    keep_ids = sorted({r["question_id"] for r in all_rows})[:100]
    rows = [r for r in all_rows if r["question_id"] in set(keep_ids)]
    path = tmp_path / "c.jsonl"
    write_rows(path, rows)

    lines = path.read_text(encoding="utf-8").splitlines()
    by_id = {}
    for line in lines:
        obj = json.loads(line)
        by_id.setdefault(obj["question_id"], set()).add(obj["language"])
    assert len(lines) == 700
    assert all(len(langs) == 7 for langs in by_id.values())

    corpus = ingest_corpus(path)
    assert sum(len(r) for r in corpus.items.values()) == 700
    assert corpus.quarantined == ()


def test_malformed_json_reports_line_number(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text(
        json.dumps(row("q1", "en")) + "\n{not json\n", encoding="utf-8"
    )
    with pytest.raises(IngestError) as err:
        ingest_corpus(path)
    assert err.value.context["line"] == 2


def test_duplicate_row_rejected(tmp_path):
    path = tmp_path / "c.jsonl"
    write_rows(path, [row("q1", "en"), row("q1", "en")])
    with pytest.raises(IngestError, match="duplicate"):
        ingest_corpus(path)


def test_undeclared_language_rejected(tmp_path):
    path = tmp_path / "c.jsonl"
    write_rows(path, [row("q1", "en"), row("q1", "xx")])
    with pytest.raises(IngestError, match="undeclared"):
        ingest_corpus(path, IngestOptions(languages=("en",)))


def test_id_in_two_splits_rejected(tmp_path):
    path = tmp_path / "c.jsonl"
    write_rows(path, [row("q1", "en", split="train"), row("q1", "fr", split="test")])
    with pytest.raises(IngestError, match="splits"):
        ingest_corpus(path)


def test_empty_answer_after_normalization_rejected(tmp_path):
    path = tmp_path / "c.jsonl"
    write_rows(path, [row("q1", "en", answer="..."), row("q1", "fr")])
    with pytest.raises(IngestError, match="empty"):
        ingest_corpus(path)


def test_ingestion_is_row_order_independent(tmp_path):
    rows = [r for r in demo.demo_rows() if r["question_id"] < "q0040"]
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_rows(a, rows)
    shuffled = rows[:]
    random.Random(7).shuffle(shuffled)
    write_rows(b, shuffled)
    ca, cb = ingest_corpus(a), ingest_corpus(b)
    assert ca.items == cb.items
    assert ca.split_of == cb.split_of
    assert ca.languages == cb.languages


def test_script_mismatch_warns(tmp_path):
    path = tmp_path / "c.jsonl"
    write_rows(path, [row("q1", "en"), row("q1", "pt", answer="नई दिल्ली")])
    corpus = ingest_corpus(path)
    assert any("Devanagari" in w for w in corpus.warnings)


def test_fixture_corpus_is_fully_parallel(corpus):
    for qid, per_lang in corpus.items.items():
        assert set(per_lang) == set(corpus.languages), qid
    assert corpus.train_ids.isdisjoint(corpus.eval_ids)


def test_filter_identical_answers_is_empty(tmp_path):
    path = tmp_path / "c.jsonl"
    rows = []
    for q in ("q1", "q2"):
        for lang in ("en", "fr"):
            rows.append(row(q, lang, answer="Paris"))
    write_rows(path, rows)
    subset = build_filtered_subset(ingest_corpus(path), "fr")
    assert subset.question_ids == frozenset()


def test_filter_keeps_exactly_the_differing_ids(tmp_path):
    path = tmp_path / "c.jsonl"
    rows = [
        row("q1", "en", answer="London"), row("q1", "fr", answer="Londres"),
        row("q2", "en", answer="Berlin"), row("q2", "fr", answer="Berlin"),
        row("q3", "en", answer="Vienna"), row("q3", "fr", answer="Vienne"),
    ]
    write_rows(path, rows)
    subset = build_filtered_subset(ingest_corpus(path), "fr")
    assert subset.question_ids == frozenset({"q1", "q3"})


def test_filter_rejects_reference_language(corpus):
    with pytest.raises(IngestError):
        build_filtered_subset(corpus, "en")


def test_filter_matches_brute_force_on_synthetic_corpus(tmp_path, rng):
    # 500 ids, ~40% of them sharing the entity string across languages.
    rows = []
    for i in range(500):
        qid = f"s{i:04d}"
        shared = rng.random() < 0.4
        en_answer = f"Entity {i}"
        fr_answer = en_answer if shared else f"Entité {i}"
        rows.append(row(qid, "en", answer=en_answer))
        rows.append(row(qid, "fr", answer=fr_answer))
    path = tmp_path / "c.jsonl"
    write_rows(path, rows)
    corpus = ingest_corpus(path)

    expected = set()
    for r in rows:  # brute-force string comparison over the raw rows
        if r["language"] != "fr":
            continue
        qid = r["question_id"]
        en_row = next(
            x for x in rows if x["question_id"] == qid and x["language"] == "en"
        )
        if normalize(r["answer"]) != normalize(en_row["answer"]):
            expected.add(qid)

    subset = build_filtered_subset(corpus, "fr")
    assert subset.question_ids == frozenset(expected)


def test_filter_soundness_on_fixture(corpus):
    subset = build_filtered_subset(corpus, "de")
    for qid in corpus.eval_ids:
        same = normalize(corpus.gold_answer(qid, "de")) == normalize(
            corpus.gold_answer(qid, "en")
        )
        assert (qid in subset.question_ids) == (not same)
    assert subset.question_ids <= corpus.eval_ids


def test_canonical_language_order():
    assert canonical_language_order({"es", "en", "hi", "zz"}) == ("en", "hi", "es", "zz")


def test_in_memory_fixture_equals_ingested_file(tmp_path, corpus):
    path = tmp_path / "c.jsonl"
    demo.write_corpus(path)
    from_file = ingest_corpus(path)
    assert from_file.languages == corpus.languages
    assert from_file.split_of == corpus.split_of
    assert from_file.items == corpus.items


def test_filtered_subset_len():
    subset = FilteredSubset("fr", "en", frozenset({"a", "b"}))
    assert len(subset) == 2
