"""Answer-string normalization shared by the corpus filter and the matcher.

The same pipeline decides both "do the gold answers differ between two
languages" and "does a model output match a gold answer", so the filtered
subset and the scoring can never disagree about string equality.

Pipeline: Unicode NFKC, casefold, whitespace collapse, punctuation stripped
at token boundaries, then one leading article dropped. The pipeline is
re-applied until the string stops changing, which makes the whole function
idempotent even on inputs like "la la land" where a single pass is not.
"""

from __future__ import annotations

import unicodedata

# Leading articles dropped when followed by at least one more token.
DEFAULT_ARTICLES: tuple[str, ...] = (
    "the", "la", "le", "el", "il", "der", "die", "das",
)

_MAX_PASSES = 8


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_boundary_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end]


def _one_pass(text: str, articles: tuple[str, ...]) -> str:
    text = unicodedata.normalize("NFKC", text).casefold()
    tokens = [_strip_boundary_punct(tok) for tok in text.split()]
    tokens = [tok for tok in tokens if tok]
    if len(tokens) >= 2 and tokens[0] in articles:
        tokens = tokens[1:]
    return " ".join(tokens)


def normalize(text: str, articles: tuple[str, ...] = DEFAULT_ARTICLES) -> str:
    """Normalize an answer string; empty output is allowed."""
    prev = text
    for _ in range(_MAX_PASSES):
        cur = _one_pass(prev, articles)
        if cur == prev:
            return cur
        prev = cur
    return prev
