"""Parameter naming schemes: map dotted tensor names to (layer, module kind).

A scheme is a layer-index capture regex plus one regex per module kind.
Exactly one kind may match a name; two matching kinds is a configuration
error surfaced when the scheme is applied. Bundled schemes cover Llama-style
and Gemma-style decoder checkpoints and the toy trainer's layout; custom
schemes load from JSON.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import SchemeError

MODULE_KINDS = ("attention", "mlp", "embedding", "norm", "head", "other")


@dataclass(frozen=True)
class NamingScheme:
    name: str
    layer_pattern: str  # one capture group with the decimal layer index
    kind_patterns: Mapping[str, str]  # module kind -> regex
    _compiled: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for kind in self.kind_patterns:
            if kind not in MODULE_KINDS or kind == "other":
                raise SchemeError(
                    f"scheme {self.name!r} declares invalid kind {kind!r}"
                )
        try:
            layer_re = re.compile(self.layer_pattern)
            kinds = {k: re.compile(p) for k, p in self.kind_patterns.items()}
        except re.error as exc:
            raise SchemeError(
                f"scheme {self.name!r} has a bad regex: {exc}"
            ) from exc
        if layer_re.groups != 1:
            raise SchemeError(
                f"scheme {self.name!r} layer pattern needs exactly one "
                f"capture group"
            )
        object.__setattr__(
            self, "_compiled", {"layer": layer_re, "kinds": kinds}
        )

    def classify(self, name: str) -> tuple[int | None, str]:
        """(layer index or None, module kind); unmatched names are "other"."""
        matched = [
            kind
            for kind, pattern in sorted(self._compiled["kinds"].items())
            if pattern.search(name)
        ]
        if len(matched) > 1:
            raise SchemeError(
                f"scheme {self.name!r} patterns overlap on {name!r}: "
                f"{matched}"
            )
        layer_match = self._compiled["layer"].search(name)
        layer = int(layer_match.group(1)) if layer_match else None
        kind = matched[0] if matched else "other"
        return layer, kind


_LLAMA = NamingScheme(
    name="llama",
    layer_pattern=r"(?:^|\.)layers\.(\d+)\.",
    kind_patterns={
        "attention": r"\.self_attn\.",
        "mlp": r"\.mlp\.",
        "norm": r"layernorm|(?:^|\.)norm\.|(?:^|\.)norm$",
        "embedding": r"embed_tokens",
        "head": r"(?:^|\.)lm_head",
    },
)

# Gemma text stacks use the same dotted layout plus extra per-layer norms
# (pre/post feedforward), which the layernorm pattern already covers.
_GEMMA = NamingScheme(
    name="gemma",
    layer_pattern=r"(?:^|\.)layers\.(\d+)\.",
    kind_patterns=dict(_LLAMA.kind_patterns),
)

_TOY = NamingScheme(
    name="toy",
    layer_pattern=r"(?:^|\.)blocks\.(\d+)\.",
    kind_patterns={
        "attention": r"\.attn\.",
        "mlp": r"\.mlp\.",
        "norm": r"(?:^|\.)norm\d*(?:\.|$)|final_norm",
        "embedding": r"(?:tok|pos)_embed",
        "head": r"^head(?:\.|$)",
    },
)

BUNDLED_SCHEMES = {s.name: s for s in (_LLAMA, _GEMMA, _TOY)}


def load_scheme(spec: str | Path) -> NamingScheme:
    """Resolve a bundled scheme name or load a JSON scheme file."""
    if isinstance(spec, str) and spec in BUNDLED_SCHEMES:
        return BUNDLED_SCHEMES[spec]
    path = Path(spec)
    if not path.exists():
        raise SchemeError(
            f"unknown scheme {spec!r}: not a bundled name "
            f"({sorted(BUNDLED_SCHEMES)}) and not a file"
        )
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        return NamingScheme(
            name=payload["name"],
            layer_pattern=payload["layer_pattern"],
            kind_patterns=dict(payload["kind_patterns"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemeError(f"invalid scheme file {path}: {exc}") from exc
