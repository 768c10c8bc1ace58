"""Turn checkpoint manifests and diff matrices into per-parameter freeze plans.

A plan marks every manifest parameter trainable or frozen. Layer indices are
0-based internally; anything rendered for humans is 1-indexed and labeled as
such, because published layer ranges usually count from 1.

Non-block parameters (token embeddings, final norm, LM head) stay frozen in
every plan unless include_head flips the head; that is the conservative
reading of "unfreeze layers i..j".
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .ckptdiff import DiffMatrix, TensorMeta
from .errors import PlanError
from .schemes import NamingScheme

RATIONALES = ("final_k", "matched_prefix", "explicit", "top_delta")


@dataclass(frozen=True)
class LayerRange:
    """Inclusive 0-indexed layer range."""

    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise PlanError(f"invalid layer range {self.start}..{self.end}")

    def human(self) -> str:
        return f"{self.start + 1}-{self.end + 1} (1-indexed)"


@dataclass(frozen=True)
class TrainConfigTemplate:
    """Training hyperparameters emitted with every plan."""

    num_epochs: int = 3
    save_steps: int = 100
    eval_steps: int = 100
    logging_steps: int = 100
    batch_size: int = 64
    gradient_accumulation: int = 1
    weight_decay: float = 0.01
    bf16: bool = True
    seed: int = 42
    learning_rate: float = 5e-6
    dropout: float = 0.1
    balanced_multilingual: dict | None = None

    def to_dict(self) -> dict:
        payload = asdict(self)
        if payload["balanced_multilingual"] is None:
            del payload["balanced_multilingual"]
        return payload

    @classmethod
    def from_dict(cls, payload: Mapping) -> "TrainConfigTemplate":
        return cls(**dict(payload))


def multilingual_template(per_language_examples: int = 200) -> TrainConfigTemplate:
    """Template for balanced multilingual partial training."""
    return TrainConfigTemplate(
        balanced_multilingual={"per_language_examples": per_language_examples}
    )


@dataclass(frozen=True)
class FreezePlan:
    model_scheme: str
    layer_count: int
    trainable: Mapping[str, bool]  # every manifest parameter, exactly once
    rationale: str
    trainable_param_count: int
    total_param_count: int
    notes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.rationale not in RATIONALES:
            raise PlanError(f"unknown rationale {self.rationale!r}")

    def trainable_layers(self) -> tuple[int, ...]:
        return tuple(sorted(self.notes.get("trainable_layers", ())))


class _ManifestView:
    """Per-parameter classification and per-layer element counts."""

    def __init__(self, manifest: Sequence[TensorMeta], scheme: NamingScheme):
        self.scheme = scheme
        self.layer_of: dict[str, int | None] = {}
        self.kind_of: dict[str, str] = {}
        self.n_of: dict[str, int] = {}
        per_layer: dict[int, int] = {}
        for meta in manifest:
            layer, kind = scheme.classify(meta.name)
            self.layer_of[meta.name] = layer
            self.kind_of[meta.name] = kind
            self.n_of[meta.name] = meta.n_elements
            if layer is not None:
                per_layer[layer] = per_layer.get(layer, 0) + meta.n_elements
        if not per_layer:
            raise PlanError(
                f"no layer-indexed parameters found with scheme "
                f"{scheme.name!r}"
            )
        self.layer_count = max(per_layer) + 1
        self.per_layer = {
            l: per_layer.get(l, 0) for l in range(self.layer_count)
        }
        self.total = sum(self.n_of.values())

    def plan_for_layers(
        self,
        layers: set[int],
        rationale: str,
        include_head: bool,
        extra_notes: dict | None = None,
    ) -> FreezePlan:
        trainable = {}
        for name, layer in self.layer_of.items():
            on = layer in layers if layer is not None else False
            if include_head and self.kind_of[name] == "head":
                on = True
            trainable[name] = on
        count = sum(self.n_of[n] for n, on in trainable.items() if on)
        notes = {
            "trainable_layers": sorted(layers),
            "layer_indexing": "0-indexed internally; human output 1-indexed",
            "include_head": include_head,
        }
        if extra_notes:
            notes.update(extra_notes)
        return FreezePlan(
            model_scheme=self.scheme.name,
            layer_count=self.layer_count,
            trainable=trainable,
            rationale=rationale,
            trainable_param_count=count,
            total_param_count=self.total,
            notes=notes,
        )


def plan_final_layers(
    manifest: Sequence[TensorMeta],
    scheme: NamingScheme,
    k: int,
    include_head: bool = False,
) -> FreezePlan:
    """Unfreeze the final k transformer layers."""
    view = _ManifestView(manifest, scheme)
    if not 1 <= k <= view.layer_count:
        raise PlanError(
            f"k={k} outside [1, {view.layer_count}] for this manifest"
        )
    layers = set(range(view.layer_count - k, view.layer_count))
    return view.plan_for_layers(layers, "final_k", include_head, {"k": k})


def plan_matched_prefix(
    manifest: Sequence[TensorMeta],
    scheme: NamingScheme,
    reference: FreezePlan,
) -> FreezePlan:
    """Prefix of layers 0,1,2,... matching a final-k plan's parameter count.

    Greedy: stops at the first prefix whose trainable element count reaches
    the reference count, so the overshoot is less than one layer's worth.
    """
    if reference.rationale != "final_k":
        raise PlanError(
            f"matched-prefix reference must be a final_k plan, got "
            f"{reference.rationale!r}"
        )
    view = _ManifestView(manifest, scheme)
    target = reference.trainable_param_count
    layers: set[int] = set()
    count = 0
    for layer in range(view.layer_count):
        if count >= target:
            break
        layers.add(layer)
        count += view.per_layer[layer]
    if count < target:
        raise PlanError(
            f"cannot reach reference parameter count {target} "
            f"(all layers hold {count})"
        )
    return view.plan_for_layers(
        layers,
        "matched_prefix",
        include_head=False,
        extra_notes={"target_count": target, "overshoot": count - target},
    )


def plan_from_delta(
    matrix: DiffMatrix,
    manifest: Sequence[TensorMeta],
    scheme: NamingScheme,
    fraction: float,
) -> FreezePlan:
    """Unfreeze the ceil(fraction * layer_count) layers with the largest
    MLP update magnitude; ties go to the higher layer index."""
    if not 0.0 < fraction <= 1.0:
        raise PlanError(f"fraction {fraction} outside (0, 1]")
    view = _ManifestView(manifest, scheme)
    if matrix.layer_count != view.layer_count:
        raise PlanError(
            f"diff matrix has {matrix.layer_count} layers but the manifest "
            f"has {view.layer_count}"
        )
    if "mlp" not in matrix.kinds:
        raise PlanError("diff matrix has no mlp row to rank layers by")
    mlp_row = matrix.row("mlp")
    ranked = sorted(
        range(view.layer_count),
        key=lambda l: (-(mlp_row[l] if mlp_row[l] is not None else 0.0), -l),
    )
    take = math.ceil(fraction * view.layer_count)
    layers = set(ranked[:take])
    return view.plan_for_layers(
        layers, "top_delta", include_head=False, extra_notes={"fraction": fraction}
    )


def plan_explicit(
    manifest: Sequence[TensorMeta],
    scheme: NamingScheme,
    layer_range: LayerRange,
    include_head: bool = False,
) -> FreezePlan:
    """Unfreeze an explicit inclusive 0-indexed layer range."""
    view = _ManifestView(manifest, scheme)
    if layer_range.end >= view.layer_count:
        raise PlanError(
            f"range {layer_range.human()} exceeds layer count "
            f"{view.layer_count}"
        )
    layers = set(range(layer_range.start, layer_range.end + 1))
    return view.plan_for_layers(
        layers, "explicit", include_head, {"range": layer_range.human()}
    )


def emit_plan(
    plan: FreezePlan,
    template: TrainConfigTemplate,
    out: str | Path,
) -> Path:
    """Write the plan JSON; identical inputs yield byte-identical files."""
    payload = {
        "scheme": plan.model_scheme,
        "layer_count": plan.layer_count,
        "rationale": plan.rationale,
        "trainable": dict(sorted(plan.trainable.items())),
        "counts": {
            "trainable_params": plan.trainable_param_count,
            "total_params": plan.total_param_count,
            **{
                k: plan.notes[k]
                for k in ("target_count", "overshoot")
                if k in plan.notes
            },
        },
        "notes": {k: v for k, v in sorted(plan.notes.items())},
        "train_config": template.to_dict(),
    }
    out = Path(out)
    out.write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return out


def load_plan(path: str | Path) -> tuple[FreezePlan, TrainConfigTemplate]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        counts = payload["counts"]
        notes = dict(payload.get("notes", {}))
        plan = FreezePlan(
            model_scheme=payload["scheme"],
            layer_count=int(payload["layer_count"]),
            trainable=dict(payload["trainable"]),
            rationale=payload["rationale"],
            trainable_param_count=int(counts["trainable_params"]),
            total_param_count=int(counts["total_params"]),
            notes=notes,
        )
        template = TrainConfigTemplate.from_dict(payload["train_config"])
    except (KeyError, TypeError, ValueError) as exc:
        raise PlanError(f"invalid plan file {path}: {exc}") from exc
    return plan, template
