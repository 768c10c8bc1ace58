"""Stream two named-tensor checkpoints and compute per-layer update magnitudes.

Container format: 8 bytes little-endian u64 header length N, then N bytes of
UTF-8 JSON mapping tensor name -> {"dtype", "shape", "data_offsets"}, then a
contiguous data region (offsets relative to its start). Tensors are diffed
in fixed-size chunks with a float64 accumulator, so memory stays constant in
tensor size and half-precision inputs do not lose the signal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from .errors import ContainerError
from .schemes import MODULE_KINDS, NamingScheme

HEADER_PREFIX_BYTES = 8
DEFAULT_CHUNK_BYTES = 4 * 1024 * 1024

# dtype tag -> (numpy dtype for raw reads, element size in bytes)
DTYPES = {
    "F64": ("<f8", 8),
    "F32": ("<f4", 4),
    "F16": ("<f2", 2),
    "BF16": ("<u2", 2),  # widened manually, numpy has no bfloat16
    "I64": ("<i8", 8),
    "I32": ("<i4", 4),
    "I16": ("<i2", 2),
    "I8": ("i1", 1),
    "U8": ("u1", 1),
    "BOOL": ("b1", 1),
}


@dataclass(frozen=True)
class TensorMeta:
    name: str
    dtype: str
    shape: tuple[int, ...]
    byte_offset: int  # absolute offset of the tensor data in the file
    byte_length: int

    @property
    def n_elements(self) -> int:
        n = 1
        for dim in self.shape:
            n *= dim
        return n


@dataclass(frozen=True)
class DiffEntry:
    name: str
    layer: int | None
    module_kind: str
    mean_abs_delta: float
    n: int


@dataclass(frozen=True)
class DiffMatrix:
    """Mean-abs deltas aggregated per (module kind, layer) cell."""

    kinds: tuple[str, ...]
    layer_count: int
    values: dict  # (kind, layer) -> float; absent cells missing
    cell_elements: dict  # (kind, layer) -> summed element count

    def row(self, kind: str) -> list[float | None]:
        return [self.values.get((kind, l)) for l in range(self.layer_count)]

    def max_value(self) -> float:
        return max(self.values.values(), default=0.0)

    def min_value(self) -> float:
        return min(self.values.values(), default=0.0)


def read_manifest(path: str | Path) -> list[TensorMeta]:
    """Parse all tensor metadata without touching tensor data."""
    path = Path(path)
    size = path.stat().st_size
    with path.open("rb") as fh:
        prefix = fh.read(HEADER_PREFIX_BYTES)
        if len(prefix) < HEADER_PREFIX_BYTES:
            raise ContainerError("file too short for a header", file=str(path))
        header_len = int.from_bytes(prefix, "little")
        if HEADER_PREFIX_BYTES + header_len > size:
            raise ContainerError(
                f"header length {header_len} exceeds file size {size}",
                file=str(path),
            )
        try:
            header = json.loads(fh.read(header_len).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ContainerError(
                f"header is not valid JSON: {exc}", file=str(path)
            ) from exc
    if not isinstance(header, dict):
        raise ContainerError("header must be a JSON object", file=str(path))

    data_start = HEADER_PREFIX_BYTES + header_len
    region = size - data_start
    metas = []
    for name, info in header.items():
        if name == "__metadata__":
            continue
        try:
            dtype = info["dtype"]
            shape = tuple(int(d) for d in info["shape"])
            begin, end = (int(v) for v in info["data_offsets"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ContainerError(
                f"bad tensor entry: {exc}", tensor=name, file=str(path)
            ) from exc
        if dtype not in DTYPES:
            raise ContainerError(
                f"unknown dtype {dtype!r}", tensor=name, file=str(path)
            )
        if any(d < 0 for d in shape):
            raise ContainerError(
                f"negative dimension in shape {shape}", tensor=name,
                file=str(path),
            )
        if not 0 <= begin <= end <= region:
            raise ContainerError(
                f"data_offsets [{begin}, {end}] outside data region of "
                f"{region} bytes",
                tensor=name,
                file=str(path),
            )
        n_elements = 1
        for dim in shape:
            n_elements *= dim
        expected = DTYPES[dtype][1] * n_elements
        if end - begin != expected:
            raise ContainerError(
                f"byte length {end - begin} does not match dtype/shape "
                f"({expected} expected)",
                tensor=name,
                file=str(path),
            )
        metas.append(
            TensorMeta(
                name=name,
                dtype=dtype,
                shape=shape,
                byte_offset=data_start + begin,
                byte_length=end - begin,
            )
        )

    metas.sort(key=lambda m: (m.byte_offset, m.name))
    for prev, cur in zip(metas, metas[1:]):
        if cur.byte_offset < prev.byte_offset + prev.byte_length:
            raise ContainerError(
                f"overlapping offsets: {prev.name!r} and {cur.name!r}",
                file=str(path),
            )
    metas.sort(key=lambda m: m.name)
    return metas


def _to_float64(raw: bytes, dtype: str) -> np.ndarray:
    np_dtype, _ = DTYPES[dtype]
    arr = np.frombuffer(raw, dtype=np_dtype)
    if dtype == "BF16":
        arr = (arr.astype(np.uint32) << 16).view(np.float32)
    return arr.astype(np.float64)


def diff_tensor(
    meta_p: TensorMeta,
    meta_f: TensorMeta,
    stream_p: BinaryIO,
    stream_f: BinaryIO,
    layer: int | None = None,
    module_kind: str = "other",
    chunk_bytes: int = DEFAULT_CHUNK_BYTES,
) -> DiffEntry:
    """Mean absolute element-wise difference between two stored tensors.

    Streams fixed-size chunks and accumulates in float64 regardless of the
    element type, so the result matches a full-load reference to rounding.
    """
    if meta_p.name != meta_f.name:
        raise ContainerError(
            f"tensor name mismatch: {meta_p.name!r} vs {meta_f.name!r}"
        )
    if meta_p.shape != meta_f.shape:
        raise ContainerError(
            f"shape mismatch {meta_p.shape} vs {meta_f.shape}",
            tensor=meta_p.name,
        )
    if meta_p.dtype != meta_f.dtype:
        raise ContainerError(
            f"dtype mismatch {meta_p.dtype} vs {meta_f.dtype}",
            tensor=meta_p.name,
        )

    elem_size = DTYPES[meta_p.dtype][1]
    chunk = max(elem_size, chunk_bytes - chunk_bytes % elem_size)
    stream_p.seek(meta_p.byte_offset)
    stream_f.seek(meta_f.byte_offset)
    remaining = meta_p.byte_length
    acc = 0.0
    while remaining > 0:
        take = min(chunk, remaining)
        raw_p = stream_p.read(take)
        raw_f = stream_f.read(take)
        if len(raw_p) != take or len(raw_f) != take:
            raise ContainerError(
                "unexpected end of data region", tensor=meta_p.name
            )
        a = _to_float64(raw_p, meta_p.dtype)
        b = _to_float64(raw_f, meta_f.dtype)
        acc += float(np.sum(np.abs(a - b)))
        remaining -= take

    n = meta_p.n_elements
    return DiffEntry(
        name=meta_p.name,
        layer=layer,
        module_kind=module_kind,
        mean_abs_delta=(acc / n) if n else 0.0,
        n=n,
    )


def classify_parameter(name: str, scheme: NamingScheme) -> tuple[int | None, str]:
    """Deterministic (layer, module kind) for a dotted parameter name."""
    return scheme.classify(name)


def diff_checkpoints(
    base_path: str | Path,
    tuned_path: str | Path,
    scheme: NamingScheme,
    chunk_bytes: int = DEFAULT_CHUNK_BYTES,
) -> list[DiffEntry]:
    """Diff every tensor of two single-file checkpoints, classified."""
    metas_p = {m.name: m for m in read_manifest(base_path)}
    metas_f = {m.name: m for m in read_manifest(tuned_path)}
    missing = sorted(set(metas_p) ^ set(metas_f))
    if missing:
        raise ContainerError(
            f"checkpoints disagree on tensor names, e.g. {missing[:3]}",
            file=str(tuned_path),
        )
    entries = []
    with Path(base_path).open("rb") as fh_p, Path(tuned_path).open("rb") as fh_f:
        for name in sorted(metas_p):
            layer, kind = classify_parameter(name, scheme)
            entries.append(
                diff_tensor(
                    metas_p[name],
                    metas_f[name],
                    fh_p,
                    fh_f,
                    layer=layer,
                    module_kind=kind,
                    chunk_bytes=chunk_bytes,
                )
            )
    return entries


def build_matrix(entries: Sequence[DiffEntry]) -> DiffMatrix:
    """Element-weighted aggregation of entries into (kind, layer) cells."""
    layered = [e for e in entries if e.layer is not None]
    if not layered:
        return DiffMatrix(kinds=(), layer_count=0, values={}, cell_elements={})
    layer_count = max(e.layer for e in layered) + 1
    sums: dict[tuple[str, int], float] = {}
    counts: dict[tuple[str, int], int] = {}
    for e in layered:
        key = (e.module_kind, e.layer)
        sums[key] = sums.get(key, 0.0) + e.mean_abs_delta * e.n
        counts[key] = counts.get(key, 0) + e.n
    kinds = tuple(k for k in MODULE_KINDS if any(key[0] == k for key in sums))
    values = {
        key: (sums[key] / counts[key]) if counts[key] else 0.0 for key in sums
    }
    return DiffMatrix(
        kinds=kinds,
        layer_count=layer_count,
        values=values,
        cell_elements=dict(counts),
    )


def entries_to_csv(entries: Iterable[DiffEntry]) -> str:
    lines = ["name,layer,module_kind,mean_abs_delta,n"]
    for e in entries:
        layer = "" if e.layer is None else str(e.layer)
        lines.append(f"{e.name},{layer},{e.module_kind},{e.mean_abs_delta!r},{e.n}")
    return "\n".join(lines) + "\n"


def matrix_to_csv(matrix: DiffMatrix) -> str:
    """Raw cell values; layer columns labeled 1-indexed for human readers."""
    header = ["module_kind"] + [
        f"layer_{l + 1}" for l in range(matrix.layer_count)
    ]
    lines = [",".join(header)]
    for kind in matrix.kinds:
        cells = [
            "" if v is None else repr(v) for v in matrix.row(kind)
        ]
        lines.append(",".join([kind] + cells))
    return "\n".join(lines) + "\n"


def matrix_from_csv(text: str) -> DiffMatrix:
    lines = [line for line in text.strip().splitlines() if line]
    if not lines:
        raise ContainerError("empty matrix CSV")
    header = lines[0].split(",")
    if header[0] != "module_kind":
        raise ContainerError("matrix CSV must start with a module_kind column")
    layer_count = len(header) - 1
    values: dict[tuple[str, int], float] = {}
    kinds = []
    for line in lines[1:]:
        cells = line.split(",")
        kind = cells[0]
        kinds.append(kind)
        for layer, cell in enumerate(cells[1:]):
            if cell:
                values[(kind, layer)] = float(cell)
    return DiffMatrix(
        kinds=tuple(kinds),
        layer_count=layer_count,
        values=values,
        cell_elements={},
    )
