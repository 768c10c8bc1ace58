"""Test-side tensor container writer, independent of the package's reader.

Writing here and reading with the package gives a write-then-read oracle
that does not share code with the implementation under test.
"""

import json
from pathlib import Path

import numpy as np

NUMPY_TO_TAG = {
    np.dtype("float64"): "F64",
    np.dtype("float32"): "F32",
    np.dtype("float16"): "F16",
    np.dtype("int64"): "I64",
    np.dtype("int32"): "I32",
    np.dtype("int16"): "I16",
    np.dtype("int8"): "I8",
    np.dtype("uint8"): "U8",
    np.dtype("bool"): "BOOL",
}


def float32_to_bf16_bytes(arr: np.ndarray) -> bytes:
    """Round-to-nearest-even truncation of float32 to bfloat16 bit patterns."""
    bits = arr.astype(np.float32).view(np.uint32)
    rounding = ((bits >> 16) & 1) + 0x7FFF
    return ((bits + rounding) >> 16).astype(np.uint16).tobytes()


def write_safetensors(path, tensors, bf16_names=()):
    """Write {name: ndarray} in the shared container layout.

    Names in bf16_names are stored as BF16 (values must be float32).
    """
    header = {}
    blobs = []
    offset = 0
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr)
        if name in bf16_names:
            tag = "BF16"
            raw = float32_to_bf16_bytes(arr)
        else:
            tag = NUMPY_TO_TAG[arr.dtype]
            raw = arr.tobytes()
        header[name] = {
            "dtype": tag,
            "shape": list(arr.shape),
            "data_offsets": [offset, offset + len(raw)],
        }
        blobs.append(raw)
        offset += len(raw)
    payload = json.dumps(header).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(len(payload).to_bytes(8, "little"))
        fh.write(payload)
        for raw in blobs:
            fh.write(raw)


def bf16_roundtrip(arr: np.ndarray) -> np.ndarray:
    """The float64 values a BF16-stored float32 array decodes back to."""
    stored = np.frombuffer(float32_to_bf16_bytes(arr), dtype=np.uint16)
    return (stored.astype(np.uint32) << 16).view(np.float32).astype(np.float64)


def llama1b_manifest_shapes():
    """Realistic shapes for the bundled Llama-1B-style name fixture."""
    shapes = {"model.embed_tokens.weight": (1024, 64)}
    for i in range(16):
        p = f"model.layers.{i}"
        shapes[f"{p}.self_attn.q_proj.weight"] = (64, 64)
        shapes[f"{p}.self_attn.k_proj.weight"] = (16, 64)
        shapes[f"{p}.self_attn.v_proj.weight"] = (16, 64)
        shapes[f"{p}.self_attn.o_proj.weight"] = (64, 64)
        shapes[f"{p}.mlp.gate_proj.weight"] = (256, 64)
        shapes[f"{p}.mlp.up_proj.weight"] = (256, 64)
        shapes[f"{p}.mlp.down_proj.weight"] = (64, 256)
        shapes[f"{p}.input_layernorm.weight"] = (64,)
        shapes[f"{p}.post_attention_layernorm.weight"] = (64,)
    shapes["model.norm.weight"] = (64,)
    shapes["lm_head.weight"] = (1024, 64)
    return shapes
