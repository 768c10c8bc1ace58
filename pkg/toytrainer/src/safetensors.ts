/**
 * Shared single-file tensor container: 8-byte little-endian u64 header
 * length, UTF-8 JSON header mapping name -> {dtype, shape, data_offsets},
 * then a contiguous data region. Only F32 tensors are produced here; reads
 * accept F32 as well.
 */

import { readFileSync, writeFileSync } from "node:fs";

export interface TensorEntry {
  name: string;
  shape: number[];
  data: Float32Array;
}

export function writeSafetensors(path: string, tensors: TensorEntry[]): void {
  const header: Record<string, unknown> = {};
  let offset = 0;
  const blobs: Buffer[] = [];
  for (const t of tensors) {
    const bytes = Buffer.from(t.data.buffer, t.data.byteOffset, t.data.byteLength);
    header[t.name] = {
      dtype: "F32",
      shape: t.shape,
      data_offsets: [offset, offset + bytes.length],
    };
    blobs.push(bytes);
    offset += bytes.length;
  }
  const payload = Buffer.from(JSON.stringify(header), "utf-8");
  const prefix = Buffer.alloc(8);
  prefix.writeBigUInt64LE(BigInt(payload.length));
  writeFileSync(path, Buffer.concat([prefix, payload, ...blobs]));
}

export function readSafetensors(path: string): Map<string, TensorEntry> {
  const raw = readFileSync(path);
  if (raw.length < 8) throw new Error(`${path}: too short for a header`);
  const headerLen = Number(raw.readBigUInt64LE(0));
  if (8 + headerLen > raw.length) {
    throw new Error(`${path}: header length ${headerLen} exceeds file size`);
  }
  const header = JSON.parse(raw.subarray(8, 8 + headerLen).toString("utf-8"));
  const dataStart = 8 + headerLen;
  const out = new Map<string, TensorEntry>();
  for (const [name, info] of Object.entries<any>(header)) {
    if (name === "__metadata__") continue;
    if (info.dtype !== "F32") {
      throw new Error(`${path}: unsupported dtype ${info.dtype} for ${name}`);
    }
    const [begin, end] = info.data_offsets;
    const bytes = raw.subarray(dataStart + begin, dataStart + end);
    const data = new Float32Array(
      bytes.buffer.slice(bytes.byteOffset, bytes.byteOffset + bytes.length),
    );
    out.set(name, { name, shape: info.shape, data });
  }
  return out;
}
