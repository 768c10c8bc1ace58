/** Write a deterministic 50-tensor checkpoint for cross-tool round-trips. */

import { gauss, mulberry32 } from "./rng.js";
import { writeSafetensors, type TensorEntry } from "./safetensors.js";

export function writeFixture(path: string, nTensors = 50, seed = 42): TensorEntry[] {
  const rng = mulberry32(seed);
  const entries: TensorEntry[] = [];
  for (let i = 0; i < nTensors; i++) {
    const rows = 1 + (i % 7);
    const cols = 1 + ((i * 3) % 5);
    const data = new Float32Array(rows * cols);
    for (let j = 0; j < data.length; j++) data[j] = Math.fround(gauss(rng));
    entries.push({
      name: `blocks.${i % 4}.mlp.w${i}.weight`,
      shape: [rows, cols],
      data,
    });
  }
  writeSafetensors(path, entries);
  return entries;
}

if (process.argv[2]) writeFixture(process.argv[2]);
