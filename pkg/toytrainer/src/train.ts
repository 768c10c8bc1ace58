/**
 * Adam training loop with per-tensor freeze masks. Frozen tensors are never
 * touched by the optimizer, so their stored bytes survive training exactly.
 */

import { readFileSync } from "node:fs";
import { lossBatch, type Model } from "./model.js";
import { mulberry32, randint } from "./rng.js";
import type { Sample } from "./task.js";

export interface TrainOptions {
  steps: number;
  batchSize: number;
  learningRate: number;
  seed: number;
  logEvery: number;
  frozen: Set<string>; // tensor names excluded from updates
}

export const DEFAULT_TRAIN: Omit<TrainOptions, "frozen"> = {
  steps: 400,
  batchSize: 32,
  learningRate: 2e-3,
  seed: 42,
  logEvery: 100,
};

/** Read a freeze-plan JSON and return the frozen tensor-name set. */
export function frozenFromPlan(path: string, model: Model): Set<string> {
  const plan = JSON.parse(readFileSync(path, "utf-8"));
  const trainable: Record<string, boolean> = plan.trainable;
  if (!trainable || typeof trainable !== "object") {
    throw new Error(`${path}: plan has no trainable map`);
  }
  const frozen = new Set<string>();
  for (const p of model.params) {
    if (!(p.name in trainable)) {
      throw new Error(`${path}: plan is missing tensor ${p.name}`);
    }
    if (!trainable[p.name]) frozen.add(p.name);
  }
  for (const name of Object.keys(trainable)) {
    if (!model.byName.has(name)) {
      throw new Error(`${path}: plan names unknown tensor ${name}`);
    }
  }
  return frozen;
}

export function train(
  model: Model,
  samples: Sample[],
  options: TrainOptions,
): { finalLoss: number } {
  const { steps, batchSize, learningRate, seed, frozen } = options;
  if (samples.length === 0) throw new Error("no training samples");
  const rng = mulberry32(seed);
  const T = model.cfg.seqLen;

  const mBuf = new Map<string, Float64Array>();
  const vBuf = new Map<string, Float64Array>();
  for (const p of model.params) {
    mBuf.set(p.name, new Float64Array(p.data.length));
    vBuf.set(p.name, new Float64Array(p.data.length));
  }
  const beta1 = 0.9;
  const beta2 = 0.999;
  const eps = 1e-8;

  const tokens = new Int32Array(batchSize * T);
  const targets = new Int32Array(batchSize);
  let lastLoss = NaN;

  for (let step = 1; step <= steps; step++) {
    for (let b = 0; b < batchSize; b++) {
      const s = samples[randint(rng, samples.length)];
      tokens[b * T] = s.marker;
      tokens[b * T + 1] = s.key;
      targets[b] = s.answer;
    }
    model.zeroGrads();
    const { loss } = lossBatch(model, tokens, targets, batchSize);
    lastLoss = loss;

    const c1 = 1 - Math.pow(beta1, step);
    const c2 = 1 - Math.pow(beta2, step);
    for (const p of model.params) {
      if (frozen.has(p.name)) continue;
      const m = mBuf.get(p.name)!;
      const v = vBuf.get(p.name)!;
      const g = p.grad;
      const w = p.data;
      for (let i = 0; i < w.length; i++) {
        m[i] = beta1 * m[i] + (1 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1 - beta2) * g[i] * g[i];
        w[i] -= (learningRate * (m[i] / c1)) / (Math.sqrt(v[i] / c2) + eps);
      }
    }
    if (options.logEvery > 0 && step % options.logEvery === 0) {
      process.stderr.write(`step ${step}/${steps} loss ${loss.toFixed(4)}\n`);
    }
  }
  return { finalLoss: lastLoss };
}

/** Greedy accuracy of the model on a sample list (forward only). */
export function accuracy(model: Model, samples: Sample[]): number {
  if (samples.length === 0) return 0;
  const T = model.cfg.seqLen;
  let correct = 0;
  const tokens = new Int32Array(T);
  for (const s of samples) {
    tokens[0] = s.marker;
    tokens[1] = s.key;
    const { predictions } = lossBatch(
      model, tokens, Int32Array.from([s.answer]), 1, false,
    );
    if (predictions[0] === s.answer) correct++;
  }
  return correct / samples.length;
}
