/**
 * Two-"language" lookup task. Each key token maps to one of a small pool of
 * answer concepts; every concept has a language-A and a language-B surface
 * token, and the two always differ, so a correct answer identifies its
 * output language. Evaluation keys are never part of base training in
 * language B: a model only ever learns their answers through language A and
 * must transfer.
 */

import { writeFileSync } from "node:fs";
import { mulberry32, randint, shuffle } from "./rng.js";

export interface TaskConfig {
  nKeys: number; // total facts
  nPool: number; // distinct answer concepts
  seed: number;
  evalFraction: number;
  baseBShare: number; // fraction of *train* keys also seen as B prompts in base training
}

export const DEFAULT_TASK: TaskConfig = {
  nKeys: 192,
  nPool: 32,
  seed: 42,
  evalFraction: 0.5,
  baseBShare: 0.15,
};

export interface Sample {
  marker: number; // token id of the language marker
  key: number; // token id of the key
  answer: number; // token id of the expected answer
  keyIndex: number;
}

export interface ToyTask {
  config: TaskConfig;
  vocabSize: number;
  tokens: string[]; // id -> surface string
  markerA: number;
  markerB: number;
  poolOf: number[]; // key index -> pool index
  trainKeys: number[];
  evalKeys: number[];
  baseBKeys: number[]; // train keys also shown as B prompts during base training
  keyToken(i: number): number;
  answerToken(pool: number, lang: "aa" | "bb"): number;
  sample(keyIndex: number, lang: "aa" | "bb"): Sample;
  questionId(keyIndex: number): string;
}

export function buildTask(config: TaskConfig = DEFAULT_TASK): ToyTask {
  const { nKeys, nPool, seed } = config;
  const rng = mulberry32(seed);

  const tokens: string[] = ["aa", "bb"];
  for (let i = 0; i < nKeys; i++) tokens.push(`k${String(i).padStart(3, "0")}`);
  for (let p = 0; p < nPool; p++) tokens.push(`a${String(p).padStart(2, "0")}`);
  for (let p = 0; p < nPool; p++) tokens.push(`b${String(p).padStart(2, "0")}`);

  const poolOf = Array.from({ length: nKeys }, () => randint(rng, nPool));

  const order = Array.from({ length: nKeys }, (_, i) => i);
  shuffle(rng, order);
  const nEval = Math.floor(nKeys * config.evalFraction);
  const evalKeys = order.slice(0, nEval).sort((a, b) => a - b);
  const trainKeys = order.slice(nEval).sort((a, b) => a - b);

  const baseB = trainKeys.slice();
  shuffle(rng, baseB);
  const baseBKeys = baseB
    .slice(0, Math.max(1, Math.round(trainKeys.length * config.baseBShare)))
    .sort((a, b) => a - b);

  const keyToken = (i: number) => 2 + i;
  const answerToken = (pool: number, lang: "aa" | "bb") =>
    2 + nKeys + (lang === "aa" ? pool : nPool + pool);

  return {
    config,
    vocabSize: tokens.length,
    tokens,
    markerA: 0,
    markerB: 1,
    poolOf,
    trainKeys,
    evalKeys,
    baseBKeys,
    keyToken,
    answerToken,
    sample(keyIndex, lang) {
      return {
        marker: lang === "aa" ? 0 : 1,
        key: keyToken(keyIndex),
        answer: answerToken(poolOf[keyIndex], lang),
        keyIndex,
      };
    },
    questionId(keyIndex) {
      return `k${String(keyIndex).padStart(4, "0")}`;
    },
  };
}

/** Base-training mixture: every key in language A plus a small B minority. */
export function baseSamples(task: ToyTask): Sample[] {
  const samples: Sample[] = [];
  for (let i = 0; i < task.config.nKeys; i++) samples.push(task.sample(i, "aa"));
  for (const i of task.baseBKeys) samples.push(task.sample(i, "bb"));
  return samples;
}

/** Language-B adaptation set: train keys only, never evaluation keys. */
export function sftBSamples(task: ToyTask): Sample[] {
  return task.trainKeys.map((i) => task.sample(i, "bb"));
}

/** Balanced mixture: every key in A plus every train key in B. */
export function mixedSamples(task: ToyTask): Sample[] {
  const samples: Sample[] = [];
  for (let i = 0; i < task.config.nKeys; i++) samples.push(task.sample(i, "aa"));
  for (const i of task.trainKeys) samples.push(task.sample(i, "bb"));
  return samples;
}

export function evalSamples(task: ToyTask, lang: "aa" | "bb"): Sample[] {
  return task.evalKeys.map((i) => task.sample(i, lang));
}

/**
 * Parallel-corpus JSONL rows for the metrics toolkit: one row per
 * (key, language), questions are the literal prompts, answers the surface
 * answer tokens.
 */
export function writeCorpusJsonl(task: ToyTask, path: string): number {
  const lines: string[] = [];
  for (let i = 0; i < task.config.nKeys; i++) {
    const split = task.evalKeys.includes(i) ? "test" : "train";
    for (const lang of ["aa", "bb"] as const) {
      const s = task.sample(i, lang);
      lines.push(
        JSON.stringify({
          question_id: task.questionId(i),
          language: lang,
          split,
          question: `${lang} ${task.tokens[s.key]}`,
          answer: task.tokens[s.answer],
        }),
      );
    }
  }
  writeFileSync(path, lines.join("\n") + "\n");
  return lines.length;
}
