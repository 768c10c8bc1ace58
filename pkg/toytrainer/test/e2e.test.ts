/**
 * End-to-end partial-training reproduction, verified through the metrics
 * toolkit's CLI over the shared file formats only: corpus + generation logs
 * for adherence numbers, checkpoints for the freeze-fidelity diff.
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { cmdGenerate, cmdTrain } from "../dist/cli.js";

const PRIMARY = ["-m", "langadhere.cli"];

function primary(args: string[]): string {
  return execFileSync("python3", [...PRIMARY, ...args], { encoding: "utf-8" });
}

function adherence(dir: string, corpus: string, log: string, tag: string) {
  const out = join(dir, `coco_${tag}`);
  primary([
    "cococola",
    "--corpus", corpus,
    "--log", log,
    "--language", "bb",
    "--reference", "aa",
    "--out", out,
  ]);
  const payload = JSON.parse(
    readFileSync(join(out, "cococola_bb.json"), "utf-8"),
  );
  expect(payload.length).toBe(1);
  return payload[0] as {
    ratio_simplified: number | null;
    ratio_general: number | null;
    cumulative_accuracy: number;
    counts: Record<string, number>;
  };
}

describe("partial-training reproduction via the metrics toolkit", () => {
  it(
    "final-layer partial training restores language adherence",
    () => {
      const dir = mkdtempSync(join(tmpdir(), "toy-e2e-"));
      const corpus = join(dir, "toy_corpus.jsonl");
      const base = join(dir, "base.safetensors");
      const partial = join(dir, "partial.safetensors");
      const fullb = join(dir, "fullb.safetensors");

      // base model: language-A dominated mixture, writes the corpus too
      expect(
        cmdTrain([
          "--out", base, "--data", "base", "--steps", "400",
          "--seed", "42", "--corpus-out", corpus, "--log-every", "0",
        ]),
      ).toBe(0);

      // freeze plan from the metrics toolkit: final 2 of 4 layers
      const planPath = join(dir, "plan.json");
      primary([
        "plan",
        "--manifest", base,
        "--scheme", "toy",
        "--mode", "final-k",
        "--k", "2",
        "--out", planPath,
      ]);
      const plan = JSON.parse(readFileSync(planPath, "utf-8"));
      expect(plan.notes.trainable_layers).toEqual([2, 3]);

      // partial: adapt the base to language B under the freeze plan
      expect(
        cmdTrain([
          "--out", partial, "--data", "sft-b", "--steps", "300",
          "--seed", "43", "--init", base, "--plan", planPath,
          "--log-every", "0",
        ]),
      ).toBe(0);

      // fully B-tuned comparison model
      expect(
        cmdTrain([
          "--out", fullb, "--data", "sft-b", "--steps", "300",
          "--seed", "44", "--init", base, "--log-every", "0",
        ]),
      ).toBe(0);

      const logs: Record<string, string> = {};
      for (const [tag, ckpt] of [
        ["base", base],
        ["partial", partial],
        ["fullb", fullb],
      ] as const) {
        const log = join(dir, `gens_${tag}.jsonl`);
        expect(
          cmdGenerate([
            "--ckpt", ckpt, "--out", log, "--language", "bb",
            "--split", "eval", "--model-tag", tag,
          ]),
        ).toBe(0);
        logs[tag] = log;
      }

      const baseReport = adherence(dir, corpus, logs.base, "base");
      const partialReport = adherence(dir, corpus, logs.partial, "partial");
      const fullReport = adherence(dir, corpus, logs.fullb, "fullb");

      // (a) adherence gain of partial training over the A-biased base
      expect(baseReport.ratio_simplified).not.toBeNull();
      expect(partialReport.ratio_simplified).not.toBeNull();
      const gain =
        (partialReport.ratio_simplified as number) -
        (baseReport.ratio_simplified as number);
      expect(gain).toBeGreaterThanOrEqual(0.3);

      // (c) cumulative accuracy within 10 points of the fully tuned model
      const accGap = Math.abs(
        partialReport.cumulative_accuracy - fullReport.cumulative_accuracy,
      );
      expect(accGap).toBeLessThanOrEqual(0.10);

      // (b) zero update magnitude on every frozen tensor, nonzero on the
      // unfrozen final layers
      const diffOut = join(dir, "diff");
      primary([
        "diff", "--base", base, "--tuned", partial,
        "--scheme", "toy", "--out", diffOut,
      ]);
      const entries = readFileSync(join(diffOut, "diff_entries.csv"), "utf-8")
        .trim()
        .split("\n")
        .slice(1)
        .map((line) => {
          const [name, layer, kind, delta, n] = line.split(",");
          return { name, layer, kind, delta: Number(delta), n: Number(n) };
        });
      expect(entries.length).toBe(44);
      let unfrozenMoved = 0;
      for (const e of entries) {
        const trainable = plan.trainable[e.name];
        expect(trainable, e.name).toBeDefined();
        if (!trainable) {
          expect(e.delta, e.name).toBe(0);
        } else if (e.delta > 0) {
          unfrozenMoved++;
        }
      }
      expect(unfrozenMoved).toBeGreaterThan(0);

      process.stderr.write(
        `e2e: base ratio ${baseReport.ratio_simplified}, partial ` +
          `${partialReport.ratio_simplified}, full ` +
          `${fullReport.ratio_simplified}; acc partial ` +
          `${partialReport.cumulative_accuracy} vs full ` +
          `${fullReport.cumulative_accuracy}\n`,
      );
    },
    600_000,
  );

  it(
    "a model trained on both languages clears 0.9 cumulative accuracy",
    () => {
      const dir = mkdtempSync(join(tmpdir(), "toy-mixed-"));
      const corpus = join(dir, "toy_corpus.jsonl");
      const ckpt = join(dir, "mixed.safetensors");
      expect(
        cmdTrain([
          "--out", ckpt, "--data", "mixed", "--steps", "400",
          "--seed", "42", "--corpus-out", corpus, "--log-every", "0",
        ]),
      ).toBe(0);
      const log = join(dir, "gens.jsonl");
      expect(
        cmdGenerate([
          "--ckpt", ckpt, "--out", log, "--language", "bb",
          "--split", "eval", "--model-tag", "mixed",
        ]),
      ).toBe(0);
      const report = adherence(dir, corpus, log, "mixed");
      expect(report.cumulative_accuracy).toBeGreaterThan(0.9);
    },
    600_000,
  );
});
