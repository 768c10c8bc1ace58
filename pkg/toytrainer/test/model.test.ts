import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { generateLog, writeLog } from "../dist/generate.js";
import { defaultConfig, lossBatch, Model } from "../dist/model.js";
import { readSafetensors, writeSafetensors } from "../dist/safetensors.js";
import { accuracy, train } from "../dist/train.js";
import { buildTask, evalSamples } from "../dist/task.js";

const tmp = () => mkdtempSync(join(tmpdir(), "toy-"));

describe("safetensors", () => {
  it("round-trips names, shapes and values", () => {
    const dir = tmp();
    const path = join(dir, "t.safetensors");
    const a = Float32Array.from([1.5, -2.25, 3.125, 0]);
    const b = Float32Array.from([42]);
    writeSafetensors(path, [
      { name: "x.weight", shape: [2, 2], data: a },
      { name: "y.bias", shape: [1], data: b },
    ]);
    const back = readSafetensors(path);
    expect([...back.keys()].sort()).toEqual(["x.weight", "y.bias"]);
    expect(back.get("x.weight")!.shape).toEqual([2, 2]);
    expect([...back.get("x.weight")!.data]).toEqual([...a]);
    expect([...back.get("y.bias")!.data]).toEqual([42]);
  });
});

describe("model", () => {
  it("has the layer-indexed tensor layout", () => {
    const model = new Model(defaultConfig(258));
    const names = model.params.map((p) => p.name);
    expect(names).toContain("blocks.3.attn.wq.weight");
    expect(names).toContain("blocks.0.mlp.w1.bias");
    expect(names).toContain("final_norm.weight");
    expect(names.length).toBe(44);
  });

  it("backward matches finite differences", () => {
    const cfg = {
      vocabSize: 13, dModel: 8, nHeads: 2, nLayers: 2, mlpHidden: 12, seqLen: 2,
    };
    const model = new Model(cfg);
    model.init(7);
    const tokens = Int32Array.from([0, 2, 1, 3, 0, 4]);
    const targets = Int32Array.from([5, 6, 7]);
    model.zeroGrads();
    lossBatch(model, tokens, targets, 3);
    const eps = 1e-5;
    for (const p of model.params) {
      for (let trial = 0; trial < 4; trial++) {
        const i = (trial * 131 + 17) % p.data.length;
        const orig = p.data[i];
        p.data[i] = orig + eps;
        const up = lossBatch(model, tokens, targets, 3, false).loss;
        p.data[i] = orig - eps;
        const down = lossBatch(model, tokens, targets, 3, false).loss;
        p.data[i] = orig;
        const fd = (up - down) / (2 * eps);
        const an = p.grad[i];
        const err = Math.abs(fd - an) / Math.max(1e-6, Math.abs(fd) + Math.abs(an));
        expect(err, `${p.name}[${i}]`).toBeLessThan(1e-3);
      }
    }
  });

  it("zero training steps leave the checkpoint bit-identical to init", () => {
    const dir = tmp();
    const task = buildTask({ nKeys: 24, nPool: 8, seed: 42, evalFraction: 0.5, baseBShare: 0.2 });
    const model = new Model(defaultConfig(task.vocabSize));
    model.init(42);
    const before = join(dir, "before.safetensors");
    model.save(before);
    train(model, evalSamples(task, "aa"), {
      steps: 0, batchSize: 4, learningRate: 1e-3, seed: 1, logEvery: 0,
      frozen: new Set(),
    });
    const after = join(dir, "after.safetensors");
    model.save(after);
    expect(readFileSync(after).equals(readFileSync(before))).toBe(true);
  });

  it("untrained model scores at chance level", () => {
    const task = buildTask();
    const model = new Model(defaultConfig(task.vocabSize));
    model.init(42);
    expect(accuracy(model, evalSamples(task, "aa"))).toBeLessThan(0.05);
    expect(accuracy(model, evalSamples(task, "bb"))).toBeLessThan(0.05);
  });

  it("greedy generation is deterministic for a fixed checkpoint", () => {
    const dir = tmp();
    const task = buildTask({ nKeys: 24, nPool: 8, seed: 42, evalFraction: 0.5, baseBShare: 0.2 });
    const model = new Model(defaultConfig(task.vocabSize));
    model.init(42);
    const a = join(dir, "a.jsonl");
    const b = join(dir, "b.jsonl");
    writeLog(a, generateLog(model, task, { language: "bb", split: "eval", modelTag: "t" }));
    writeLog(b, generateLog(model, task, { language: "bb", split: "eval", modelTag: "t" }));
    expect(readFileSync(a).equals(readFileSync(b))).toBe(true);
  });

  it("freeze plans keep frozen tensors bit-identical while others move", () => {
    const dir = tmp();
    const task = buildTask({ nKeys: 24, nPool: 8, seed: 42, evalFraction: 0.5, baseBShare: 0.2 });
    const model = new Model(defaultConfig(task.vocabSize));
    model.init(42);
    const basePath = join(dir, "base.safetensors");
    model.save(basePath);

    const frozen = new Set(
      model.params.map((p) => p.name).filter(
        (n) => !(n.startsWith("blocks.2.") || n.startsWith("blocks.3.")),
      ),
    );
    train(model, evalSamples(task, "aa"), {
      steps: 10, batchSize: 8, learningRate: 2e-3, seed: 5, logEvery: 0, frozen,
    });
    const tunedPath = join(dir, "tuned.safetensors");
    model.save(tunedPath);

    const before = readSafetensors(basePath);
    const after = readSafetensors(tunedPath);
    let changed = 0;
    for (const [name, entry] of after) {
      const prior = before.get(name)!;
      const identical = Buffer.from(entry.data.buffer).equals(
        Buffer.from(prior.data.buffer),
      );
      if (frozen.has(name)) expect(identical, name).toBe(true);
      else if (!identical) changed++;
    }
    expect(changed).toBeGreaterThan(0);
  });

  it("rejects plans that do not cover the manifest", () => {
    const dir = tmp();
    const model = new Model(defaultConfig(64));
    model.init(1);
    const planPath = join(dir, "plan.json");
    writeFileSync(planPath, JSON.stringify({ trainable: { "blocks.0.attn.wq.weight": true } }));
    return import("../dist/train.js").then(({ frozenFromPlan }) => {
      expect(() => frozenFromPlan(planPath, model)).toThrow(/missing tensor/);
    });
  });
});

describe("cross-component container round-trip", () => {
  it("a 50-tensor checkpoint reads back identically in the metrics toolkit", () => {
    const dir = tmp();
    const path = join(dir, "fifty.safetensors");
    return import("../dist/fixture.js").then(({ writeFixture }) => {
      const entries = writeFixture(path, 50, 42);
      expect(entries.length).toBe(50);

      const script = [
        "import json, sys",
        "import numpy as np",
        "from langadhere.ckptdiff import read_manifest",
        "path = sys.argv[1]",
        "out = {}",
        "with open(path, 'rb') as fh:",
        "    for m in read_manifest(path):",
        "        fh.seek(m.byte_offset)",
        "        raw = fh.read(m.byte_length)",
        "        values = np.frombuffer(raw, dtype='<f4').astype(float).tolist()",
        "        out[m.name] = {'shape': list(m.shape), 'dtype': m.dtype, 'values': values}",
        "print(json.dumps(out))",
      ].join("\n");
      const printed = execFileSync("python3", ["-c", script, path], {
        encoding: "utf-8",
      });
      const seen = JSON.parse(printed);
      expect(Object.keys(seen).length).toBe(50);
      for (const entry of entries) {
        const got = seen[entry.name];
        expect(got, entry.name).toBeDefined();
        expect(got.shape).toEqual(entry.shape);
        expect(got.dtype).toBe("F32");
        expect(got.values).toEqual([...entry.data]);
      }
    });
  }, 60_000);
});
