/**
 * toy-train / toy-generate command implementations. Flags are parsed by
 * hand to stay dependency-free; every run is fully determined by its flags.
 */

import { defaultConfig, Model } from "./model.js";
import { generateLog, writeLog } from "./generate.js";
import {
  baseSamples,
  buildTask,
  DEFAULT_TASK,
  evalSamples,
  mixedSamples,
  sftBSamples,
  writeCorpusJsonl,
  type ToyTask,
} from "./task.js";
import { accuracy, DEFAULT_TRAIN, frozenFromPlan, train } from "./train.js";

export function parseFlags(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument ${arg}`);
    const key = arg.slice(2);
    const next = argv[i + 1];
    if (next === undefined || next.startsWith("--")) {
      out.set(key, "true");
    } else {
      out.set(key, next);
      i++;
    }
  }
  return out;
}

function taskFromFlags(flags: Map<string, string>): ToyTask {
  return buildTask({
    ...DEFAULT_TASK,
    nKeys: Number(flags.get("facts") ?? DEFAULT_TASK.nKeys),
    seed: Number(flags.get("task-seed") ?? DEFAULT_TASK.seed),
  });
}

export function cmdTrain(argv: string[]): number {
  const flags = parseFlags(argv);
  const out = flags.get("out");
  if (!out) throw new Error("--out ckpt.safetensors is required");
  const task = taskFromFlags(flags);
  const data = flags.get("data") ?? "base";

  const model = new Model(defaultConfig(task.vocabSize));
  const seed = Number(flags.get("seed") ?? 42);
  const init = flags.get("init");
  if (init) model.load(init);
  else model.init(seed);

  const plan = flags.get("plan");
  const frozen = plan ? frozenFromPlan(plan, model) : new Set<string>();

  let samples;
  if (data === "base") samples = baseSamples(task);
  else if (data === "sft-b") samples = sftBSamples(task);
  else if (data === "mixed") samples = mixedSamples(task);
  else if (data === "eval-b") samples = evalSamples(task, "bb");
  else throw new Error(`unknown --data ${data} (base|sft-b|mixed|eval-b)`);

  const steps = Number(flags.get("steps") ?? DEFAULT_TRAIN.steps);
  const { finalLoss } = train(model, samples, {
    steps,
    batchSize: Number(flags.get("batch") ?? DEFAULT_TRAIN.batchSize),
    learningRate: Number(flags.get("lr") ?? DEFAULT_TRAIN.learningRate),
    seed,
    logEvery: Number(flags.get("log-every") ?? DEFAULT_TRAIN.logEvery),
    frozen,
  });
  model.save(out);

  const corpusOut = flags.get("corpus-out");
  if (corpusOut) writeCorpusJsonl(task, corpusOut);

  const evalAccA = accuracy(model, evalSamples(task, "aa"));
  const evalAccB = accuracy(model, evalSamples(task, "bb"));
  process.stderr.write(
    `trained ${steps} steps on ${samples.length} ${data} samples ` +
      `(${frozen.size} frozen tensors), loss ${finalLoss.toFixed(4)}, ` +
      `eval greedy acc aa=${evalAccA.toFixed(3)} bb=${evalAccB.toFixed(3)}\n`,
  );
  return 0;
}

export function cmdGenerate(argv: string[]): number {
  const flags = parseFlags(argv);
  const ckpt = flags.get("ckpt");
  const out = flags.get("out");
  if (!ckpt || !out) throw new Error("--ckpt and --out are required");
  const task = taskFromFlags(flags);
  const model = new Model(defaultConfig(task.vocabSize));
  model.load(ckpt);
  const lines = generateLog(model, task, {
    language: (flags.get("language") ?? "bb") as "aa" | "bb" | "both",
    split: (flags.get("split") ?? "eval") as "eval" | "train",
    modelTag: flags.get("model-tag") ?? "toy",
  });
  writeLog(out, lines);
  process.stderr.write(`wrote ${lines.length} generations to ${out}\n`);
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "train") return cmdTrain(rest);
    if (command === "generate") return cmdGenerate(rest);
    throw new Error(`usage: toytrainer <train|generate> --flags`);
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}
