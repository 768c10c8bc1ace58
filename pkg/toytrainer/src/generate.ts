/**
 * Greedy decoding (no sampling) over evaluation prompts, emitting the
 * generation-log JSONL the metrics toolkit reads: question_id,
 * input_language, model_tag, output.
 */

import { writeFileSync } from "node:fs";
import { greedyPredict, type Model } from "./model.js";
import type { ToyTask } from "./task.js";

export interface GenerateOptions {
  language: "aa" | "bb" | "both";
  split: "eval" | "train";
  modelTag: string;
}

export function generateLog(
  model: Model,
  task: ToyTask,
  options: GenerateOptions,
): string[] {
  const langs: ("aa" | "bb")[] =
    options.language === "both" ? ["aa", "bb"] : [options.language];
  const keys = options.split === "eval" ? task.evalKeys : task.trainKeys;
  const lines: string[] = [];
  for (const lang of langs) {
    for (const keyIndex of keys) {
      const s = task.sample(keyIndex, lang);
      const predicted = greedyPredict(model, s.marker, s.key);
      lines.push(
        JSON.stringify({
          question_id: task.questionId(keyIndex),
          input_language: lang,
          model_tag: options.modelTag,
          output: task.tokens[predicted] ?? `tok${predicted}`,
        }),
      );
    }
  }
  return lines;
}

export function writeLog(path: string, lines: string[]): void {
  writeFileSync(path, lines.join("\n") + "\n");
}
