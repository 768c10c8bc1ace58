#!/usr/bin/env node
import { cmdTrain } from "./cli.js";

try {
  process.exit(cmdTrain(process.argv.slice(2)));
} catch (err) {
  process.stderr.write(`error: ${(err as Error).message}\n`);
  process.exit(1);
}
