#!/usr/bin/env node
import { cmdGenerate } from "./cli.js";

try {
  process.exit(cmdGenerate(process.argv.slice(2)));
} catch (err) {
  process.stderr.write(`error: ${(err as Error).message}\n`);
  process.exit(1);
}
