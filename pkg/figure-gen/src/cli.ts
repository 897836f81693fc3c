#!/usr/bin/env node
/** `figure` command: one figure per invocation from run artifacts. */

import { realpathSync } from "node:fs";
import { pathToFileURL } from "node:url";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { FIGURE_KINDS, FigureKind, render } from "./figures.js";
import { SchemaError } from "./schema.js";

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName("figure")
    .usage("$0 --kind <kind> --in <csv...> [--report <json>] --out <path>")
    .option("kind", {
      choices: FIGURE_KINDS,
      demandOption: true,
      describe: "figure kind",
    })
    .option("in", {
      type: "string",
      array: true,
      demandOption: true,
      describe: "input trace CSV path(s)",
    })
    .option("report", {
      type: "string",
      describe: "result JSON with the condition audit (enables the decay envelope)",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "output SVG path",
    })
    .option("title", { type: "string", describe: "title override" })
    .option("label", {
      type: "string",
      array: true,
      describe: "series label override(s), one per input",
    })
    .strict()
    .help()
    .parseAsync();

  try {
    const result = await render({
      kind: args.kind as FigureKind,
      inputs: args.in as string[],
      report: args.report,
      output: args.out,
      title: args.title,
      labels: args.label as string[] | undefined,
    });
    for (const warning of result.warnings) {
      console.warn(`notice: ${warning}`);
    }
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

function invokedDirectly(): boolean {
  if (process.argv[1] === undefined) return false;
  try {
    return pathToFileURL(realpathSync(process.argv[1])).href === import.meta.url;
  } catch {
    return false;
  }
}

if (invokedDirectly()) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
