/**
 * plot pulse|converge|compare --in <csv...> [--local <csv>] --out <svg>
 *      [--zoom LO HI]
 *
 * pulse     profile overlays (u and v panels); --local adds the dashed
 *           classical reference; --zoom switches to the window view
 * converge  log-log error plot of one convergence CSV
 * compare   v-profile overlay of two runs, full view plus zoom window
 */

import { writeFileSync } from "fs";

import { CsvError } from "./csv.js";
import { FigureKind, FigureSpec, render } from "./figures.js";

interface Args {
  command: string;
  inputs: string[];
  local?: string;
  out?: string;
  zoom?: [number, number];
}

function parseArgs(argv: string[]): Args {
  const [command, ...rest] = argv;
  if (!command) throw new Error("usage: plot pulse|converge|compare --in <csv...> --out <svg>");
  const args: Args = { command, inputs: [] };
  let i = 0;
  while (i < rest.length) {
    const flag = rest[i]!;
    if (flag === "--in") {
      i += 1;
      while (i < rest.length && !rest[i]!.startsWith("--")) {
        args.inputs.push(rest[i]!);
        i += 1;
      }
    } else if (flag === "--local") {
      args.local = rest[i + 1];
      i += 2;
    } else if (flag === "--out") {
      args.out = rest[i + 1];
      i += 2;
    } else if (flag === "--zoom") {
      args.zoom = [Number(rest[i + 1]), Number(rest[i + 2])];
      i += 3;
    } else {
      throw new Error(`unknown flag ${flag}`);
    }
  }
  return args;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  const kinds: Record<string, FigureKind> = {
    pulse: args.zoom ? "pulse_zoom" : "pulse_overlay",
    converge: "convergence_loglog",
    compare: "domain_compare",
  };
  const kind = kinds[args.command];
  if (!kind) {
    console.error(`unknown command '${args.command}' (pulse, converge, compare)`);
    return 2;
  }
  if (args.inputs.length === 0 || !args.out) {
    console.error("need --in <csv...> and --out <svg>");
    return 2;
  }
  const spec: FigureSpec = {
    kind,
    inputs: args.inputs,
    localInput: args.local,
    output: args.out,
    zoom: args.zoom,
  };
  try {
    writeFileSync(spec.output, render(spec));
  } catch (err) {
    if (err instanceof CsvError || err instanceof Error) {
      console.error(err.message);
      return 1;
    }
    throw err;
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
