/**
 * plot --csv <file> --out <file> --quantity {mean_error|pair_distance} [--linear]
 *
 * Reads an experiment CSV and writes the comparison figure as SVG.
 * Exits 1 with a message on unknown flags, missing files, or a CSV that
 * does not match the experiment schema.
 */

import { renderPlot, Quantity } from "./plot.js";

function usage(): string {
  return "usage: plot --csv <file> --out <file> --quantity {mean_error|pair_distance} [--linear]";
}

export async function main(argv: string[]): Promise<number> {
  let csv: string | undefined;
  let out: string | undefined;
  let quantity: Quantity = "mean_error";
  let logScale = true;

  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    switch (arg) {
      case "--csv":
        csv = argv[++i];
        break;
      case "--out":
        out = argv[++i];
        break;
      case "--quantity": {
        const value = argv[++i];
        if (value !== "mean_error" && value !== "pair_distance") {
          console.error(`unknown quantity "${value}"\n${usage()}`);
          return 1;
        }
        quantity = value;
        break;
      }
      case "--linear":
        logScale = false;
        break;
      case "--help":
      case "-h":
        console.log(usage());
        return 0;
      default:
        console.error(`unknown argument "${arg}"\n${usage()}`);
        return 1;
    }
  }

  if (csv === undefined || out === undefined) {
    console.error(`--csv and --out are required\n${usage()}`);
    return 1;
  }

  try {
    await renderPlot({ inputCsv: csv, outputImage: out, quantity, logScale });
  } catch (error) {
    console.error(`plot failed: ${(error as Error).message}`);
    return 1;
  }
  console.log(`wrote ${out}`);
  return 0;
}

const isDirectRun =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (isDirectRun) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
