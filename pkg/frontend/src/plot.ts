/**
 * Figure assembly: experiment CSV -> comparison SVG.
 *
 * Two quantities are supported: the mean distance to the true receiver
 * position per step/method, and the mean distance between the two returned
 * solutions (iterative least squares never returns two, so it is excluded
 * from the pair-distance figure).
 */

import { readFile, writeFile } from "node:fs/promises";

import { renderChart, Series } from "./chart.js";
import { ExperimentRow, parseExperimentCsv } from "./csv.js";

export type Quantity = "mean_error" | "pair_distance";

export interface PlotSpec {
  inputCsv: string;
  outputImage: string;
  quantity: Quantity;
  logScale: boolean;
}

const METHOD_COLORS: Record<string, string> = {
  ILS: "#e63946",
  SoS: "#4361ee",
  RSoS: "#2d6a4f",
};

const TITLES: Record<Quantity, string> = {
  mean_error: "Mean distance to the true position",
  pair_distance: "Mean distance between the two solutions",
};

function methodsFor(quantity: Quantity, rows: ExperimentRow[]): string[] {
  const seen: string[] = [];
  for (const row of rows) {
    if (quantity === "pair_distance" && row.method === "ILS") continue;
    if (!seen.includes(row.method)) seen.push(row.method);
  }
  return seen;
}

export function buildSeries(rows: ExperimentRow[], quantity: Quantity): Series[] {
  return methodsFor(quantity, rows).map((method) => {
    const points = rows
      .filter((row) => row.method === method)
      .sort((a, b) => a.step - b.step)
      .map((row) => ({
        x: row.step,
        y: quantity === "mean_error" ? row.meanErrorKm : row.meanPairDistanceKm,
      }));
    return {
      label: method,
      color: METHOD_COLORS[method] ?? "#555",
      points,
    };
  });
}

export function renderFromCsvText(
  text: string,
  quantity: Quantity,
  logScale: boolean
): string {
  const rows = parseExperimentCsv(text);
  return renderChart({
    title: TITLES[quantity],
    xLabel: "path step",
    yLabel: quantity === "mean_error" ? "mean error (km)" : "pair distance (km)",
    logScale,
    series: buildSeries(rows, quantity),
  });
}

export async function renderPlot(spec: PlotSpec): Promise<void> {
  const text = await readFile(spec.inputCsv, "utf-8");
  const svg = renderFromCsvText(text, spec.quantity, spec.logScale);
  await writeFile(spec.outputImage, svg);
}
