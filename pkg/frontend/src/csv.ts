/**
 * Parsing and validation of the experiment CSV.
 *
 * Expected header (exact order):
 *   step,method,mean_error_km,mean_pair_distance_km,two_solution_trials,failed_trials,sigma,seed
 *
 * Numeric fields may be empty (no successful trials / no pair of
 * solutions); they parse to null.
 */

export const EXPECTED_HEADER = [
  "step",
  "method",
  "mean_error_km",
  "mean_pair_distance_km",
  "two_solution_trials",
  "failed_trials",
  "sigma",
  "seed",
] as const;

export interface ExperimentRow {
  step: number;
  method: string;
  meanErrorKm: number | null;
  meanPairDistanceKm: number | null;
  twoSolutionTrials: number;
  failedTrials: number;
  sigma: number;
  seed: number;
}

export class SchemaError extends Error {}

function requireNumber(field: string, raw: string, line: number): number {
  const value = Number(raw);
  if (raw.trim() === "" || Number.isNaN(value)) {
    throw new SchemaError(`line ${line}: field "${field}" is not a number: "${raw}"`);
  }
  return value;
}

function optionalNumber(field: string, raw: string, line: number): number | null {
  if (raw.trim() === "") return null;
  return requireNumber(field, raw, line);
}

/** Parse the full CSV text; throws SchemaError on any mismatch. */
export function parseExperimentCsv(text: string): ExperimentRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty file: missing header row");
  }
  const header = lines[0].split(",");
  if (header.join(",") !== EXPECTED_HEADER.join(",")) {
    throw new SchemaError(
      `unexpected header: got "${lines[0]}", want "${EXPECTED_HEADER.join(",")}"`
    );
  }
  const rows: ExperimentRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const fields = lines[i].split(",");
    if (fields.length !== EXPECTED_HEADER.length) {
      throw new SchemaError(
        `line ${i + 1}: expected ${EXPECTED_HEADER.length} fields, got ${fields.length}`
      );
    }
    rows.push({
      step: requireNumber("step", fields[0], i + 1),
      method: fields[1],
      meanErrorKm: optionalNumber("mean_error_km", fields[2], i + 1),
      meanPairDistanceKm: optionalNumber("mean_pair_distance_km", fields[3], i + 1),
      twoSolutionTrials: requireNumber("two_solution_trials", fields[4], i + 1),
      failedTrials: requireNumber("failed_trials", fields[5], i + 1),
      sigma: requireNumber("sigma", fields[6], i + 1),
      seed: requireNumber("seed", fields[7], i + 1),
    });
  }
  return rows;
}
