/**
 * Minimal deterministic SVG line chart.
 *
 * Pure string assembly: the same series always produce byte-identical
 * output, which keeps rendered figures reproducible and diffable.
 */

export interface Series {
  label: string;
  color: string;
  /** One point per step; null marks a gap (no data at that step). */
  points: Array<{ x: number; y: number | null }>;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logScale: boolean;
  series: Series[];
}

const WIDTH = 760;
const HEIGHT = 480;
const MARGIN = { top: 48, right: 24, bottom: 56, left: 76 };

/** Values at or below this are clamped before taking logs. */
export const LOG_FLOOR = 1e-12;

const fmt = (value: number): string => {
  const rounded = Number(value.toFixed(2));
  return Object.is(rounded, -0) ? "0" : String(rounded);
};

function niceTicks(min: number, max: number, count: number): number[] {
  if (!(max > min)) return [min];
  const step = (max - min) / count;
  const magnitude = Math.pow(10, Math.floor(Math.log10(step)));
  const residual = step / magnitude;
  const nice = residual >= 5 ? 10 : residual >= 2 ? 5 : residual >= 1 ? 2 : 1;
  const tick = nice * magnitude;
  const start = Math.ceil(min / tick) * tick;
  const ticks: number[] = [];
  for (let v = start; v <= max + 1e-12 * tick; v += tick) ticks.push(v);
  return ticks;
}

function logTicks(min: number, max: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(min); e <= Math.floor(max); e++) ticks.push(e);
  if (ticks.length === 0) ticks.push(Math.floor(min), Math.ceil(max));
  // thin out so labels stay readable
  const stride = Math.max(1, Math.ceil(ticks.length / 10));
  return ticks.filter((_, i) => i % stride === 0);
}

function escapeText(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderChart(options: ChartOptions): string {
  const innerWidth = WIDTH - MARGIN.left - MARGIN.right;
  const innerHeight = HEIGHT - MARGIN.top - MARGIN.bottom;

  const xs: number[] = [];
  const ys: number[] = [];
  for (const series of options.series) {
    for (const point of series.points) {
      if (point.y === null) continue;
      xs.push(point.x);
      ys.push(options.logScale ? Math.log10(Math.max(point.y, LOG_FLOOR)) : point.y);
    }
  }
  const hasData = xs.length > 0;
  const xMin = hasData ? Math.min(...xs) : 0;
  const xMax = hasData ? Math.max(...xs) : 1;
  let yMin = hasData ? Math.min(...ys) : 0;
  let yMax = hasData ? Math.max(...ys) : 1;
  if (yMax === yMin) {
    yMax = yMin + 1;
    yMin = yMin - 1;
  }

  const xPos = (x: number): number =>
    MARGIN.left + ((x - xMin) / Math.max(xMax - xMin, 1e-300)) * innerWidth;
  const yPos = (y: number): number =>
    MARGIN.top + (1 - (y - yMin) / (yMax - yMin)) * innerHeight;
  const yValue = (y: number): number =>
    options.logScale ? Math.log10(Math.max(y, LOG_FLOOR)) : y;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">`
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">${escapeText(options.title)}</text>`
  );

  // axes frame
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${innerWidth}" height="${innerHeight}" fill="none" stroke="#333" stroke-width="1"/>`
  );

  // y ticks and grid
  const yTicks = options.logScale ? logTicks(yMin, yMax) : niceTicks(yMin, yMax, 6);
  for (const tick of yTicks) {
    if (tick < yMin - 1e-9 || tick > yMax + 1e-9) continue;
    const y = yPos(tick);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + innerWidth}" y2="${fmt(y)}" stroke="#ddd" stroke-width="0.5"/>`
    );
    const label = options.logScale ? `1e${tick}` : fmt(tick);
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" font-size="11">${label}</text>`
    );
  }

  // x ticks
  for (const tick of niceTicks(xMin, xMax, 8)) {
    const x = xPos(tick);
    parts.push(
      `<line x1="${fmt(x)}" y1="${MARGIN.top + innerHeight}" x2="${fmt(x)}" y2="${MARGIN.top + innerHeight + 5}" stroke="#333" stroke-width="1"/>`
    );
    parts.push(
      `<text x="${fmt(x)}" y="${MARGIN.top + innerHeight + 20}" text-anchor="middle" font-size="11">${fmt(tick)}</text>`
    );
  }

  parts.push(
    `<text x="${MARGIN.left + innerWidth / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-size="13">${escapeText(options.xLabel)}</text>`
  );
  parts.push(
    `<text x="20" y="${MARGIN.top + innerHeight / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 20 ${MARGIN.top + innerHeight / 2})">${escapeText(options.yLabel)}</text>`
  );

  // data: split each series into contiguous runs around gaps
  for (const series of options.series) {
    let run: string[] = [];
    const flush = () => {
      if (run.length === 1) {
        parts.push(
          `<circle cx="${run[0].split(",")[0]}" cy="${run[0].split(",")[1]}" r="2.5" fill="${series.color}"/>`
        );
      } else if (run.length > 1) {
        parts.push(
          `<polyline points="${run.join(" ")}" fill="none" stroke="${series.color}" stroke-width="1.6"/>`
        );
      }
      run = [];
    };
    for (const point of series.points) {
      if (point.y === null) {
        flush();
        continue;
      }
      run.push(`${fmt(xPos(point.x))},${fmt(yPos(yValue(point.y)))}`);
    }
    flush();
  }

  // legend
  options.series.forEach((series, index) => {
    const y = MARGIN.top + 14 + 18 * index;
    const x = MARGIN.left + innerWidth - 118;
    parts.push(
      `<line x1="${x}" y1="${y}" x2="${x + 26}" y2="${y}" stroke="${series.color}" stroke-width="2"/>`
    );
    parts.push(
      `<text x="${x + 32}" y="${y + 4}" font-size="12">${escapeText(series.label)}</text>`
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
