import type { IterationEstimate } from "./api.js";

/**
 * SVG chart of the per-iteration estimate trajectory: the point estimate g as
 * a line, wrapped in ±1·sqrt(var) and ±2·sqrt(var) bands.
 *
 * All numbers plotted come straight from the service's estimate payload; the
 * only arithmetic here is the square root that turns a variance into a band
 * half-width for display, and the linear mapping onto pixels.
 */

export const CHART = {
  width: 640,
  height: 320,
  margin: { top: 16, right: 16, bottom: 30, left: 46 },
} as const;

const SVG_NS = "http://www.w3.org/2000/svg";

function plotWidth(): number {
  return CHART.width - CHART.margin.left - CHART.margin.right;
}

function plotHeight(): number {
  return CHART.height - CHART.margin.top - CHART.margin.bottom;
}

/** Horizontal pixel for point `index` out of `count` equally spaced points. */
export function xPosition(index: number, count: number): number {
  if (count <= 1) return CHART.margin.left + plotWidth() / 2;
  return CHART.margin.left + (plotWidth() * index) / (count - 1);
}

/** Vertical pixel for a value on the fixed [0, 1] score axis, clamped. */
export function yPosition(value: number): number {
  const clamped = Math.min(1, Math.max(0, value));
  return CHART.margin.top + plotHeight() * (1 - clamped);
}

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

function bandPolygon(rows: IterationEstimate[], sigmas: number): string {
  const upper = rows.map(
    (row, k) =>
      `${xPosition(k, rows.length)},${yPosition(row.g + sigmas * Math.sqrt(row.var))}`,
  );
  const lower = rows
    .slice()
    .reverse()
    .map(
      (row, back) =>
        `${xPosition(rows.length - 1 - back, rows.length)},${yPosition(
          row.g - sigmas * Math.sqrt(row.var),
        )}`,
    );
  return [...upper, ...lower].join(" ");
}

/** Build the chart for a trajectory; an empty trajectory renders a notice. */
export function estimateChart(rows: IterationEstimate[]): SVGSVGElement {
  const svg = svgElement("svg", {
    viewBox: `0 0 ${CHART.width} ${CHART.height}`,
    class: "estimate-chart",
    role: "img",
    "aria-label": "estimate trajectory",
  });

  for (const tick of [0, 0.25, 0.5, 0.75, 1]) {
    const y = yPosition(tick);
    svg.append(
      svgElement("line", {
        x1: String(CHART.margin.left),
        x2: String(CHART.width - CHART.margin.right),
        y1: String(y),
        y2: String(y),
        class: "grid-line",
      }),
    );
    const label = svgElement("text", {
      x: String(CHART.margin.left - 8),
      y: String(y + 4),
      class: "tick-label",
      "text-anchor": "end",
    });
    label.textContent = tick.toFixed(2);
    svg.append(label);
  }

  if (rows.length === 0) {
    svg.classList.add("empty");
    const note = svgElement("text", {
      x: String(CHART.width / 2),
      y: String(CHART.height / 2),
      class: "empty-note",
      "text-anchor": "middle",
    });
    note.textContent = "no estimate yet — submit the first batch";
    svg.append(note);
    return svg;
  }

  svg.append(
    svgElement("polygon", {
      points: bandPolygon(rows, 2),
      class: "band band-two-sigma",
      "data-band": "2",
    }),
    svgElement("polygon", {
      points: bandPolygon(rows, 1),
      class: "band band-one-sigma",
      "data-band": "1",
    }),
    svgElement("polyline", {
      points: rows
        .map((row, k) => `${xPosition(k, rows.length)},${yPosition(row.g)}`)
        .join(" "),
      class: "trend",
    }),
  );

  rows.forEach((row, k) => {
    svg.append(
      svgElement("circle", {
        cx: String(xPosition(k, rows.length)),
        cy: String(yPosition(row.g)),
        r: "4",
        class: "point",
        "data-iteration": String(row.i),
        "data-g": String(row.g),
        "data-var": String(row.var),
      }),
    );
    const label = svgElement("text", {
      x: String(xPosition(k, rows.length)),
      y: String(CHART.height - 8),
      class: "tick-label",
      "text-anchor": "middle",
    });
    label.textContent = String(row.i);
    svg.append(label);
  });

  return svg;
}
