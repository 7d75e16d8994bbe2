/**
 * Route timeline: one lane per aircraft, flights as time bars. The layout
 * is computed as plain data so tests can assert on it; rendering to SVG is
 * a separate, dumb step.
 */
import { DiffRecord, TailPlan } from "./schemas";

export interface FlightInfo {
  id: string;
  origin: string;
  destination: string;
  dep: number;
  arr: number;
}

export interface TimelineBar {
  flight: string;
  dep: number;
  arr: number;
  label: string;
  /** set when a repair moved this flight onto this aircraft */
  highlighted: boolean;
}

export interface TimelineLane {
  aircraft: string;
  bars: TimelineBar[];
}

export interface TimelineLayout {
  lanes: TimelineLane[];
  /** flights nobody flies, flagged prominently */
  cancelled: string[];
  minTime: number;
  maxTime: number;
  empty: boolean;
}

/** Flights whose assignment the repair changed (reassigned or restored). */
export function changedFlights(diff: DiffRecord[]): Set<string> {
  const out = new Set<string>();
  for (const rec of diff) {
    if (rec.kind === "Reassigned" || rec.kind === "Restored") {
      const flight = rec.flight;
      if (typeof flight === "string") {
        out.add(flight);
      }
    }
  }
  return out;
}

export function layoutTimeline(
  plan: TailPlan,
  flights: FlightInfo[],
  diff: DiffRecord[] = [],
): TimelineLayout {
  const byId = new Map(flights.map((f) => [f.id, f]));
  const moved = changedFlights(diff);
  const lanes: TimelineLane[] = [];
  let minTime = Infinity;
  let maxTime = -Infinity;
  for (const aircraft of Object.keys(plan.routes).sort()) {
    const bars: TimelineBar[] = [];
    for (const fid of plan.routes[aircraft]) {
      const f = byId.get(fid);
      if (!f) {
        continue;
      }
      bars.push({
        flight: fid,
        dep: f.dep,
        arr: f.arr,
        label: `${fid} ${f.origin}→${f.destination}`,
        highlighted: moved.has(fid),
      });
      minTime = Math.min(minTime, f.dep);
      maxTime = Math.max(maxTime, f.arr);
    }
    lanes.push({ aircraft, bars });
  }
  const empty = lanes.every((l) => l.bars.length === 0);
  return {
    lanes,
    cancelled: [...plan.uncovered].sort(),
    minTime: empty ? 0 : minTime,
    maxTime: empty ? 0 : maxTime,
    empty,
  };
}

const LANE_HEIGHT = 34;
const BAR_HEIGHT = 22;
const LABEL_WIDTH = 70;
const CHART_WIDTH = 640;

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Render the layout to a standalone SVG string. */
export function renderTimelineSvg(layout: TimelineLayout): string {
  if (layout.empty) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${CHART_WIDTH}" height="40">` +
      `<text x="8" y="24" class="empty-state">No routes to display</text></svg>`;
  }
  const span = Math.max(1, layout.maxTime - layout.minTime);
  const scale = (CHART_WIDTH - LABEL_WIDTH - 10) / span;
  const x = (t: number) => LABEL_WIDTH + (t - layout.minTime) * scale;
  const rows = layout.lanes.length + (layout.cancelled.length > 0 ? 1 : 0);
  const height = rows * LANE_HEIGHT + 10;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${CHART_WIDTH}" height="${height}">`,
  ];
  layout.lanes.forEach((lane, i) => {
    const y = 5 + i * LANE_HEIGHT;
    parts.push(
      `<text x="4" y="${y + BAR_HEIGHT - 6}" class="lane-label">${esc(lane.aircraft)}</text>`,
    );
    for (const bar of lane.bars) {
      const cls = bar.highlighted ? "bar changed" : "bar";
      const w = Math.max(2, (bar.arr - bar.dep) * scale);
      parts.push(
        `<rect x="${x(bar.dep).toFixed(1)}" y="${y}" width="${w.toFixed(1)}" ` +
          `height="${BAR_HEIGHT}" class="${cls}" data-flight="${esc(bar.flight)}"/>`,
        `<text x="${(x(bar.dep) + 3).toFixed(1)}" y="${y + BAR_HEIGHT - 6}" ` +
          `class="bar-label">${esc(bar.label)}</text>`,
      );
    }
  });
  if (layout.cancelled.length > 0) {
    const y = 5 + layout.lanes.length * LANE_HEIGHT;
    parts.push(
      `<text x="4" y="${y + BAR_HEIGHT - 6}" class="cancelled-label" data-cancelled="` +
        `${esc(layout.cancelled.join(","))}">Cancelled: ${esc(layout.cancelled.join(", "))}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
