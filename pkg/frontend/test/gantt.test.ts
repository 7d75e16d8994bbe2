import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import {
  changedFlights,
  FlightInfo,
  layoutTimeline,
  renderTimelineSvg,
} from "../src/gantt";
import { planResponseSchema, repairResponseSchema, TailPlan } from "../src/schemas";

const fixture = (name: string) =>
  JSON.parse(readFileSync(join(__dirname, "fixtures", name), "utf-8"));

const T1_FLIGHTS: FlightInfo[] = [
  { id: "f1", origin: "A", destination: "B", dep: 480, arr: 540 },
  { id: "f2", origin: "B", destination: "A", dep: 585, arr: 645 },
  { id: "f3", origin: "A", destination: "B", dep: 510, arr: 570 },
  { id: "f4", origin: "B", destination: "A", dep: 660, arr: 720 },
];

const nominal = planResponseSchema.parse(fixture("t1_plan.json"));
const repair = repairResponseSchema.parse(fixture("t1_delay_repair.json"));

describe("layoutTimeline", () => {
  it("lays out the recorded nominal plan: two lanes, two bars each", () => {
    const layout = layoutTimeline(nominal.plan as TailPlan, T1_FLIGHTS);
    expect(layout.lanes.map((l) => l.aircraft)).toEqual(["ac1", "ac2"]);
    expect(layout.lanes[0].bars.map((b) => b.flight)).toEqual(["f3", "f4"]);
    expect(layout.lanes[1].bars.map((b) => b.flight)).toEqual(["f1", "f2"]);
    expect(layout.cancelled).toEqual([]);
    expect(layout.minTime).toBe(480);
    expect(layout.maxTime).toBe(720);
    expect(layout.empty).toBe(false);
    const f1 = layout.lanes[1].bars[0];
    expect(f1.label).toBe("f1 A→B");
    expect(f1.highlighted).toBe(false);
  });

  it("flags exactly the reassigned flight for the recorded repair", () => {
    expect([...changedFlights(repair.diff)]).toEqual(["f4"]);
    // routes after repair come from the repair's RouteChanged records
    const repairedPlan: TailPlan = {
      routes: { ac1: ["f3"], ac2: ["f1", "f4"] },
      uncovered: ["f2"],
    };
    const layout = layoutTimeline(repairedPlan, T1_FLIGHTS, repair.diff);
    const highlighted = layout.lanes
      .flatMap((l) => l.bars)
      .filter((b) => b.highlighted)
      .map((b) => b.flight);
    expect(highlighted).toEqual(["f4"]);
    expect(layout.cancelled).toEqual(["f2"]);
  });

  it("returns an empty layout for a plan with no routes", () => {
    const layout = layoutTimeline({ routes: {}, uncovered: [] }, T1_FLIGHTS);
    expect(layout.empty).toBe(true);
    expect(layout.lanes).toEqual([]);
  });
});

describe("renderTimelineSvg", () => {
  it("renders one rect per assigned flight with its id attached", () => {
    const svg = renderTimelineSvg(layoutTimeline(nominal.plan as TailPlan, T1_FLIGHTS));
    expect(svg.startsWith("<svg")).toBe(true);
    for (const fid of ["f1", "f2", "f3", "f4"]) {
      expect(svg).toContain(`data-flight="${fid}"`);
    }
    expect(svg).not.toContain("bar changed");
  });

  it("marks moved bars and lists cancelled flights", () => {
    const repairedPlan: TailPlan = {
      routes: { ac1: ["f3"], ac2: ["f1", "f4"] },
      uncovered: ["f2"],
    };
    const svg = renderTimelineSvg(
      layoutTimeline(repairedPlan, T1_FLIGHTS, repair.diff),
    );
    expect(svg).toContain('class="bar changed" data-flight="f4"');
    expect(svg).toContain('data-cancelled="f2"');
    expect(svg).toContain("Cancelled: f2");
  });

  it("shows an empty state instead of a zero-size chart", () => {
    const svg = renderTimelineSvg(layoutTimeline({ routes: {}, uncovered: [] }, []));
    expect(svg).toContain('class="empty-state"');
    expect(svg).toContain("No routes to display");
  });
});
