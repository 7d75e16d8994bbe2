import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import {
  diffView,
  explainInfeasible,
  kpiComparison,
  trajectorySeries,
} from "../src/repairPanel";
import { planResponseSchema, repairResponseSchema } from "../src/schemas";

const fixture = (name: string) =>
  JSON.parse(readFileSync(join(__dirname, "fixtures", name), "utf-8"));

const nominal = planResponseSchema.parse(fixture("t1_plan.json"));
const repair = repairResponseSchema.parse(fixture("t1_delay_repair.json"));
const noop = repairResponseSchema.parse(fixture("t1_noop_repair.json"));
const vns = repairResponseSchema.parse(fixture("t1_delay_repair_vns.json"));

describe("kpiComparison", () => {
  it("shows KPI values identical to the recorded service response", () => {
    const rows = kpiComparison(nominal, repair);
    const byName = Object.fromEntries(rows.map((r) => [r.name, r]));
    expect(byName.repair_objective.repaired).toBe(10052.0);
    expect(byName.deviation_count.repaired).toBe(2.0);
    expect(byName.violation_penalty_total.repaired).toBe(10000.0);
    expect(byName.route_cost).toEqual({
      name: "route_cost",
      nominal: 75.0,
      repaired: 50.0,
      changed: true,
    });
    expect(byName.flights_uncovered).toEqual({
      name: "flights_uncovered",
      nominal: 0.0,
      repaired: 1.0,
      changed: true,
    });
    expect(byName.aircraft_used.changed).toBe(false);
    // nominal-only and repair-only KPIs both appear, with the gap explicit
    expect(byName.original_objective.nominal).toBeNull();
    expect(byName.original_objective.repaired).toBe(50.0);
    expect(rows.map((r) => r.name)).toEqual([...rows.map((r) => r.name)].sort());
  });
});

describe("diffView", () => {
  it("summarizes the recorded repair without variable-level noise", () => {
    const view = diffView(repair.diff);
    expect(view.summary).toBe("Cancelled: 1, Reassigned: 1, RouteChanged: 2");
    expect(view.records.every((r) => r.kind !== "variable")).toBe(true);
    expect(view.records).toHaveLength(4);
  });

  it("reports a no-op repair as unchanged", () => {
    expect(diffView(noop.diff).summary).toBe("No changes");
    expect(noop.kpis.deviation_count).toBe(0.0);
    expect(noop.kpis.repair_objective).toBe(nominal.objective);
  });
});

describe("trajectorySeries", () => {
  it("is empty for an exact repair", () => {
    expect(trajectorySeries(repair.trajectory)).toEqual([]);
  });

  it("tracks the running best over the recorded search trajectory", () => {
    const series = trajectorySeries(vns.trajectory);
    expect(series).toHaveLength(vns.trajectory.length);
    expect(series.length).toBeGreaterThan(0);
    for (let i = 1; i < series.length; i++) {
      expect(series[i].bestObjective).toBeLessThanOrEqual(
        series[i - 1].bestObjective,
      );
    }
    const finalBest = series[series.length - 1].bestObjective;
    expect(finalBest).toBe(vns.kpis.repair_objective);
  });
});

describe("explainInfeasible", () => {
  it("extracts message and conflicts from a 422 body", () => {
    const view = explainInfeasible({
      detail: {
        message: "repair is infeasible",
        conflicts: ["TurnTimeViolation(ac2:f1->f2)"],
      },
    });
    expect(view.message).toBe("repair is infeasible");
    expect(view.conflicts).toEqual(["TurnTimeViolation(ac2:f1->f2)"]);
  });

  it("falls back gracefully on an unrecognized body", () => {
    const view = explainInfeasible("nope");
    expect(view.message).toBe("Repair infeasible");
    expect(view.conflicts).toEqual([]);
  });
});
