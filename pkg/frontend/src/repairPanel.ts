/**
 * Repair panel view models. Every number shown comes straight from a
 * service response field; this module only arranges, never computes.
 */
import {
  DiffRecord,
  PlanResponse,
  RepairResponse,
  TrajectoryEntry,
  infeasibleDetailSchema,
} from "./schemas";

export interface KpiRow {
  name: string;
  nominal: number | null;
  repaired: number | null;
  changed: boolean;
}

/** Side-by-side KPI table, nominal vs repaired, sorted by name. */
export function kpiComparison(
  nominal: PlanResponse,
  repair: RepairResponse,
): KpiRow[] {
  const names = new Set([
    ...Object.keys(nominal.kpis),
    ...Object.keys(repair.kpis),
  ]);
  return [...names].sort().map((name) => {
    const a = name in nominal.kpis ? nominal.kpis[name] : null;
    const b = name in repair.kpis ? repair.kpis[name] : null;
    return { name, nominal: a, repaired: b, changed: a !== b };
  });
}

export interface DiffView {
  records: DiffRecord[];
  summary: string;
}

/** Human-readable diff; variable-level records are folded away by default. */
export function diffView(diff: DiffRecord[]): DiffView {
  const records = diff.filter((r) => r.kind !== "variable");
  if (records.length === 0) {
    return { records, summary: "No changes" };
  }
  const counts = new Map<string, number>();
  for (const r of records) {
    counts.set(r.kind, (counts.get(r.kind) ?? 0) + 1);
  }
  const summary = [...counts.entries()]
    .sort()
    .map(([kind, n]) => `${kind}: ${n}`)
    .join(", ");
  return { records, summary };
}

export interface TrajectoryPoint {
  iteration: number;
  bestObjective: number;
  accepted: boolean;
}

/** Running-best series for the progress chart. */
export function trajectorySeries(trajectory: TrajectoryEntry[]): TrajectoryPoint[] {
  let best = Infinity;
  return trajectory.map((e) => {
    if (e.accepted) {
      best = Math.min(best, e.objective);
    }
    return { iteration: e.iteration, bestObjective: best, accepted: e.accepted };
  });
}

export interface InfeasibleView {
  message: string;
  conflicts: string[];
}

/** Explanation panel for a 422 from GET /repairs/{id}. */
export function explainInfeasible(body: unknown): InfeasibleView {
  const parsed = infeasibleDetailSchema.safeParse(body);
  if (parsed.success) {
    return {
      message: parsed.data.detail.message,
      conflicts: parsed.data.detail.conflicts,
    };
  }
  return { message: "Repair infeasible", conflicts: [] };
}
