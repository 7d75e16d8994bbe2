/**
 * Workbench view state. One in-flight repair per plan is enforced here,
 * client-side, so a double-click never queues duplicate jobs.
 */
import { RepairResponse, RepairSpec } from "./schemas";
import { ScenarioDraft } from "./scenarioEditor";

export interface ViewState {
  instanceId: string | null;
  planId: string | null;
  scenarioDraft: ScenarioDraft;
  specDraft: RepairSpec;
  method: "exact" | "vns";
  /** plan ids with a repair job currently running */
  repairsInFlight: Set<string>;
  lastRepair: RepairResponse | null;
  comparisonOpen: boolean;
}

export function initialState(): ViewState {
  return {
    instanceId: null,
    planId: null,
    scenarioDraft: { id: "scenario-1", events: [] },
    specDraft: {},
    method: "exact",
    repairsInFlight: new Set(),
    lastRepair: null,
    comparisonOpen: false,
  };
}

/** Returns false when a repair for this plan is already running. */
export function beginRepair(state: ViewState, planId: string): boolean {
  if (state.repairsInFlight.has(planId)) {
    return false;
  }
  state.repairsInFlight.add(planId);
  return true;
}

export function finishRepair(
  state: ViewState,
  planId: string,
  result: RepairResponse | null,
): void {
  state.repairsInFlight.delete(planId);
  if (result) {
    state.lastRepair = result;
    state.comparisonOpen = true;
  }
}
