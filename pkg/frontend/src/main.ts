/**
 * Browser entry point: wires the editor, repair panel and plan views to the
 * service. All interesting logic lives in the imported modules; this file
 * is DOM plumbing only.
 */
import { ApiClient, ServiceError } from "./api";
import { FlightInfo, layoutTimeline, renderTimelineSvg } from "./gantt";
import { buildProductionTable } from "./productionTable";
import {
  diffView,
  explainInfeasible,
  kpiComparison,
  trajectorySeries,
} from "./repairPanel";
import { buildScenario, EventDraft, EVENT_KINDS } from "./scenarioEditor";
import { PlanResponse, ProductionPlan, TailPlan } from "./schemas";
import { beginRepair, finishRepair, initialState } from "./state";

const state = initialState();
const api = new ApiClient(window.location.origin, { pollIntervalMs: 1000 });

const $ = (id: string) => document.getElementById(id) as HTMLElement;
let currentInstance: { flights?: FlightInfo[] } = {};
let currentPlan: PlanResponse | null = null;

function setStatus(text: string) {
  $("status").textContent = text;
}

function renderPlan(plan: PlanResponse) {
  currentPlan = plan;
  $("objective").textContent = `objective ${plan.objective}`;
  if (plan.domain === "tail") {
    const layout = layoutTimeline(
      plan.plan as TailPlan,
      currentInstance.flights ?? [],
      state.lastRepair?.diff ?? [],
    );
    $("plan-view").innerHTML = renderTimelineSvg(layout);
  } else {
    const table = buildProductionTable(plan.plan as ProductionPlan);
    $("plan-view").innerHTML =
      "<table><tr><th>product</th><th>period</th><th>produced</th>" +
      "<th>shipped</th><th>held</th></tr>" +
      table.rows
        .map(
          (r) =>
            `<tr><td>${r.product}</td><td>${r.period}</td><td>${r.produced}` +
            `</td><td>${r.shipped}</td><td>${r.held}</td></tr>`,
        )
        .join("") +
      "</table>";
  }
}

async function onUpload(file: File) {
  const doc = JSON.parse(await file.text());
  currentInstance = doc;
  const { id } = await api.uploadInstance(doc);
  state.instanceId = id;
  setStatus(`instance ${id} uploaded; planning...`);
  const planId = await api.waitForJob(await api.startPlan(id));
  state.planId = planId;
  renderPlan(await api.getPlan(planId));
  setStatus(`plan ${planId} ready`);
}

function readEventDrafts(): EventDraft[] {
  const out: EventDraft[] = [];
  document.querySelectorAll<HTMLElement>(".event-draft").forEach((el) => {
    const kind = (el.querySelector(".kind") as HTMLSelectElement)
      .value as EventDraft["kind"];
    const fields: Record<string, string> = {};
    el.querySelectorAll<HTMLInputElement>("input[data-field]").forEach((inp) => {
      fields[inp.dataset.field as string] = inp.value;
    });
    out.push({ kind, fields });
  });
  return out;
}

async function onRepair() {
  if (!state.planId) {
    return;
  }
  const res = buildScenario({
    id: (($("scenario-id") as HTMLInputElement).value || "scenario-1"),
    events: readEventDrafts(),
  });
  if (!res.ok) {
    $("editor-errors").textContent = res.errors
      .map((e) => `${e.field}: ${e.message}`)
      .join("; ");
    return;
  }
  $("editor-errors").textContent = "";
  if (!beginRepair(state, state.planId)) {
    setStatus("a repair for this plan is already running");
    return;
  }
  try {
    const jobId = await api.startRepair(
      state.planId,
      res.scenario,
      state.specDraft,
      state.method,
    );
    const repairId = await api.waitForJob(jobId);
    const repair = await api.getRepair(repairId);
    finishRepair(state, state.planId, repair);
    const dv = diffView(repair.diff);
    $("diff-view").textContent = dv.summary;
    if (currentPlan) {
      const rows = kpiComparison(currentPlan, repair);
      $("kpi-view").innerHTML =
        "<table><tr><th>kpi</th><th>nominal</th><th>repaired</th></tr>" +
        rows
          .map(
            (r) =>
              `<tr class="${r.changed ? "changed" : ""}"><td>${r.name}</td>` +
              `<td>${r.nominal ?? ""}</td><td>${r.repaired ?? ""}</td></tr>`,
          )
          .join("") +
        "</table>";
    }
    const series = trajectorySeries(repair.trajectory);
    $("trajectory-view").textContent = series.length
      ? series.map((p) => `${p.iteration}:${p.bestObjective}`).join(" ")
      : "(exact repair, no trajectory)";
    setStatus(`repair ${repairId} done (${repair.status})`);
  } catch (err) {
    finishRepair(state, state.planId, null);
    if (err instanceof ServiceError && err.status === 422) {
      const view = explainInfeasible(err.body);
      $("diff-view").textContent = `${view.message}: ${view.conflicts.join("; ")}`;
    } else {
      setStatus(String(err));
    }
  }
}

export function mount(): void {
  const kinds = EVENT_KINDS.map((k) => `<option>${k}</option>`).join("");
  $("event-kinds").innerHTML = kinds;
  ($("file") as HTMLInputElement).addEventListener("change", (e) => {
    const f = (e.target as HTMLInputElement).files?.[0];
    if (f) {
      void onUpload(f);
    }
  });
  $("repair-btn").addEventListener("click", () => void onRepair());
}

if (typeof document !== "undefined" && document.getElementById("workbench")) {
  mount();
}
