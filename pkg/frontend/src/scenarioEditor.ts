/**
 * Scenario editor logic: form drafts in, validated scenario JSON out.
 * Validation failures never produce a submittable scenario; callers render
 * the field-level messages inline.
 */
import { z } from "zod";
import {
  eventSchema,
  Scenario,
  ScenarioEvent,
  scenarioSchema,
} from "./schemas";

export type EventKind = ScenarioEvent["type"];

export const EVENT_KINDS: EventKind[] = [
  "flight_delay",
  "flight_cancellation",
  "aircraft_unavailability",
  "priority_change",
  "new_order",
];

/** Raw form values, everything still stringly typed. */
export interface EventDraft {
  kind: EventKind;
  fields: Record<string, string>;
}

export interface FieldError {
  field: string;
  message: string;
}

export type DraftResult =
  | { ok: true; event: ScenarioEvent }
  | { ok: false; errors: FieldError[] };

function num(fields: Record<string, string>, key: string): number {
  const raw = fields[key];
  return raw === undefined || raw.trim() === "" ? NaN : Number(raw);
}

function assemble(draft: EventDraft): unknown {
  const f = draft.fields;
  switch (draft.kind) {
    case "flight_delay":
      return {
        type: "flight_delay",
        flight: f.flight ?? "",
        dep: num(f, "dep"),
        arr: num(f, "arr"),
      };
    case "flight_cancellation":
      return { type: "flight_cancellation", flight: f.flight ?? "" };
    case "aircraft_unavailability":
      return {
        type: "aircraft_unavailability",
        aircraft: f.aircraft ?? "",
        from: num(f, "from"),
        to: num(f, "to"),
      };
    case "priority_change":
      return {
        type: "priority_change",
        customer: f.customer ?? "",
        priority: num(f, "priority"),
      };
    case "new_order":
      return {
        type: "new_order",
        order: {
          id: f.id ?? "",
          customer: f.customer ?? "",
          product: f.product ?? "",
          due: num(f, "due"),
          quantity: num(f, "quantity"),
          priority: num(f, "priority"),
        },
      };
  }
}

function zodErrors(err: z.ZodError): FieldError[] {
  return err.issues.map((iss) => ({
    field: iss.path.join(".") || "(form)",
    message: iss.message,
  }));
}

/** Validate one event form. Invalid drafts stay in the editor. */
export function buildEvent(draft: EventDraft): DraftResult {
  const candidate = assemble(draft);
  const parsed = eventSchema.safeParse(candidate);
  if (!parsed.success) {
    return { ok: false, errors: zodErrors(parsed.error) };
  }
  return { ok: true, event: parsed.data };
}

export interface ScenarioDraft {
  id: string;
  weight?: string;
  events: EventDraft[];
}

export type ScenarioResult =
  | { ok: true; scenario: Scenario }
  | { ok: false; errors: FieldError[] };

/** Validate the whole scenario; the result is exactly the service wire format. */
export function buildScenario(draft: ScenarioDraft): ScenarioResult {
  const errors: FieldError[] = [];
  const events: ScenarioEvent[] = [];
  draft.events.forEach((e, i) => {
    const res = buildEvent(e);
    if (res.ok) {
      events.push(res.event);
    } else {
      errors.push(
        ...res.errors.map((x) => ({ ...x, field: `events[${i}].${x.field}` })),
      );
    }
  });
  const candidate: Record<string, unknown> = { id: draft.id, events };
  if (draft.weight !== undefined && draft.weight.trim() !== "") {
    candidate.weight = Number(draft.weight);
  }
  const parsed = scenarioSchema.safeParse(candidate);
  if (!parsed.success) {
    errors.push(...zodErrors(parsed.error));
  }
  if (errors.length > 0 || !parsed.success) {
    return { ok: false, errors };
  }
  return { ok: true, scenario: parsed.data };
}
