/**
 * Wire-format schemas for the planning service. Everything the workbench
 * sends or renders is validated against these; the UI never invents fields
 * of its own.
 */
import { z } from "zod";

// -- scenario events -----------------------------------------------------

export const flightDelaySchema = z
  .object({
    type: z.literal("flight_delay"),
    flight: z.string().min(1),
    dep: z.number(),
    arr: z.number(),
  })
  .refine((e) => e.dep < e.arr, {
    message: "departure must be before arrival",
    path: ["arr"],
  });

export const flightCancellationSchema = z.object({
  type: z.literal("flight_cancellation"),
  flight: z.string().min(1),
});

export const aircraftUnavailabilitySchema = z
  .object({
    type: z.literal("aircraft_unavailability"),
    aircraft: z.string().min(1),
    from: z.number(),
    to: z.number(),
  })
  .refine((e) => e.from < e.to, {
    message: "window start must be before window end",
    path: ["to"],
  });

export const priorityChangeSchema = z.object({
  type: z.literal("priority_change"),
  customer: z.string().min(1),
  priority: z.number().int(),
});

export const newOrderSchema = z.object({
  type: z.literal("new_order"),
  order: z.object({
    id: z.string().min(1),
    customer: z.string().min(1),
    product: z.string().min(1),
    due: z.number().int().positive(),
    quantity: z.number().positive(),
    priority: z.number().int(),
  }),
});

export const eventSchema = z.discriminatedUnion("type", [
  flightDelaySchema,
  flightCancellationSchema,
  aircraftUnavailabilitySchema,
  priorityChangeSchema,
  newOrderSchema,
]);

export const scenarioSchema = z.object({
  id: z.string().min(1),
  events: z.array(eventSchema),
  weight: z.number().positive().optional(),
});

// -- repair spec ----------------------------------------------------------

export const repairSpecSchema = z.object({
  freeze: z
    .object({
      patterns: z.array(z.string()).optional(),
      freeze_horizon: z.number().optional(),
    })
    .optional(),
  relax: z
    .array(z.object({ pattern: z.string(), penalty: z.number().optional() }))
    .optional(),
  weights: z
    .object({
      w_cost: z.number().optional(),
      w_dev: z.number().optional(),
      w_dev_cont: z.number().optional(),
    })
    .optional(),
});

// -- service responses ----------------------------------------------------

export const tailPlanSchema = z.object({
  routes: z.record(z.string(), z.array(z.string())),
  uncovered: z.array(z.string()),
});

export const productionPlanSchema = z.object({
  production: z.record(z.string(), z.number()),
  shipments: z.record(z.string(), z.number()),
  inventory: z.record(z.string(), z.number()),
  deliveries: z.record(z.string(), z.number()),
  shortfalls: z.record(z.string(), z.number()),
});

export const planResponseSchema = z.object({
  id: z.string(),
  instance_id: z.string(),
  domain: z.enum(["tail", "production"]),
  objective: z.number(),
  kpis: z.record(z.string(), z.number()),
  plan: z.union([tailPlanSchema, productionPlanSchema]),
  values: z.record(z.string(), z.number()),
});

// diff records carry kind-specific extra fields; keep them all
export const diffRecordSchema = z.looseObject({ kind: z.string() });

export const trajectoryEntrySchema = z.object({
  iteration: z.number(),
  k: z.number(),
  blocks: z.array(z.string()),
  accepted: z.boolean(),
  objective: z.number(),
});

export const repairResponseSchema = z.object({
  id: z.string(),
  plan_id: z.string(),
  instance_id: z.string(),
  method: z.enum(["exact", "vns"]),
  status: z.string(),
  conflicts: z.array(z.string()),
  kpis: z.record(z.string(), z.number()),
  diff: z.array(diffRecordSchema),
  trajectory: z.array(trajectoryEntrySchema),
  scenario: scenarioSchema,
  spec: repairSpecSchema,
});

export const jobResponseSchema = z.object({
  id: z.string(),
  state: z.enum(["queued", "running", "done", "failed"]),
  result_id: z.string().nullable(),
  error: z.string().nullable(),
});

export const reportResponseSchema = z.object({
  id: z.string(),
  plan_id: z.string(),
  instance_id: z.string(),
  nominal_objective: z.number(),
  rows: z.array(
    z.object({
      scenario_id: z.string(),
      weight: z.number(),
      status: z.string(),
      repair_objective: z.number(),
      recovery_price: z.number(),
    }),
  ),
  aggregates: z.object({
    max_price: z.number(),
    mean_price: z.number(),
    weighted_mean_price: z.number(),
  }),
});

/** Body of a 422 response for an infeasible repair. */
export const infeasibleDetailSchema = z.object({
  detail: z.object({
    message: z.string(),
    conflicts: z.array(z.string()),
  }),
});

export type FlightDelay = z.infer<typeof flightDelaySchema>;
export type ScenarioEvent = z.infer<typeof eventSchema>;
export type Scenario = z.infer<typeof scenarioSchema>;
export type RepairSpec = z.infer<typeof repairSpecSchema>;
export type TailPlan = z.infer<typeof tailPlanSchema>;
export type ProductionPlan = z.infer<typeof productionPlanSchema>;
export type PlanResponse = z.infer<typeof planResponseSchema>;
export type RepairResponse = z.infer<typeof repairResponseSchema>;
export type JobResponse = z.infer<typeof jobResponseSchema>;
export type ReportResponse = z.infer<typeof reportResponseSchema>;
export type DiffRecord = z.infer<typeof diffRecordSchema>;
export type TrajectoryEntry = z.infer<typeof trajectoryEntrySchema>;
