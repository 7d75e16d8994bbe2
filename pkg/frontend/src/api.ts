/**
 * Thin client for the planning service. fetch and the clock are injectable
 * so tests can drive the poll loop without a server or real timers.
 */
import {
  JobResponse,
  jobResponseSchema,
  PlanResponse,
  planResponseSchema,
  RepairResponse,
  repairResponseSchema,
  ReportResponse,
  reportResponseSchema,
  RepairSpec,
  Scenario,
} from "./schemas";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    public status: number,
    public body: unknown,
  ) {
    super(`service returned ${status}`);
  }
}

export interface ClientOptions {
  fetchImpl?: FetchLike;
  /** Poll interval in ms; the workbench uses 1000. */
  pollIntervalMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const realSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class ApiClient {
  private fetchImpl: FetchLike;
  private pollIntervalMs: number;
  private sleep: (ms: number) => Promise<void>;

  constructor(
    public baseUrl: string,
    opts: ClientOptions = {},
  ) {
    this.fetchImpl = opts.fetchImpl ?? ((u, i) => fetch(u, i));
    this.pollIntervalMs = opts.pollIntervalMs ?? 1000;
    this.sleep = opts.sleep ?? realSleep;
  }

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = await res.json().catch(() => null);
    if (!res.ok) {
      throw new ServiceError(res.status, data);
    }
    return data;
  }

  async uploadInstance(instance: unknown): Promise<{ id: string; domain: string }> {
    return (await this.request("POST", "/instances", instance)) as {
      id: string;
      domain: string;
    };
  }

  async startPlan(instanceId: string): Promise<string> {
    const out = (await this.request("POST", `/instances/${instanceId}/plan`)) as {
      job_id: string;
    };
    return out.job_id;
  }

  async getJob(jobId: string): Promise<JobResponse> {
    return jobResponseSchema.parse(await this.request("GET", `/jobs/${jobId}`));
  }

  /** Poll until the job finishes; rejects if the job failed. */
  async waitForJob(jobId: string): Promise<string> {
    for (;;) {
      const job = await this.getJob(jobId);
      if (job.state === "done") {
        return job.result_id as string;
      }
      if (job.state === "failed") {
        throw new Error(job.error ?? "job failed");
      }
      await this.sleep(this.pollIntervalMs);
    }
  }

  async getPlan(planId: string): Promise<PlanResponse> {
    return planResponseSchema.parse(await this.request("GET", `/plans/${planId}`));
  }

  async startRepair(
    planId: string,
    scenario: Scenario,
    spec: RepairSpec,
    method: "exact" | "vns",
  ): Promise<string> {
    const out = (await this.request("POST", `/plans/${planId}/repairs`, {
      scenario,
      spec,
      method,
    })) as { job_id: string };
    return out.job_id;
  }

  async getRepair(repairId: string): Promise<RepairResponse> {
    return repairResponseSchema.parse(
      await this.request("GET", `/repairs/${repairId}`),
    );
  }

  async startRecoverability(
    instanceId: string,
    planId: string,
    scenarios: Scenario[],
    spec: RepairSpec,
  ): Promise<string> {
    const out = (await this.request(
      "POST",
      `/instances/${instanceId}/recoverability`,
      { plan_id: planId, scenarios, spec },
    )) as { job_id: string };
    return out.job_id;
  }

  async getReport(reportId: string): Promise<ReportResponse> {
    return reportResponseSchema.parse(
      await this.request("GET", `/reports/${reportId}`),
    );
  }
}
