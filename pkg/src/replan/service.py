"""HTTP session service: upload instances, run plan/repair/recoverability
jobs on a bounded worker pool, fetch results. All solver inputs are
immutable snapshots, so concurrent jobs never interfere."""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from .domains import (
    DomainError,
    InfeasibleError,
    PlanBundle,
    detect_conflicts,
    detect_domain,
    get_domain,
    run_repair,
    solve_nominal,
)
from .model import Status
from .repair import RepairError, RepairSpec, Scenario, apply_scenario
from .robustness import evaluate_recoverability
from .store import NotFound, SessionStore
from .vns import VnsParams


def create_app(store_dir: Optional[str] = None, workers: Optional[int] = None) -> FastAPI:
    app = FastAPI(title="replan service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = SessionStore(store_dir)
    pool = ThreadPoolExecutor(max_workers=workers or os.cpu_count() or 2)
    app.state.store = store
    busy_lock = threading.Lock()
    planning = set()  # instance ids with an in-flight plan job

    def submit(job_fn, done=None) -> dict:
        job_id = store.put("jobs", {"state": "queued", "result_id": None, "error": None})

        def run():
            store.update("jobs", job_id, {"state": "running", "result_id": None, "error": None})
            try:
                result_id = job_fn()
                store.update("jobs", job_id,
                             {"state": "done", "result_id": result_id, "error": None})
            except InfeasibleError as exc:
                store.update("jobs", job_id,
                             {"state": "failed", "result_id": None,
                              "error": str(exc), "error_kind": "infeasible"})
            except Exception as exc:  # noqa: BLE001 - job boundary
                store.update("jobs", job_id,
                             {"state": "failed", "result_id": None, "error": str(exc)})
            finally:
                if done is not None:
                    done()

        pool.submit(run)
        return {"job_id": job_id}

    def get_or_404(kind: str, obj_id: str) -> dict:
        try:
            return store.get(kind, obj_id)
        except NotFound:
            raise HTTPException(404, f"{kind[:-1]} {obj_id!r} not found")

    def load_instance(instance_id: str):
        doc = get_or_404("instances", instance_id)
        domain = get_domain(doc["domain"])
        return domain, domain.load_instance(doc["instance"])

    def parse_body(body: dict):
        try:
            scenario = Scenario.from_dict(body["scenario"])
            spec = RepairSpec.from_dict(body.get("spec", {}))
            method = body.get("method", "exact")
            vns_params = VnsParams.from_dict(body.get("vns", {}))
            if method not in ("exact", "vns"):
                raise RepairError(f"unknown method {method!r}")
            return scenario, spec, method, vns_params
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(400, f"bad repair request: {exc}")

    @app.post("/instances")
    def upload_instance(body: dict):
        try:
            inst_doc = body.get("instance", body)
            domain_name = body.get("domain") or detect_domain(inst_doc)
            domain = get_domain(domain_name)
            domain.load_instance(inst_doc)  # validate now, fail fast
        except (DomainError, ValueError) as exc:
            raise HTTPException(400, f"bad instance: {exc}")
        obj_id = store.put("instances", {"domain": domain_name, "instance": inst_doc})
        return {"id": obj_id, "domain": domain_name}

    @app.get("/instances/{instance_id}")
    def get_instance(instance_id: str):
        return get_or_404("instances", instance_id)

    @app.post("/instances/{instance_id}/plan")
    def plan_instance(instance_id: str):
        domain, instance = load_instance(instance_id)
        with busy_lock:
            if instance_id in planning:
                raise HTTPException(409, f"plan job already running for {instance_id!r}")
            planning.add(instance_id)

        def release():
            with busy_lock:
                planning.discard(instance_id)

        def job():
            bundle = solve_nominal(domain, instance)
            return store.put("plans", {"instance_id": instance_id, **bundle.to_dict()})

        return submit(job, done=release)

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        return {"id": job_id, **get_or_404("jobs", job_id)}

    @app.get("/plans/{plan_id}")
    def get_plan(plan_id: str):
        return {"id": plan_id, **get_or_404("plans", plan_id)}

    @app.post("/plans/{plan_id}/repairs")
    def repair_plan(plan_id: str, body: dict):
        plan_doc = get_or_404("plans", plan_id)
        instance_id = plan_doc["instance_id"]
        domain, instance = load_instance(instance_id)
        bundle = PlanBundle.from_dict(plan_doc)
        scenario, spec, method, vns_params = parse_body(body)

        def job():
            perturbed = apply_scenario(instance, scenario)
            conflicts = [str(c) for c in detect_conflicts(domain, perturbed, bundle.plan)]
            result = run_repair(domain, instance, bundle, scenario, spec,
                                method=method, vns_params=vns_params)
            doc = {
                "plan_id": plan_id,
                "instance_id": instance_id,
                "scenario": scenario.to_dict(),
                "spec": spec.to_dict(),
                "method": method,
                "conflicts": conflicts,
                "infeasible": result.solution.status is Status.INFEASIBLE,
                **result.to_dict(),
            }
            return store.put("repairs", doc)

        return submit(job)

    @app.get("/repairs/{repair_id}")
    def get_repair(repair_id: str):
        doc = get_or_404("repairs", repair_id)
        if doc.get("infeasible"):
            raise HTTPException(422, {
                "message": "repair infeasible",
                "conflicts": doc.get("conflicts", []),
            })
        return {"id": repair_id, **doc}

    @app.post("/instances/{instance_id}/recoverability")
    def recoverability(instance_id: str, body: dict):
        domain, instance = load_instance(instance_id)
        plan_id = body.get("plan_id")
        if not plan_id:
            raise HTTPException(400, "plan_id is required")
        plan_doc = get_or_404("plans", plan_id)
        bundle = PlanBundle.from_dict(plan_doc)
        try:
            scenarios = [Scenario.from_dict(s) for s in body.get("scenarios", [])]
            spec = RepairSpec.from_dict(body.get("spec", {}))
            method = body.get("method", "exact")
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(400, f"bad recoverability request: {exc}")

        def job():
            report = evaluate_recoverability(domain, instance, bundle, scenarios, spec,
                                             method=method)
            return store.put("reports", {
                "instance_id": instance_id, "plan_id": plan_id, **report.to_dict(),
            })

        return submit(job)

    @app.get("/reports/{report_id}")
    def get_report(report_id: str):
        return {"id": report_id, **get_or_404("reports", report_id)}

    @app.post("/plans/{plan_id}/conflicts")
    def plan_conflicts(plan_id: str, body: dict):
        plan_doc = get_or_404("plans", plan_id)
        domain, instance = load_instance(plan_doc["instance_id"])
        bundle = PlanBundle.from_dict(plan_doc)
        try:
            scenario = Scenario.from_dict(body["scenario"])
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(400, f"bad scenario: {exc}")
        try:
            perturbed = apply_scenario(instance, scenario)
        except RepairError as exc:
            raise HTTPException(400, str(exc))
        conflicts = detect_conflicts(domain, perturbed, bundle.plan)
        return {"conflicts": [str(c) for c in conflicts]}

    return app
