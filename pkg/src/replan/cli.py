"""Command-line interface: plan, repair, evaluate, robust, validate, serve."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .domains import (
    DomainError,
    InfeasibleError,
    LimitError,
    PlanBundle,
    detect_conflicts,
    detect_domain,
    get_domain,
    run_repair,
    solve_nominal,
)
from .kernel import KernelSizeError, SolveParams
from .model import Status
from .repair import RepairError, RepairSpec, Scenario, apply_scenario
from .robustness import evaluate_recoverability, two_stage_solve
from .vns import VnsParams

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_INPUT = 3
EXIT_LIMIT = 4


class InputError(Exception):
    pass


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc}") from exc


def _write_json(path: Optional[str], obj: dict) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load_instance(path: str, domain_name: Optional[str]):
    d = _read_json(path)
    name = domain_name or detect_domain(d)
    domain = get_domain(name)
    try:
        return domain, domain.load_instance(d)
    except ValueError as exc:
        raise InputError(f"bad instance {path}: {exc}") from exc


def _load_scenarios(path: str) -> list[Scenario]:
    d = _read_json(path)
    if isinstance(d, list):
        items = d
    elif "scenarios" in d:
        items = d["scenarios"]
    else:
        items = [d]
    try:
        return [Scenario.from_dict(s) for s in items]
    except (RepairError, KeyError) as exc:
        raise InputError(f"bad scenario file {path}: {exc}") from exc


def _load_spec(path: Optional[str]) -> RepairSpec:
    if path is None:
        return RepairSpec()
    try:
        return RepairSpec.from_dict(_read_json(path))
    except (RepairError, KeyError, TypeError) as exc:
        raise InputError(f"bad repair spec {path}: {exc}") from exc


def cmd_plan(args) -> int:
    domain, instance = _load_instance(args.instance, args.domain)
    bundle = solve_nominal(domain, instance)
    _write_json(args.out, bundle.to_dict())
    return EXIT_OK


def cmd_repair(args) -> int:
    domain, instance = _load_instance(args.instance, args.domain)
    bundle = PlanBundle.from_dict(_read_json(args.incumbent))
    scenarios = _load_scenarios(args.scenario)
    if len(scenarios) != 1:
        raise InputError("repair expects exactly one scenario")
    spec = _load_spec(args.spec)
    vns_params = VnsParams.from_dict(
        {**(_read_json(args.vns_params) if args.vns_params else {}),
         **({"seed": args.seed} if args.seed is not None else {})}
    )
    result = run_repair(domain, instance, bundle, scenarios[0], spec,
                        method=args.method, vns_params=vns_params)
    _write_json(args.out, result.to_dict())
    if result.solution.status is Status.INFEASIBLE:
        return EXIT_INFEASIBLE
    if result.solution.status is Status.LIMIT_REACHED:
        return EXIT_LIMIT
    return EXIT_OK


def cmd_evaluate(args) -> int:
    domain, instance = _load_instance(args.instance, args.domain)
    bundle = PlanBundle.from_dict(_read_json(args.incumbent))
    scenarios = _load_scenarios(args.scenarios)
    spec = _load_spec(args.spec)
    report = evaluate_recoverability(domain, instance, bundle, scenarios, spec,
                                     method=args.method)
    out = report.to_dict()
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.to_csv())
    _write_json(args.out, out)
    return EXIT_OK


def cmd_robust(args) -> int:
    domain, instance = _load_instance(args.instance, args.domain)
    scenarios = _load_scenarios(args.scenarios)
    spec = _load_spec(args.spec)
    bundle, report = two_stage_solve(domain, instance, scenarios, spec,
                                     alpha=args.alpha, mode=args.mode)
    _write_json(args.out, {
        "plan": bundle.to_dict(),
        "report": report.to_dict(),
        "total": report.total(args.alpha),
    })
    return EXIT_OK


def cmd_validate(args) -> int:
    domain, instance = _load_instance(args.instance, args.domain)
    if args.plan is None:
        print(f"instance OK ({domain.name})")
        return EXIT_OK
    plan_doc = _read_json(args.plan)
    plan = domain.plan_from_dict(plan_doc.get("plan", plan_doc))
    violations = domain.validate(instance, plan)
    for v in violations:
        print(str(v))
    if violations:
        return EXIT_INFEASIBLE
    print("plan OK")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(store_dir=args.store_dir, workers=args.workers)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="replan",
                                description="Repairable planning workbench")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, incumbent=False):
        sp.add_argument("--instance", required=True)
        sp.add_argument("--domain", choices=["tail", "production"])
        sp.add_argument("--out", default=None)
        if incumbent:
            sp.add_argument("--incumbent", required=True)

    sp = sub.add_parser("plan", help="solve the nominal planning model")
    common(sp)
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("repair", help="repair an incumbent plan under a scenario")
    common(sp, incumbent=True)
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--spec", default=None)
    sp.add_argument("--method", choices=["exact", "vns"], default="exact")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--vns-params", default=None)
    sp.set_defaults(func=cmd_repair)

    sp = sub.add_parser("evaluate", help="price recovery over a scenario set")
    common(sp, incumbent=True)
    sp.add_argument("--scenarios", required=True)
    sp.add_argument("--spec", default=None)
    sp.add_argument("--method", choices=["exact", "vns"], default="exact")
    sp.add_argument("--csv", default=None)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("robust", help="two-stage recoverable-robust planning")
    common(sp)
    sp.add_argument("--scenarios", required=True)
    sp.add_argument("--spec", default=None)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--mode", choices=["simultaneous", "separate"],
                    default="simultaneous")
    sp.set_defaults(func=cmd_robust)

    sp = sub.add_parser("validate", help="validate an instance or a plan file")
    common(sp)
    sp.add_argument("--plan", default=None)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("serve", help="run the HTTP session service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.add_argument("--store-dir", default=None)
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_serve)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (LimitError, KernelSizeError) as exc:
        print(f"limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (InputError, DomainError, RepairError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
