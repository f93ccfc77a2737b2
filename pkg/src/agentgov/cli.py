"""Command-line entry points.

    agentgov run "<goal>" [--revenue-cents N] [--charter PATH] [--workers PATH] [--data-dir DIR]
    agentgov serve [--port N] [--charter PATH] [--workers PATH] [--data-dir DIR] [--demo]
    agentgov verify-trail PATH
    agentgov eval {fiscal,trust,audit,all} [--out DIR]

`run` exits 0 when the job completes and 1 when it fails; `verify-trail`
exits 0 only when every trail line verifies. The charter path may also come
from AGENTGOV_CHARTER, and the worker registry file from AGENTGOV_WORKERS.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import evals, fixtures
from .charter import load_charter
from .engine import JobState
from .review import verify_trail
from .workers import WorkerRegistry

CHARTER_ENV = "AGENTGOV_CHARTER"
WORKERS_ENV = "AGENTGOV_WORKERS"


def _build_engine(args, demo: bool = False):
    charter_path = args.charter or os.environ.get(CHARTER_ENV)
    charter = load_charter(Path(charter_path)) if charter_path else None
    data_dir = Path(args.data_dir) if args.data_dir else None
    workers_path = getattr(args, "workers", None) or os.environ.get(WORKERS_ENV)
    registry = WorkerRegistry.load(Path(workers_path)) if workers_path else None
    return fixtures.build_engine(charter, demo=demo, data_dir=data_dir, registry=registry)


def _cmd_run(args) -> int:
    engine = _build_engine(args)
    job = engine.submit_job(args.goal, args.revenue_cents)
    engine.process_next()
    job = engine.job(job.job_id)

    print(f"job {job.job_id}: {job.state.value}")
    if job.plan:
        for task in job.plan.tasks:
            print(f"  {task.task_id} [{job.task_states.get(task.task_id, '?')}]")
    if job.failure_reason:
        print(f"  reason: {job.failure_reason}")
    snap = engine.ledger.snapshot()
    print(
        f"ledger: balance {snap.balance_usd_cents}c, "
        f"daily debits {snap.daily_debits_usd_cents}c, "
        f"tokens {snap.total_tokens_spent}"
    )
    for agent, score in sorted(engine.auth.known_agents().items()):
        print(f"trust: {agent} = {score}")
    if args.events:
        print("--- decision stream ---")
        for event in engine.decision_stream():
            print(f"{event.seq:4d} {event.role.value:6s} {event.message}")
    return 0 if job.state is JobState.COMPLETED else 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .gateway import create_app

    engine = _build_engine(args, demo=args.demo)
    if args.demo:
        # pre-load the queue so the dashboard has live material immediately
        engine.submit_job(fixtures.GOAL_EMAIL_SEQUENCE, 500)
        engine.submit_job(fixtures.GOAL_DOOMED_SUMMARY, 300)
    app = create_app(engine, charter_path=Path(args.charter) if args.charter else None)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_verify_trail(args) -> int:
    total, failures = verify_trail(Path(args.path))
    print(f"verified {total} report(s); {len(failures)} failure(s)")
    for line_no in failures:
        print(f"  line {line_no}: verification failed")
    return 0 if not failures else 1


def _cmd_eval(args) -> int:
    out_dir = Path(args.out) if args.out else None
    if args.axis == "all":
        report = evals.run_all(out_dir=out_dir)
        for axis_report in report.values():
            print(evals.render_markdown(axis_report))
            print()
        if out_dir:
            evals.write_reports(report, out_dir)
        ok = (
            report["fiscal"]["blocked"] == report["fiscal"]["scenarios"]
            and report["trust"]["agreements"] == report["trust"]["missions"]
            and report["audit"]["hash_mismatches"] == 0
        )
        return 0 if ok else 1
    if args.axis == "fiscal":
        report = evals.eval_fiscal()
        ok = report["blocked"] == report["scenarios"]
    elif args.axis == "trust":
        report = evals.eval_trust()
        ok = report["agreements"] == report["missions"]
    else:
        report = evals.eval_audit(out_dir=out_dir)
        ok = (
            report["hash_mismatches"] == 0
            and report["mutations_detected"] == report["mutations_tested"]
            and report["golden_vector_ok"]
        )
    print(evals.render_markdown(report))
    if out_dir:
        evals.write_reports({args.axis: report}, out_dir)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agentgov")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one governed mission and print the outcome")
    p_run.add_argument("goal")
    p_run.add_argument("--revenue-cents", type=int, default=None)
    p_run.add_argument("--charter", default=None)
    p_run.add_argument("--workers", default=None, help="worker registry config (JSON/YAML)")
    p_run.add_argument("--data-dir", default=None)
    p_run.add_argument("--events", action="store_true", help="also print the decision stream")
    p_run.set_defaults(func=_cmd_run)

    p_serve = sub.add_parser("serve", help="serve the HTTP gateway")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8040)
    p_serve.add_argument("--charter", default=None)
    p_serve.add_argument("--workers", default=None, help="worker registry config (JSON/YAML)")
    p_serve.add_argument("--data-dir", default=None)
    p_serve.add_argument(
        "--demo", action="store_true", help="seed the demo fixture world and queue"
    )
    p_serve.set_defaults(func=_cmd_serve)

    p_verify = sub.add_parser("verify-trail", help="verify an audit-trail JSONL file")
    p_verify.add_argument("path")
    p_verify.set_defaults(func=_cmd_verify_trail)

    p_eval = sub.add_parser("eval", help="run an evaluation axis")
    p_eval.add_argument("axis", choices=["fiscal", "trust", "audit", "all"])
    p_eval.add_argument("--out", default=None, help="directory for JSON/Markdown reports")
    p_eval.set_defaults(func=_cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
