"""HTTP gateway: a thin projection of the engine for operators and the
dashboard.

Every payload is wrapped in an envelope {ok, data, error}; errors carry
stable machine codes (VALIDATION, FISCAL_INSOLVENCY, UNPROFITABLE_JOB,
PERMISSION_DENIED, INVALID_STATE, NOT_FOUND) mirrored from module errors.
Mutations serialize onto the engine's lock; /events long-polls the
decision stream. A background thread drains the job queue FIFO.
"""

from __future__ import annotations

import contextlib
import threading
from pathlib import Path
from typing import Any

import yaml
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .charter import charter_from_document, charter_to_document
from .clock import format_timestamp
from .engine import GovernanceEngine, Job
from .errors import CharterValidationError, InvalidState
from .review import parse_trail_line

EVENT_POLL_MAX_S = 30.0


def _ok(data: Any, status_code: int = 200) -> JSONResponse:
    return JSONResponse({"ok": True, "data": data, "error": None}, status_code=status_code)


def _err(code: str, message: str, status_code: int, details: dict | None = None) -> JSONResponse:
    error = {"code": code, "message": message}
    if details:
        error.update(details)
    return JSONResponse({"ok": False, "data": None, "error": error}, status_code=status_code)


def _job_payload(job: Job, include_detail: bool = False) -> dict:
    payload = job.to_summary()
    if include_detail:
        payload["deliverable"] = job.deliverable
        payload["task_outputs"] = dict(job.task_outputs)
        payload["plan"] = (
            [
                {
                    "task_id": t.task_id,
                    "description": t.description,
                    "depends_on": list(t.depends_on),
                    "required_skill": t.required_skill,
                    "estimated_token_budget": t.estimated_token_budget,
                    "priority": t.priority.value,
                    "estimated_cost_usd_cents": t.estimated_cost_usd_cents,
                }
                for t in job.plan.tasks
            ]
            if job.plan
            else None
        )
    return payload


class QueueWorker(threading.Thread):
    """Drains the PENDING queue one job at a time (FIFO)."""

    def __init__(self, engine: GovernanceEngine):
        super().__init__(name="agentgov-queue", daemon=True)
        self._engine = engine
        self._stop_requested = threading.Event()

    def run(self) -> None:
        while not self._stop_requested.is_set():
            if self._engine.wait_for_pending(timeout=0.1):
                with contextlib.suppress(InvalidState):
                    self._engine.process_next()

    def stop(self) -> None:
        self._stop_requested.set()


def create_app(
    engine: GovernanceEngine,
    charter_path: Path | None = None,
    process_queue: bool = True,
) -> FastAPI:
    worker = QueueWorker(engine) if process_queue else None

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        if worker is not None:
            worker.start()
        yield
        if worker is not None:
            worker.stop()
            worker.join(timeout=2)

    app = FastAPI(title="agentgov gateway", lifespan=lifespan)

    @app.exception_handler(KeyError)
    async def _not_found(request: Request, exc: KeyError):
        return _err("NOT_FOUND", f"unknown resource: {exc}", 404)

    @app.exception_handler(InvalidState)
    async def _invalid_state(request: Request, exc: InvalidState):
        return _err(exc.code, str(exc), 409)

    # -- missions and jobs ---------------------------------------------------

    @app.post("/missions")
    def submit_mission(body: dict):
        goal = body.get("goal", "")
        if not isinstance(goal, str) or not goal.strip():
            return _err("VALIDATION", "goal must be a non-empty string", 400)
        revenue = body.get("revenue_cents")
        if revenue is not None and (not isinstance(revenue, int) or revenue < 0):
            return _err("VALIDATION", "revenue_cents must be a non-negative integer", 400)
        job = engine.submit_job(goal, revenue)
        return _ok(_job_payload(job), status_code=202)

    @app.get("/jobs")
    def list_jobs():
        return _ok({"jobs": [_job_payload(j) for j in engine.jobs()]})

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        return _ok(_job_payload(engine.job(job_id), include_detail=True))

    @app.post("/jobs/{job_id}/retry")
    def retry_job(job_id: str):
        return _ok(_job_payload(engine.retry_job(job_id)))

    @app.patch("/jobs/{job_id}")
    def edit_job(job_id: str, body: dict):
        job = engine.update_job(job_id, body.get("goal"), body.get("revenue_cents"))
        return _ok(_job_payload(job))

    @app.delete("/jobs/{job_id}")
    def delete_job(job_id: str):
        engine.delete_job(job_id)
        return _ok({"deleted": job_id})

    # -- decision stream -----------------------------------------------------

    @app.get("/events")
    def events(since: int = 0, timeout: float = 10.0):
        """Long-poll: blocks until events newer than `since` exist (or the
        timeout passes), then returns the page."""
        timeout = min(max(timeout, 0.0), EVENT_POLL_MAX_S)
        page = engine.events.wait_for(since, timeout=timeout)
        return _ok(
            {
                "events": [e.to_record() for e in page],
                "next_since": page[-1].seq if page else since,
            }
        )

    # -- charter ----------------------------------------------------------------

    @app.get("/charter")
    def get_charter():
        return _ok({"charter": charter_to_document(engine.charter)})

    @app.put("/charter")
    def put_charter(body: dict):
        document = body.get("charter", body)
        try:
            charter = charter_from_document(document)
        except CharterValidationError as exc:
            return _err(exc.code, str(exc), 422, {"paths": exc.paths})
        engine.replace_charter(charter)
        if charter_path is not None:
            charter_path.write_text(
                yaml.safe_dump(charter_to_document(charter), sort_keys=False),
                encoding="utf-8",
            )
        return _ok({"charter": charter_to_document(charter)})

    # -- telemetry -------------------------------------------------------------

    @app.get("/trust")
    def trust():
        return _ok(
            {
                "agents": engine.auth.known_agents(),
                "base_score": 50,
                "thresholds": {cap.value: thr for cap, thr in sorted_thresholds()},
            }
        )

    @app.get("/tokens")
    def tokens():
        usage = engine.token_usage()
        return _ok({"usage": usage, "total_tokens": sum(u["tokens"] for u in usage)})

    @app.get("/ledger")
    def ledger():
        snap = engine.ledger.snapshot()
        return _ok(
            {
                "balance_usd_cents": snap.balance_usd_cents,
                "daily_debits_usd_cents": snap.daily_debits_usd_cents,
                "total_tokens_spent": snap.total_tokens_spent,
                "entry_count": snap.entry_count,
                "runway_usd_cents": engine.ledger.runway_usd_cents(
                    engine.charter.fiscal_boundaries.min_reserve_usd_cents
                ),
                "entries": [e.to_record() for e in engine.ledger.entries()],
            }
        )

    @app.post("/verify-trail")
    def verify_trail_endpoint():
        total, failures = engine.review.verify()
        return _ok({"total": total, "failures": failures})

    @app.get("/audit-trail")
    def audit_trail():
        reports = [parse_trail_line(line) for line in engine.review.trail_lines()]
        for r in reports:
            r["score"] = float(r["score"])
        return _ok({"reports": reports})

    @app.get("/health")
    def health():
        return _ok(
            {
                "status": "up",
                "last_event_seq": engine.events.last_seq(),
                "time_utc": format_timestamp(engine.now()),
            }
        )

    def sorted_thresholds():
        from .auth import THRESHOLDS

        return sorted(THRESHOLDS.items(), key=lambda kv: kv[1])

    return app
