"""GovernanceEngine: plan -> approve -> auction -> dispatch -> audit.

One orchestration loop owns every ledger, trust, and trail write; tasks
run in deterministic topological order (ascending task_id among ready
tasks), dependents of failed tasks are skipped, and any fiscal denial
halts the offending task before a single token is consumed. Every step
emits a role-tagged event onto the append-only decision stream.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field as dc_field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping

from .auth import PermissionDeniedError, SovereignAuth
from .bidding import BiddingEngine, select_winner
from .charter import Charter
from .clock import Clock, format_timestamp, utc_now
from .errors import (
    InvalidState,
    JudgeUnavailable,
    NoEligibleWorkers,
    PaymentDeclined,
    PlanRejected,
    TokenBudgetExhausted,
)
from .ledger import EntryKind, UnifiedLedger
from .review import AuditReport, ReviewEngine
from .strategist import Strategist, TaskPlan, topological_order
from .treasury import FiscalInsolvencyError, Treasury, UnprofitableJobError
from .workers import TaskResult, WorkerRegistry, collect_payment

AUDIT_FAILURE_REASON = "One or more tasks failed audit"


class Role(str, Enum):
    SYSTEM = "SYSTEM"
    CEO = "CEO"
    CFO = "CFO"
    AUDIT = "AUDIT"


@dataclass(frozen=True)
class GovernanceEvent:
    seq: int
    timestamp_utc: datetime
    role: Role
    message: str
    job_id: str | None = None
    task_id: str | None = None
    payload: Mapping = dc_field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "seq": self.seq,
            "timestamp_utc": format_timestamp(self.timestamp_utc),
            "role": self.role.value,
            "message": self.message,
            "job_id": self.job_id,
            "task_id": self.task_id,
            "payload": dict(self.payload),
        }


class EventLog:
    """Append-only, strictly increasing seq; waiters are notified on emit so
    the gateway can long-poll."""

    def __init__(self, clock: Clock = utc_now):
        self._clock = clock
        self._events: list[GovernanceEvent] = []
        self._cond = threading.Condition()

    def emit(
        self,
        role: Role,
        message: str,
        job_id: str | None = None,
        task_id: str | None = None,
        payload: Mapping | None = None,
    ) -> GovernanceEvent:
        with self._cond:
            event = GovernanceEvent(
                seq=len(self._events) + 1,
                timestamp_utc=self._clock(),
                role=role,
                message=message,
                job_id=job_id,
                task_id=task_id,
                payload=dict(payload or {}),
            )
            self._events.append(event)
            self._cond.notify_all()
            return event

    def since(self, seq: int) -> tuple[GovernanceEvent, ...]:
        with self._cond:
            return tuple(e for e in self._events if e.seq > seq)

    def last_seq(self) -> int:
        with self._cond:
            return len(self._events)

    def wait_for(self, seq: int, timeout: float) -> tuple[GovernanceEvent, ...]:
        """Events after `seq`, blocking up to `timeout` seconds for new ones."""
        with self._cond:
            if not self._cond.wait_for(lambda: len(self._events) > seq, timeout=timeout):
                return ()
            return tuple(e for e in self._events if e.seq > seq)


class JobState(str, Enum):
    PENDING = "PENDING"
    APPROVED = "APPROVED"
    RUNNING = "RUNNING"
    COMPLETED = "COMPLETED"
    FAILED = "FAILED"


# PENDING -> FAILED covers gate denials that never reach RUNNING.
LEGAL_TRANSITIONS: dict[JobState, set[JobState]] = {
    JobState.PENDING: {JobState.APPROVED, JobState.FAILED},
    JobState.APPROVED: {JobState.RUNNING, JobState.FAILED},
    JobState.RUNNING: {JobState.COMPLETED, JobState.FAILED},
    JobState.COMPLETED: set(),
    JobState.FAILED: {JobState.PENDING},
}


@dataclass
class Job:
    job_id: str
    goal: str
    revenue_usd_cents: int | None = None
    state: JobState = JobState.PENDING
    plan: TaskPlan | None = None
    failure_reason: str | None = None
    deliverable: str | None = None
    task_states: dict[str, str] = dc_field(default_factory=dict)
    task_outputs: dict[str, str] = dc_field(default_factory=dict)
    retries: int = 0

    def to_summary(self) -> dict:
        return {
            "job_id": self.job_id,
            "goal": self.goal,
            "revenue_usd_cents": self.revenue_usd_cents,
            "state": self.state.value,
            "failure_reason": self.failure_reason,
            "task_states": dict(self.task_states),
            "retries": self.retries,
        }


@dataclass(frozen=True)
class TaskFailure:
    task_id: str
    reason: str
    code: str


@dataclass(frozen=True)
class MissionOutcome:
    plan: TaskPlan
    results: tuple[TaskResult, ...]
    audits: tuple[AuditReport, ...]
    failures: tuple[TaskFailure, ...] = ()

    @property
    def all_passed(self) -> bool:
        return (
            not self.failures
            and len(self.audits) == len(self.plan.tasks)
            and all(a.passed for a in self.audits)
        )


_TaskStateHook = Callable[[str, str], None]


def _no_hook(task_id: str, state: str) -> None:
    return None


class GovernanceEngine:
    """Meta-orchestrator. All mutating calls serialize on one lock (the
    single-writer owner of ledger, trust, and trail state)."""

    def __init__(
        self,
        charter: Charter,
        registry: WorkerRegistry,
        judge,
        *,
        strategist: Strategist | None = None,
        ledger: UnifiedLedger | None = None,
        auth: SovereignAuth | None = None,
        payment_provider=None,
        clock: Clock = utc_now,
        data_dir: Path | None = None,
    ):
        self._clock = clock
        self._lock = threading.RLock()
        self._data_dir = Path(data_dir) if data_dir is not None else None
        if self._data_dir is not None:
            self._data_dir.mkdir(parents=True, exist_ok=True)

        def _data_path(name: str) -> Path | None:
            return self._data_dir / name if self._data_dir is not None else None

        self.charter = charter
        self.registry = registry
        self.ledger = ledger if ledger is not None else UnifiedLedger(
            _data_path("ledger.jsonl"), clock=clock
        )
        self.auth = auth if auth is not None else SovereignAuth(
            _data_path("trust_history.jsonl"), clock=clock
        )
        self.review = ReviewEngine(
            judge=judge,
            auth=self.auth,
            trail_path=_data_path("audit_trail.jsonl"),
            clock=clock,
        )
        self.strategist = strategist if strategist is not None else Strategist()
        self.bidding = BiddingEngine(registry)
        self.payments = payment_provider
        self.events = EventLog(clock=clock)

        self._jobs: dict[str, Job] = {}
        self._queue: list[str] = []  # FIFO of job_ids
        self._job_counter = itertools.count(1)
        self._queue_cond = threading.Condition(self._lock)

    def now(self) -> datetime:
        return self._clock()

    # -- treasury binds the live charter; rebuilt on charter swap -------------

    @property
    def treasury(self) -> Treasury:
        return Treasury(self.charter, self.ledger)

    def replace_charter(self, charter: Charter) -> None:
        """Atomic swap; missions started after the swap see the new bounds."""
        with self._lock:
            self.charter = charter
            self.events.emit(Role.SYSTEM, "charter replaced", payload={"mission": charter.mission})

    # -- mission pipeline ------------------------------------------------------

    def run_mission_with_audit(
        self,
        goal: str,
        job_revenue_cents: int | None = None,
        job_id: str | None = None,
        reflections: list[Mapping] | None = None,
    ) -> MissionOutcome:
        """Run the full pipeline for one goal.

        Upfront gate failures (plan rejection, job profitability, plan-estimate
        fiscal checks) raise; runtime task failures (auction, permission,
        dispatch-time fiscal denial, audit failure) are recorded per task and
        reflected in the outcome.
        """
        with self._lock:
            self.events.emit(Role.SYSTEM, f"mission started: {goal}", job_id=job_id)
            plan = self._plan_and_approve(goal, job_revenue_cents, job_id, reflections or [])
            return self._execute_plan(plan, job_id, _no_hook)

    def _plan_and_approve(
        self,
        goal: str,
        revenue_cents: int | None,
        jid: str | None,
        reflections: list[Mapping],
    ) -> TaskPlan:
        """CEO planning plus the upfront CFO gates (job profitability over the
        plan total, then each task's plan estimate). Failures raise."""
        try:
            plan = self.strategist.plan(goal, self.charter, reflections)
        except PlanRejected as exc:
            self.events.emit(Role.CEO, f"plan rejected: {exc}", job_id=jid, payload=exc.payload())
            raise
        self.events.emit(
            Role.CEO,
            f"plan created: {len(plan.tasks)} task(s)",
            job_id=jid,
            payload={"task_ids": [t.task_id for t in plan.tasks]},
        )

        total_cost = plan.total_estimated_cost_usd_cents()
        if revenue_cents is not None:
            try:
                decision = self.treasury.approve_job_profitability(
                    revenue_cents, total_cost, task_id=jid or "job"
                )
            except UnprofitableJobError as exc:
                self.events.emit(
                    Role.CFO, f"job rejected: {exc}", job_id=jid, payload=exc.payload()
                )
                raise
            self.events.emit(
                Role.CFO,
                f"job profitability approved: {total_cost}c against {revenue_cents}c revenue",
                job_id=jid,
                payload=decision.to_payload(),
            )
        for task in plan.tasks:
            try:
                decision = self.treasury.approve_task(
                    task.estimated_cost_usd_cents,
                    task.task_id,
                    f"plan estimate ({task.required_skill})",
                )
            except FiscalInsolvencyError as exc:
                self.events.emit(
                    Role.CFO,
                    f"task estimate denied: {exc}",
                    job_id=jid,
                    task_id=task.task_id,
                    payload=exc.payload(),
                )
                raise
            self.events.emit(
                Role.CFO,
                f"task estimate approved: {task.estimated_cost_usd_cents}c",
                job_id=jid,
                task_id=task.task_id,
                payload=decision.to_payload(),
            )
        return plan

    def _execute_plan(
        self, plan: TaskPlan, jid: str | None, on_task_state: _TaskStateHook
    ) -> MissionOutcome:
        results: list[TaskResult] = []
        audits: list[AuditReport] = []
        failures: list[TaskFailure] = []
        failed_or_skipped: set[str] = set()

        for task in topological_order(plan):
            if any(dep in failed_or_skipped for dep in task.depends_on):
                failures.append(
                    TaskFailure(task.task_id, "skipped: dependency failed", "DEPENDENCY_FAILED")
                )
                failed_or_skipped.add(task.task_id)
                on_task_state(task.task_id, "skipped")
                self.events.emit(
                    Role.SYSTEM,
                    "task skipped: dependency failed",
                    job_id=jid,
                    task_id=task.task_id,
                )
                continue
            on_task_state(task.task_id, "running")
            outcome = self._run_task(task, jid)
            if isinstance(outcome, TaskFailure):
                failures.append(outcome)
                failed_or_skipped.add(task.task_id)
                on_task_state(task.task_id, "failed")
                continue
            result, report = outcome
            results.append(result)
            audits.append(report)
            if report.passed:
                on_task_state(task.task_id, "passed")
            else:
                failed_or_skipped.add(task.task_id)
                failures.append(
                    TaskFailure(task.task_id, f"audit failed: {report.reason}", "AUDIT_FAILED")
                )
                on_task_state(task.task_id, "failed")

        return MissionOutcome(
            plan=plan, results=tuple(results), audits=tuple(audits), failures=tuple(failures)
        )

    def _run_task(self, task, jid: str | None):
        """One task through auction -> auth -> fiscal -> dispatch -> audit.
        Returns (TaskResult, AuditReport) or a TaskFailure."""
        try:
            rfp, bids = self.bidding.broadcast_rfp(task)
        except NoEligibleWorkers as exc:
            self.events.emit(
                Role.SYSTEM,
                f"auction impossible: {exc}",
                job_id=jid,
                task_id=task.task_id,
                payload=exc.payload(),
            )
            return TaskFailure(task.task_id, str(exc), exc.code)
        auction = select_winner(bids, task.priority, self.auth.score)
        if auction.winner is None:
            self.events.emit(
                Role.CFO, "auction failed: no bids", job_id=jid, task_id=task.task_id
            )
            return TaskFailure(task.task_id, "auction failed: no bids", "AUCTION_FAILED")
        winner = self.registry.get(auction.winner)
        winning_bid = next(b for b in bids if b.worker_id == auction.winner)
        self.events.emit(
            Role.CFO,
            f"auction won by {auction.winner} at {winning_bid.estimated_cost_usd_cents}c",
            job_id=jid,
            task_id=task.task_id,
            payload={
                "rfp_id": rfp.rfp_id,
                "winner": auction.winner,
                "utilities": auction.utilities_display(),
            },
        )

        # token-budget negotiation when the bid exceeds remaining runway
        max_tokens = task.estimated_token_budget
        runway = self.ledger.runway_usd_cents(self.charter.fiscal_boundaries.min_reserve_usd_cents)
        if winning_bid.estimated_cost_usd_cents > runway:
            negotiated = self.treasury.negotiate_token_budget(
                winning_bid.estimated_cost_usd_cents, task.task_id
            )
            max_tokens = min(max_tokens, negotiated.max_tokens)
            self.events.emit(
                Role.CFO,
                f"token budget negotiated down to {negotiated.max_tokens}",
                job_id=jid,
                task_id=task.task_id,
                payload={
                    "original_bid_cost_usd_cents": negotiated.original_bid_cost_usd_cents,
                    "max_tokens": negotiated.max_tokens,
                },
            )

        # earned-autonomy gate before dispatch
        try:
            self.auth.check_permission(auction.winner, task.required_capability)
        except PermissionDeniedError as exc:
            self.events.emit(
                Role.SYSTEM,
                f"permission denied: {exc}",
                job_id=jid,
                task_id=task.task_id,
                payload=exc.payload(),
            )
            return TaskFailure(task.task_id, str(exc), exc.code)

        # dispatch-time fiscal check on the winning bid; denial spends nothing
        try:
            decision = self.treasury.approve_task(
                winning_bid.estimated_cost_usd_cents,
                task.task_id,
                f"dispatch ({task.required_skill})",
            )
        except FiscalInsolvencyError as exc:
            self.events.emit(
                Role.CFO,
                f"dispatch denied: {exc}",
                job_id=jid,
                task_id=task.task_id,
                payload=exc.payload(),
            )
            return TaskFailure(task.task_id, str(exc), exc.code)
        self.events.emit(
            Role.CFO,
            f"dispatch approved: {winning_bid.estimated_cost_usd_cents}c",
            job_id=jid,
            task_id=task.task_id,
            payload=decision.to_payload(),
        )

        # dispatch: debit the bid estimate, execute, record token consumption
        self.ledger.append(
            EntryKind.USD_DEBIT,
            winning_bid.estimated_cost_usd_cents,
            purpose=f"task dispatch ({task.required_skill})",
            task_id=task.task_id,
            agent_id=auction.winner,
        )
        self.events.emit(
            Role.SYSTEM,
            f"task dispatched to {auction.winner}",
            job_id=jid,
            task_id=task.task_id,
            payload={"max_tokens": max_tokens},
        )
        try:
            result = winner.execute(task, max_tokens)
        except TokenBudgetExhausted as exc:
            self.auth.record_budget_overrun(auction.winner)
            self.events.emit(
                Role.SYSTEM,
                f"budget overrun: {exc}",
                job_id=jid,
                task_id=task.task_id,
                payload=exc.payload(),
            )
            return TaskFailure(task.task_id, str(exc), exc.code)
        if result.tokens_used:
            self.ledger.append(
                EntryKind.TOKEN_DEBIT,
                result.tokens_used,
                purpose="task execution tokens",
                task_id=task.task_id,
                agent_id=auction.winner,
            )
        if (
            winner.actual_cost_usd_cents is not None
            and winner.actual_cost_usd_cents > winning_bid.estimated_cost_usd_cents
        ):
            self.auth.record_budget_overrun(auction.winner)
            self.events.emit(
                Role.SYSTEM,
                f"cost overrun: actual {winner.actual_cost_usd_cents}c "
                f"exceeded bid {winning_bid.estimated_cost_usd_cents}c",
                job_id=jid,
                task_id=task.task_id,
            )

        # audit
        kpi = self.charter.kpi(task.kpi_name)
        try:
            report = self.review.audit_task(task.task_id, result.output, kpi, auction.winner)
        except JudgeUnavailable as exc:
            self.events.emit(
                Role.AUDIT,
                f"judge unavailable: {exc}",
                job_id=jid,
                task_id=task.task_id,
                payload=exc.payload(),
            )
            return TaskFailure(task.task_id, str(exc), exc.code)
        self.events.emit(
            Role.AUDIT,
            f"audit {'passed' if report.passed else 'failed'}: "
            f"score {report.score_bp / 10000:.2f} on {kpi.name}",
            job_id=jid,
            task_id=task.task_id,
            payload={
                "kpi_name": kpi.name,
                "passed": report.passed,
                "score_bp": report.score_bp,
                "proof_hash": report.proof_hash,
            },
        )
        return result, report

    # -- job queue --------------------------------------------------------------

    def submit_job(self, goal: str, revenue_cents: int | None = None) -> Job:
        if not goal.strip():
            raise InvalidState("goal must be non-empty")
        with self._lock:
            job = Job(
                job_id=f"job-{next(self._job_counter):04d}",
                goal=goal,
                revenue_usd_cents=revenue_cents,
            )
            self._jobs[job.job_id] = job
            self._queue.append(job.job_id)
            self.events.emit(Role.SYSTEM, f"job submitted: {goal}", job_id=job.job_id)
            self._queue_cond.notify_all()
            return job

    def jobs(self) -> list[Job]:
        with self._lock:
            return [self._jobs[jid] for jid in self._queue]

    def job(self, job_id: str) -> Job:
        with self._lock:
            if job_id not in self._jobs:
                raise KeyError(job_id)
            return self._jobs[job_id]

    def has_pending(self) -> bool:
        with self._lock:
            return any(self._jobs[jid].state is JobState.PENDING for jid in self._queue)

    def wait_for_pending(self, timeout: float) -> bool:
        with self._queue_cond:
            return self._queue_cond.wait_for(self.has_pending, timeout=timeout)

    def _transition(self, job: Job, new_state: JobState) -> None:
        if new_state not in LEGAL_TRANSITIONS[job.state]:
            raise InvalidState(f"illegal transition {job.state.value} -> {new_state.value}")
        job.state = new_state
        self.events.emit(Role.SYSTEM, f"job {new_state.value.lower()}", job_id=job.job_id)

    def process_next(self) -> Job:
        """Process the oldest PENDING job through the full pipeline (FIFO,
        one job at a time)."""
        with self._lock:
            pending = [jid for jid in self._queue if self._jobs[jid].state is JobState.PENDING]
            if not pending:
                raise InvalidState("no pending job")
            job = self._jobs[pending[0]]
            return self._process(job)

    def _process(self, job: Job) -> Job:
        reflections = self.review.reflections.as_planner_context() if job.retries else []
        self.events.emit(Role.SYSTEM, f"mission started: {job.goal}", job_id=job.job_id)
        try:
            plan = self._plan_and_approve(
                job.goal, job.revenue_usd_cents, job.job_id, reflections
            )
        except (FiscalInsolvencyError, UnprofitableJobError, PlanRejected) as exc:
            job.failure_reason = str(exc)
            self._transition(job, JobState.FAILED)
            return job

        job.plan = plan
        job.task_states = {t.task_id: "pending" for t in plan.tasks}
        self._transition(job, JobState.APPROVED)
        self._transition(job, JobState.RUNNING)

        def on_task_state(task_id: str, state: str) -> None:
            job.task_states[task_id] = state

        outcome = self._execute_plan(plan, job.job_id, on_task_state)
        job.task_outputs = {r.task_id: r.output for r in outcome.results}

        if outcome.all_passed:
            job.deliverable = self._aggregate_deliverable(job, outcome)
            if job.revenue_usd_cents:
                try:
                    receipt = collect_payment(
                        self.payments, self.ledger, job.job_id, job.revenue_usd_cents
                    )
                except PaymentDeclined as exc:
                    job.failure_reason = str(exc)
                    self.events.emit(
                        Role.SYSTEM,
                        f"payment declined: {exc}",
                        job_id=job.job_id,
                        payload=exc.payload(),
                    )
                    self._transition(job, JobState.FAILED)
                    return job
                self.events.emit(
                    Role.SYSTEM,
                    f"payment collected: {receipt.amount_usd_cents}c ({receipt.provider_ref})",
                    job_id=job.job_id,
                    payload={
                        "amount_usd_cents": receipt.amount_usd_cents,
                        "provider_ref": receipt.provider_ref,
                    },
                )
            self._transition(job, JobState.COMPLETED)
        else:
            audit_failures = [f for f in outcome.failures if f.code == "AUDIT_FAILED"]
            job.failure_reason = (
                AUDIT_FAILURE_REASON if audit_failures else outcome.failures[0].reason
            )
            self._transition(job, JobState.FAILED)
        return job

    def _aggregate_deliverable(self, job: Job, outcome: MissionOutcome) -> str:
        sections = [f"# Deliverable: {job.goal}", ""]
        for result in outcome.results:
            sections.append(f"## {result.task_id}")
            sections.append(result.output)
            sections.append("")
        return "\n".join(sections)

    def retry_job(self, job_id: str) -> Job:
        """FAILED -> PENDING; prior reflections ride along as planner context,
        prior ledger and trail entries stay untouched."""
        with self._lock:
            job = self.job(job_id)
            if job.state is not JobState.FAILED:
                raise InvalidState(
                    f"only FAILED jobs can be retried; '{job_id}' is {job.state.value}"
                )
            job.retries += 1
            job.failure_reason = None
            job.task_states = {}
            job.task_outputs = {}
            self._transition(job, JobState.PENDING)
            if job.job_id not in self._queue:
                self._queue.append(job.job_id)
            self.events.emit(Role.SYSTEM, "job queued for retry", job_id=job_id)
            self._queue_cond.notify_all()
            return job

    def update_job(
        self, job_id: str, goal: str | None = None, revenue_cents: int | None = None
    ) -> Job:
        """Edit goal/revenue; permitted only while PENDING or FAILED."""
        with self._lock:
            job = self.job(job_id)
            if job.state not in (JobState.PENDING, JobState.FAILED):
                raise InvalidState(f"cannot edit job in state {job.state.value}")
            if goal is not None:
                if not goal.strip():
                    raise InvalidState("goal must be non-empty")
                job.goal = goal
            if revenue_cents is not None:
                job.revenue_usd_cents = revenue_cents
            self.events.emit(Role.SYSTEM, "job edited", job_id=job_id)
            return job

    def delete_job(self, job_id: str) -> None:
        with self._lock:
            job = self.job(job_id)
            if job.state is JobState.RUNNING:
                raise InvalidState("cannot delete a running job")
            del self._jobs[job_id]
            if job_id in self._queue:
                self._queue.remove(job_id)
            self.events.emit(Role.SYSTEM, "job deleted", job_id=job_id)

    # -- views -------------------------------------------------------------------

    def decision_stream(self, since_seq: int = 0) -> tuple[GovernanceEvent, ...]:
        return self.events.since(since_seq)

    def token_usage(self) -> list[dict]:
        return [
            {"task_id": e.task_id, "agent_id": e.agent_id, "tokens": e.amount}
            for e in self.ledger.token_debits()
        ]
