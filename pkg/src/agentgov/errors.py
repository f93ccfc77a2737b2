"""Exception hierarchy shared across the governance kernel.

Every error that can halt the pipeline carries machine-readable fields so
the event stream and the HTTP gateway can mirror them without string
parsing.
"""

from __future__ import annotations


class GovernanceError(Exception):
    """Base class for all kernel errors."""

    code = "GOVERNANCE_ERROR"

    def payload(self) -> dict:
        """Machine-readable view, mirrored into decision-stream events."""
        return {"code": self.code, "message": str(self)}


class CharterValidationError(GovernanceError):
    """Charter document failed strict validation.

    ``errors`` is a list of (field_path, message) pairs; ``paths`` exposes
    just the offending field paths (dotted, e.g. ``fiscal_boundaries.currency``).
    """

    code = "VALIDATION"

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = list(errors)
        detail = "; ".join(f"{path}: {msg}" for path, msg in self.errors)
        super().__init__(f"charter validation failed: {detail}")

    @property
    def paths(self) -> list[str]:
        return [path for path, _ in self.errors]

    def payload(self) -> dict:
        return {
            "code": self.code,
            "message": str(self),
            "paths": self.paths,
        }


class LedgerError(GovernanceError):
    code = "LEDGER"


class PlanRejected(GovernanceError):
    """Planner output failed normalization or DAG validation."""

    code = "PLAN_REJECTED"

    def __init__(self, message: str, task_ref: str | None = None):
        super().__init__(message)
        self.task_ref = task_ref

    def payload(self) -> dict:
        return {"code": self.code, "message": str(self), "task_ref": self.task_ref}


class NoEligibleWorkers(GovernanceError):
    code = "NO_ELIGIBLE_WORKERS"

    def __init__(self, required_skill: str):
        super().__init__(f"no registered worker has skill '{required_skill}'")
        self.required_skill = required_skill


class DuplicateWorker(GovernanceError):
    code = "DUPLICATE_WORKER"

    def __init__(self, worker_id: str):
        super().__init__(f"worker '{worker_id}' is already registered")
        self.worker_id = worker_id


class JudgeUnavailable(GovernanceError):
    """An external judge backend failed; treated as task failure, never a pass."""

    code = "JUDGE_UNAVAILABLE"


class TokenBudgetExhausted(GovernanceError):
    code = "TOKEN_BUDGET_EXHAUSTED"

    def __init__(self, task_id: str, worker_id: str, needed: int, max_tokens: int):
        super().__init__(
            f"worker '{worker_id}' needs {needed} tokens for {task_id} "
            f"but only {max_tokens} are budgeted"
        )
        self.task_id = task_id
        self.worker_id = worker_id
        self.needed = needed
        self.max_tokens = max_tokens


class PaymentDeclined(GovernanceError):
    code = "PAYMENT_DECLINED"

    def __init__(self, job_id: str, amount_usd_cents: int):
        super().__init__(f"payment of {amount_usd_cents}c for job '{job_id}' was declined")
        self.job_id = job_id
        self.amount_usd_cents = amount_usd_cents


class InvalidState(GovernanceError):
    code = "INVALID_STATE"
