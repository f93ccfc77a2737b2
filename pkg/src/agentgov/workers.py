"""Simulated workers with deterministic behavioral profiles.

A profile's behavior enum fully determines its audit outcome: success
templates satisfy the default judge rule, failure templates do not, and
MIXED profiles flip a seeded coin keyed by (seed, task_id) so identical
inputs always yield byte-identical results. Token consumption and the
mock payment provider feed the UnifiedLedger.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from fractions import Fraction

from .bidding import Bid, RequestForProposal, as_ratio
from .clock import Clock, utc_now
from .errors import DuplicateWorker, PaymentDeclined, TokenBudgetExhausted
from .ledger import EntryKind, UnifiedLedger
from .strategist import PlannedTask


class WorkerBehavior(str, Enum):
    CONSISTENT_SUCCESS = "CONSISTENT_SUCCESS"
    MIXED = "MIXED"
    FREQUENT_FAILURE = "FREQUENT_FAILURE"


@dataclass(frozen=True)
class BidPolicy:
    cost_usd_cents: int
    time_seconds: int
    confidence: Fraction
    model_id: str

    @classmethod
    def of(cls, cost_usd_cents: int, time_seconds: int, confidence, model_id: str) -> BidPolicy:
        return cls(cost_usd_cents, time_seconds, as_ratio(confidence), model_id)


@dataclass(frozen=True)
class TaskResult:
    task_id: str
    worker_id: str
    output: str
    tokens_used: int
    succeeded_execution: bool


@dataclass(frozen=True)
class WorkerProfile:
    worker_id: str
    skills: frozenset[str]
    bid_policy: BidPolicy
    behavior: WorkerBehavior
    token_rate: int  # tokens consumed per task
    seed: int = 0
    strict_token_budget: bool = False
    actual_cost_usd_cents: int | None = None  # declared real cost; > bid triggers overrun

    def bid_for(self, rfp: RequestForProposal) -> Bid | None:
        """Deterministic bid from the policy; declines on skill mismatch."""
        if rfp.required_skill not in self.skills:
            return None
        return Bid(
            rfp_id=rfp.rfp_id,
            worker_id=self.worker_id,
            estimated_cost_usd_cents=self.bid_policy.cost_usd_cents,
            estimated_time_seconds=self.bid_policy.time_seconds,
            confidence=self.bid_policy.confidence,
            model_id=self.bid_policy.model_id,
        )

    def _succeeds(self, task: PlannedTask) -> bool:
        if self.behavior is WorkerBehavior.CONSISTENT_SUCCESS:
            return True
        if self.behavior is WorkerBehavior.FREQUENT_FAILURE:
            return False
        # MIXED: seeded coin keyed by task so reruns reproduce exactly
        return random.Random(f"{self.seed}:{task.task_id}").random() < 0.5

    def execute(self, task: PlannedTask, max_tokens: int) -> TaskResult:
        """Template-generated output; the judge verdict is fully determined
        by the behavior enum. Raises TokenBudgetExhausted for strict
        profiles whose token_rate exceeds the budget."""
        if self.token_rate > max_tokens and self.strict_token_budget:
            raise TokenBudgetExhausted(task.task_id, self.worker_id, self.token_rate, max_tokens)
        output = (
            success_output(task, self.worker_id)
            if self._succeeds(task)
            else failure_output(task, self.worker_id)
        )
        return TaskResult(
            task_id=task.task_id,
            worker_id=self.worker_id,
            output=output,
            tokens_used=min(self.token_rate, max_tokens),
            succeeded_execution=True,
        )


def success_output(task: PlannedTask, worker_id: str) -> str:
    """Satisfies the default judge rule: keywords, length bounds, marker."""
    return (
        f"## Deliverable {task.task_id}\n"
        f"{task.description}\n"
        f"Summary: objectives met; outcome verified by {worker_id}."
    )


def failure_output(task: PlannedTask, worker_id: str) -> str:
    return f"draft pending ({worker_id})"


class WorkerRegistry:
    def __init__(self, profiles: list[WorkerProfile] | None = None):
        self._profiles: dict[str, WorkerProfile] = {}
        for profile in profiles or []:
            self.register(profile)

    @classmethod
    def load(cls, path) -> WorkerRegistry:
        """Registry from a config file: a JSON or YAML list of profile records.

        Record shape:
            worker_id: writer-1
            skills: [email_writing]
            bid: {cost_usd_cents: 4, time_seconds: 120, confidence: 0.7, model_id: sim}
            behavior: CONSISTENT_SUCCESS
            token_rate: 1200
            seed: 7                  # optional
            strict_token_budget: false   # optional
            actual_cost_usd_cents: null  # optional
        """
        import yaml
        from pathlib import Path

        records = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        if not isinstance(records, list):
            raise ValueError("worker registry config must be a list of profiles")
        profiles = []
        for record in records:
            bid = record["bid"]
            profiles.append(
                WorkerProfile(
                    worker_id=record["worker_id"],
                    skills=frozenset(record["skills"]),
                    bid_policy=BidPolicy.of(
                        bid["cost_usd_cents"],
                        bid["time_seconds"],
                        bid["confidence"],
                        bid["model_id"],
                    ),
                    behavior=WorkerBehavior(record["behavior"]),
                    token_rate=record["token_rate"],
                    seed=record.get("seed", 0),
                    strict_token_budget=record.get("strict_token_budget", False),
                    actual_cost_usd_cents=record.get("actual_cost_usd_cents"),
                )
            )
        return cls(profiles)

    def register(self, profile: WorkerProfile) -> None:
        if profile.worker_id in self._profiles:
            raise DuplicateWorker(profile.worker_id)
        self._profiles[profile.worker_id] = profile

    def get(self, worker_id: str) -> WorkerProfile:
        return self._profiles[worker_id]

    def with_skill(self, skill: str) -> list[WorkerProfile]:
        return [p for p in self._profiles.values() if skill in p.skills]

    def workers(self) -> tuple[WorkerProfile, ...]:
        return tuple(self._profiles.values())

    def __len__(self) -> int:
        return len(self._profiles)

    def __contains__(self, worker_id: str) -> bool:
        return worker_id in self._profiles


@dataclass(frozen=True)
class PaymentReceipt:
    job_id: str
    amount_usd_cents: int
    provider_ref: str
    timestamp_utc: datetime


class MockPaymentProvider:
    """Stands in for a real payment processor; flip `decline` to exercise
    the failure path."""

    def __init__(self, decline: bool = False, clock: Clock = utc_now):
        self.decline = decline
        self._clock = clock
        self._count = 0

    def charge(self, job_id: str, amount_usd_cents: int) -> PaymentReceipt:
        if self.decline:
            raise PaymentDeclined(job_id, amount_usd_cents)
        self._count += 1
        return PaymentReceipt(
            job_id=job_id,
            amount_usd_cents=amount_usd_cents,
            provider_ref=f"mock-ch-{self._count:06d}-{job_id}",
            timestamp_utc=self._clock(),
        )


def collect_payment(
    provider, ledger: UnifiedLedger, job_id: str, amount_usd_cents: int
) -> PaymentReceipt:
    """Charge the provider, then credit the ledger; a declined charge leaves
    the ledger untouched."""
    receipt = provider.charge(job_id, amount_usd_cents)
    ledger.append(
        EntryKind.USD_CREDIT,
        amount_usd_cents,
        purpose=f"job revenue ({receipt.provider_ref})",
        task_id=None,
        agent_id=None,
    )
    return receipt
