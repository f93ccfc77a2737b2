"""Treasury: the CFO gatekeeper.

Every task expenditure passes balance/reserve, daily-burn, and lifetime
budget-ceiling checks *before* any tokens are consumed; jobs with declared
revenue additionally pass a profitability floor. All arithmetic is exact
(integer cents, rational margins) so boundary cases are deterministic:
equality always passes, only strict violation denies.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .charter import Charter
from .errors import GovernanceError
from .ledger import UnifiedLedger


class FiscalCheck(str, Enum):
    BALANCE = "BALANCE"
    DAILY_CAP = "DAILY_CAP"
    PROFITABILITY = "PROFITABILITY"
    BUDGET_CEILING = "BUDGET_CEILING"


@dataclass(frozen=True)
class FiscalDecision:
    approved: bool
    task_id: str
    cost_usd_cents: int
    reason: str
    check_failed: FiscalCheck | None = None

    def __post_init__(self):
        if self.approved != (self.check_failed is None):
            raise ValueError("approved must be true exactly when no check failed")

    def to_payload(self) -> dict:
        return {
            "approved": self.approved,
            "task_id": self.task_id,
            "cost_usd_cents": self.cost_usd_cents,
            "reason": self.reason,
            "check_failed": self.check_failed.value if self.check_failed else None,
        }


@dataclass(frozen=True)
class NegotiatedBudget:
    task_id: str
    original_bid_cost_usd_cents: int
    max_tokens: int  # never below the 256-token floor

    def __post_init__(self):
        if self.max_tokens < 256:
            raise ValueError(f"max_tokens must be >= 256, got {self.max_tokens}")


class FiscalInsolvencyError(GovernanceError):
    """A balance, daily-cap, or budget-ceiling check failed; raised before any
    tokens are consumed. Carries the failed check and the amounts involved."""

    code = "FISCAL_INSOLVENCY"

    def __init__(self, decision: FiscalDecision, amount_usd_cents: int, cap_usd_cents: int):
        super().__init__(decision.reason)
        self.decision = decision
        self.check_failed = decision.check_failed
        self.amount_usd_cents = amount_usd_cents
        self.cap_usd_cents = cap_usd_cents

    def payload(self) -> dict:
        return {
            "code": self.code,
            "message": str(self),
            "check": self.check_failed.value if self.check_failed else None,
            "amount_usd_cents": self.amount_usd_cents,
            "cap_usd_cents": self.cap_usd_cents,
            "decision": self.decision.to_payload(),
        }


class UnprofitableJobError(GovernanceError):
    code = "UNPROFITABLE_JOB"

    def __init__(
        self,
        decision: FiscalDecision,
        cost_usd_cents: int,
        max_cost_usd_cents: int,
        margin_floor: Fraction,
    ):
        super().__init__(decision.reason)
        self.decision = decision
        self.cost_usd_cents = cost_usd_cents
        self.max_cost_usd_cents = max_cost_usd_cents
        self.margin_floor = margin_floor

    def payload(self) -> dict:
        return {
            "code": self.code,
            "message": str(self),
            "cost_usd_cents": self.cost_usd_cents,
            "max_cost_usd_cents": self.max_cost_usd_cents,
            "margin_floor": format_ratio(self.margin_floor),
            "decision": self.decision.to_payload(),
        }


def format_ratio(ratio: Fraction) -> str:
    """Exact decimal rendering of a margin ratio: Fraction(35, 100) -> "0.35"."""
    den = ratio.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:  # not a terminating decimal
        return f"{ratio.numerator}/{ratio.denominator}"
    places = max(twos, fives)
    scaled = ratio.numerator * 10**places // ratio.denominator
    whole, frac = divmod(scaled, 10**places) if places else (scaled, 0)
    if places == 0:
        return f"{whole}.0"
    digits = f"{frac:0{places}d}".rstrip("0") or "0"
    return f"{whole}.{digits}"


def max_profitable_cost(revenue_usd_cents: int, margin_floor: Fraction) -> int:
    """Largest cost that keeps the job at or above the margin floor (exact, floored)."""
    limit = Fraction(revenue_usd_cents) * (1 - margin_floor)
    return limit.numerator // limit.denominator


class Treasury:
    """Fiscal decisions share the ledger's single-writer owner, so a
    check-then-act race against concurrent spends cannot occur."""

    def __init__(self, charter: Charter, ledger: UnifiedLedger):
        self._charter = charter
        self._ledger = ledger

    @property
    def fiscal(self):
        return self._charter.fiscal_boundaries

    def approve_task(self, cost_usd_cents: int, task_id: str, purpose: str) -> FiscalDecision:
        """Pure check: approval never writes to the ledger (the debit happens
        at dispatch). Raises FiscalInsolvencyError on strict violation."""
        if cost_usd_cents < 0:
            raise ValueError(f"cost must be >= 0, got {cost_usd_cents}")
        balance = self._ledger.total_usd_cents()
        reserve = self.fiscal.min_reserve_usd_cents
        if balance - cost_usd_cents < reserve:
            decision = FiscalDecision(
                approved=False,
                task_id=task_id,
                cost_usd_cents=cost_usd_cents,
                reason=(
                    f"Insufficient funds: {balance}c - {cost_usd_cents}c "
                    f"< {reserve}c reserve"
                ),
                check_failed=FiscalCheck.BALANCE,
            )
            raise FiscalInsolvencyError(decision, balance - cost_usd_cents, reserve)

        daily = self._ledger.daily_debits_usd_cents()
        cap = self.fiscal.daily_burn_max_usd_cents
        if daily + cost_usd_cents > cap:
            decision = FiscalDecision(
                approved=False,
                task_id=task_id,
                cost_usd_cents=cost_usd_cents,
                reason=f"Daily burn cap exceeded: {daily + cost_usd_cents}c > {cap}c cap",
                check_failed=FiscalCheck.DAILY_CAP,
            )
            raise FiscalInsolvencyError(decision, daily + cost_usd_cents, cap)

        lifetime = self._ledger.lifetime_usd_debits()
        ceiling = self.fiscal.max_budget_usd_cents
        if lifetime + cost_usd_cents > ceiling:
            decision = FiscalDecision(
                approved=False,
                task_id=task_id,
                cost_usd_cents=cost_usd_cents,
                reason=(
                    f"Budget ceiling exceeded: {lifetime + cost_usd_cents}c "
                    f"> {ceiling}c ceiling"
                ),
                check_failed=FiscalCheck.BUDGET_CEILING,
            )
            raise FiscalInsolvencyError(decision, lifetime + cost_usd_cents, ceiling)

        return FiscalDecision(
            approved=True,
            task_id=task_id,
            cost_usd_cents=cost_usd_cents,
            reason=f"approved: {purpose}",
        )

    def approve_job_profitability(
        self, revenue_usd_cents: int, cost_usd_cents: int, task_id: str = "job"
    ) -> FiscalDecision:
        """Reject when cost strictly exceeds revenue x (1 - margin floor).

        Callers skip this check entirely when the job declares no revenue.
        """
        if revenue_usd_cents < 0 or cost_usd_cents < 0:
            raise ValueError("revenue and cost must be >= 0")
        margin = self.fiscal.min_job_margin_ratio
        max_cost = max_profitable_cost(revenue_usd_cents, margin)
        if cost_usd_cents > max_cost:
            decision = FiscalDecision(
                approved=False,
                task_id=task_id,
                cost_usd_cents=cost_usd_cents,
                reason=(
                    f"Cost {cost_usd_cents}c exceeds max {max_cost}c "
                    f"(margin floor {format_ratio(margin)})"
                ),
                check_failed=FiscalCheck.PROFITABILITY,
            )
            raise UnprofitableJobError(decision, cost_usd_cents, max_cost, margin)
        return FiscalDecision(
            approved=True,
            task_id=task_id,
            cost_usd_cents=cost_usd_cents,
            reason=f"profitable: {cost_usd_cents}c <= {max_cost}c max",
        )

    def negotiate_token_budget(
        self, winning_bid_cost_usd_cents: int, task_id: str
    ) -> NegotiatedBudget:
        """Reduced token budget when a winning bid exceeds the remaining runway:
        max_tokens = max(256, floor(runway_usd * 1000 / 10)), runway in dollars."""
        runway_cents = self._ledger.runway_usd_cents(self.fiscal.min_reserve_usd_cents)
        runway_usd = Fraction(runway_cents, 100)
        scaled = runway_usd * 1000 / 10
        max_tokens = max(256, scaled.numerator // scaled.denominator)
        return NegotiatedBudget(
            task_id=task_id,
            original_bid_cost_usd_cents=winning_bid_cost_usd_cents,
            max_tokens=max_tokens,
        )
