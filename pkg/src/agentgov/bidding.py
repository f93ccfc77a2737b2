"""Auction-based worker selection.

An RFP goes out per task to every registered worker holding the required
skill; collected bids are scored with

    U = (confidence / cost) * P * (trust / 100),  P = 1.5 for HIGH priority

in exact rational arithmetic, so the argmax is reproducible across runs
and languages. Zero-cost bids are clamped to one cent inside the utility
(free work stays maximally attractive without a division singularity).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Callable, Mapping

from .canonical import render_fraction
from .errors import NoEligibleWorkers
from .strategist import PlannedTask, TaskPriority

HIGH_PRIORITY_BOOST = Fraction(3, 2)

# Default collection window (logical seconds); bids arriving later are discarded.
DEFAULT_BID_WINDOW_S = 5


def as_ratio(value: float | int | str | Decimal | Fraction) -> Fraction:
    """Exact rational from a decimal-looking value; floats go through their
    shortest decimal representation (0.7 -> 7/10, not the binary float)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    try:
        return Fraction(Decimal(str(value)))
    except InvalidOperation as exc:
        raise ValueError(f"not a decimal value: {value!r}") from exc


@dataclass(frozen=True)
class RequestForProposal:
    rfp_id: str
    task_id: str
    required_skill: str
    description: str
    priority: TaskPriority
    deadline: datetime | None = None

    def to_wire(self) -> dict:
        return {
            "rfp_id": self.rfp_id,
            "task_id": self.task_id,
            "required_skill": self.required_skill,
            "description": self.description,
            "priority": self.priority.value,
        }


@dataclass(frozen=True)
class Bid:
    rfp_id: str
    worker_id: str
    estimated_cost_usd_cents: int
    estimated_time_seconds: int
    confidence: Fraction
    model_id: str

    def __post_init__(self):
        if not (0 <= self.confidence <= 1):
            raise ValueError(f"confidence must be within [0, 1], got {self.confidence}")
        if self.estimated_cost_usd_cents < 0 or self.estimated_time_seconds < 0:
            raise ValueError("cost and time estimates must be >= 0")

    def to_wire(self) -> dict:
        from .canonical import RawNumber, render_basis_points

        conf_bp = self.confidence * 10000
        if conf_bp.denominator != 1:
            raise ValueError(
                f"confidence {self.confidence} is finer than basis points; "
                "wire messages need a fixed decimal rendering"
            )
        return {
            "rfp_id": self.rfp_id,
            "worker_id": self.worker_id,
            "estimated_cost_usd_cents": self.estimated_cost_usd_cents,
            "estimated_time_seconds": self.estimated_time_seconds,
            "confidence": RawNumber(render_basis_points(int(conf_bp))),
            "model_id": self.model_id,
        }


@dataclass(frozen=True)
class AuctionResult:
    rfp_id: str
    winner: str | None
    winning_utility: Fraction
    all_utilities: Mapping[str, Fraction] = field(default_factory=dict)

    def utilities_display(self) -> dict[str, str]:
        """Utilities rendered to 6 decimal places for logs and events."""
        return {wid: render_fraction(u, 6) for wid, u in self.all_utilities.items()}


def utility(bid: Bid, priority: TaskPriority, trust_score: int) -> Fraction:
    if not (0 <= trust_score <= 100):
        raise ValueError(f"trust score must be within [0, 100], got {trust_score}")
    cost = max(bid.estimated_cost_usd_cents, 1)
    boost = HIGH_PRIORITY_BOOST if priority is TaskPriority.HIGH else Fraction(1)
    return bid.confidence / cost * boost * Fraction(trust_score, 100)


def _beats(candidate: tuple[Fraction, Bid], champion: tuple[Fraction, Bid]) -> bool:
    cu, cb = candidate
    wu, wb = champion
    if cu != wu:
        return cu > wu
    if cb.estimated_cost_usd_cents != wb.estimated_cost_usd_cents:
        return cb.estimated_cost_usd_cents < wb.estimated_cost_usd_cents
    if cb.confidence != wb.confidence:
        return cb.confidence > wb.confidence
    return cb.worker_id < wb.worker_id


def select_winner(
    bids: list[Bid],
    priority: TaskPriority,
    trust_lookup: Callable[[str], int],
) -> AuctionResult:
    """Argmax of utility; ties broken by lower cost, then higher confidence,
    then lexicographically smallest worker_id. Trust scores are snapshotted
    at selection time. An empty bid list yields winner=None (the engine
    surfaces that as an auction failure)."""
    utilities: dict[str, Fraction] = {}
    champion: tuple[Fraction, Bid] | None = None
    rfp_id = bids[0].rfp_id if bids else ""
    for bid in bids:
        score = utility(bid, priority, trust_lookup(bid.worker_id))
        utilities[bid.worker_id] = score
        if champion is None or _beats((score, bid), champion):
            champion = (score, bid)
    if champion is None:
        return AuctionResult(rfp_id=rfp_id, winner=None, winning_utility=Fraction(0))
    return AuctionResult(
        rfp_id=rfp_id,
        winner=champion[1].worker_id,
        winning_utility=champion[0],
        all_utilities=utilities,
    )


class BiddingEngine:
    """Fans RFPs out to the registry and collects bids synchronously (the
    selection itself is a pure function of the collected list)."""

    def __init__(self, registry):
        self._registry = registry

    def broadcast_rfp(self, task: PlannedTask) -> tuple[RequestForProposal, list[Bid]]:
        """Deliver an RFP to every worker matching required_skill.

        Raises NoEligibleWorkers when the skill is unknown to the registry;
        eligible workers may still decline, returning an empty bid list.
        """
        eligible = self._registry.with_skill(task.required_skill)
        if not eligible:
            raise NoEligibleWorkers(task.required_skill)
        rfp = RequestForProposal(
            rfp_id=f"rfp-{task.task_id}",
            task_id=task.task_id,
            required_skill=task.required_skill,
            description=task.description,
            priority=task.priority,
        )
        bids = []
        for profile in eligible:
            bid = profile.bid_for(rfp)
            if bid is not None:
                bids.append(bid)
        return rfp, bids
