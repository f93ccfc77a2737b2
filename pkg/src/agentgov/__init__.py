"""agentgov: a charter-governed runtime kernel for autonomous agent workloads.

Every task is constitutionally scoped (Charter), fiscally approved
(Treasury), permission-gated by earned trust (SovereignAuth), and
cryptographically audited (ReviewEngine), with all money and token flows
recorded on an append-only UnifiedLedger.
"""

from .auth import Capability, PermissionDeniedError, SovereignAuth, THRESHOLDS
from .bidding import AuctionResult, Bid, BiddingEngine, RequestForProposal, select_winner, utility
from .charter import (
    Charter,
    CompetencySpec,
    FiscalBoundaries,
    KpiSpec,
    charter_from_document,
    charter_to_document,
    competency_names,
    load_charter,
)
from .engine import (
    GovernanceEngine,
    GovernanceEvent,
    Job,
    JobState,
    MissionOutcome,
    Role,
)
from .errors import (
    CharterValidationError,
    DuplicateWorker,
    GovernanceError,
    InvalidState,
    JudgeUnavailable,
    NoEligibleWorkers,
    PaymentDeclined,
    PlanRejected,
    TokenBudgetExhausted,
)
from .ledger import EntryKind, LedgerEntry, LedgerSnapshot, UnifiedLedger
from .review import (
    AuditReport,
    JudgeRule,
    JudgeVerdict,
    ReflectionObject,
    ReviewEngine,
    RuleJudge,
    compute_proof_hash,
    verify_report_integrity,
    verify_trail,
)
from .strategist import PlannedTask, Strategist, TaskPlan, TaskPriority
from .treasury import (
    FiscalCheck,
    FiscalDecision,
    FiscalInsolvencyError,
    NegotiatedBudget,
    Treasury,
    UnprofitableJobError,
)
from .workers import (
    BidPolicy,
    MockPaymentProvider,
    PaymentReceipt,
    TaskResult,
    WorkerBehavior,
    WorkerProfile,
    WorkerRegistry,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
