"""Deterministic fixture world: the default charter, the canned three-task
plan, the simulated worker roster, and judge rules. The demos, the CLI
defaults, and the evaluation harness all run on this world so every
number they print is reproducible.
"""

from __future__ import annotations

from pathlib import Path

from .charter import Charter, load_charter
from .clock import Clock, utc_now
from .engine import GovernanceEngine
from .ledger import EntryKind
from .review import JudgeRule, RuleJudge
from .strategist import StaticPlanBackend, Strategist
from .workers import BidPolicy, MockPaymentProvider, WorkerBehavior, WorkerProfile, WorkerRegistry

DEFAULT_CHARTER_YAML = """\
mission: "Freelance content agency specializing in cold outreach and technical writing"
core_competencies:
  - name: email_writing
    description: "Draft persuasive email sequences"
    priority: 8
  - name: research
    description: "Market and audience research"
    priority: 5
fiscal_boundaries:
  daily_burn_max_usd: 10.0
  max_budget_usd: 500.0
  currency: USD
  min_job_margin_ratio: 0.35
success_kpis:
  - name: email_quality
    metric: quality_score
    target_value: 0.80
    unit: score
    verification_prompt: "Rate the email sequence on clarity, persuasiveness, and professional tone (0-1 scale)."
"""

# Demo charter: the default plus a summarization competency served by a
# frequently-failing worker, so the failure path is demonstrable.
DEMO_CHARTER_YAML = DEFAULT_CHARTER_YAML.replace(
    "fiscal_boundaries:",
    """\
  - name: summarization
    description: "Summarize long reports into concise briefs"
    priority: 3
fiscal_boundaries:""",
)

GOAL_EMAIL_SEQUENCE = "Write a cold outreach email sequence"
GOAL_DOOMED_SUMMARY = "Summarize the quarterly market report"

EMAIL_SEQUENCE_PLAN = {
    "tasks": [
        {
            "id": "research",
            "description": "Market and audience research for the outreach targets",
            "skill": "research",
            "deps": [],
            "budget": 4000,
        },
        {
            "id": "draft",
            "description": "Draft the cold outreach email sequence",
            "skill": "email_writing",
            "deps": ["research"],
            "budget": 4000,
        },
        {
            "id": "review",
            "description": "Review and polish the email sequence",
            "skill": "email_writing",
            "deps": ["draft"],
            "budget": 4000,
        },
    ]
}

DOOMED_SUMMARY_PLAN = {
    "tasks": [
        {
            "id": "summarize",
            "description": "Summarize the quarterly market report",
            "skill": "summarization",
            "deps": [],
            "budget": 4000,
            # read-only task: stays grantable while the worker's trust decays,
            # so retries genuinely re-run the pipeline
            "capability": "READ_FILES",
        },
    ]
}

# Satisfied by workers.success_output and missed by workers.failure_output.
DEFAULT_JUDGE_RULE = JudgeRule(
    required_keywords=("deliverable", "summary", "objectives", "outcome"),
    min_length=40,
    max_length=4000,
    required_markers=("##",),
)

INITIAL_FUNDING_USD_CENTS = 50_000


def default_judge() -> RuleJudge:
    return RuleJudge(rules={}, default_rule=DEFAULT_JUDGE_RULE)


def case_study_workers() -> list[WorkerProfile]:
    """Three email-writing bidders plus a researcher; worker-alpha is the
    intended auction winner (conf 0.7 at 4c beats 0.7@5c and 0.6@4c)."""
    return [
        WorkerProfile(
            worker_id="worker-research",
            skills=frozenset({"research"}),
            bid_policy=BidPolicy.of(4, 90, "0.7", "sim-small"),
            behavior=WorkerBehavior.CONSISTENT_SUCCESS,
            token_rate=900,
            seed=11,
        ),
        WorkerProfile(
            worker_id="worker-alpha",
            skills=frozenset({"email_writing"}),
            bid_policy=BidPolicy.of(4, 120, "0.7", "sim-medium"),
            behavior=WorkerBehavior.CONSISTENT_SUCCESS,
            token_rate=1200,
            seed=7,
        ),
        WorkerProfile(
            worker_id="worker-beta",
            skills=frozenset({"email_writing"}),
            bid_policy=BidPolicy.of(5, 100, "0.7", "sim-medium"),
            behavior=WorkerBehavior.CONSISTENT_SUCCESS,
            token_rate=1100,
            seed=8,
        ),
        WorkerProfile(
            worker_id="worker-gamma",
            skills=frozenset({"email_writing"}),
            bid_policy=BidPolicy.of(4, 150, "0.6", "sim-small"),
            behavior=WorkerBehavior.CONSISTENT_SUCCESS,
            token_rate=1000,
            seed=9,
        ),
    ]


def demo_workers() -> list[WorkerProfile]:
    return case_study_workers() + [
        WorkerProfile(
            worker_id="worker-flaky",
            skills=frozenset({"summarization"}),
            bid_policy=BidPolicy.of(3, 60, "0.9", "sim-small"),
            behavior=WorkerBehavior.FREQUENT_FAILURE,
            token_rate=800,
            seed=13,
        ),
    ]


def fixture_planner() -> Strategist:
    return Strategist(
        StaticPlanBackend(
            {
                GOAL_EMAIL_SEQUENCE: EMAIL_SEQUENCE_PLAN,
                GOAL_DOOMED_SUMMARY: DOOMED_SUMMARY_PLAN,
            }
        )
    )


def build_engine(
    charter: Charter | None = None,
    *,
    demo: bool = False,
    data_dir: Path | None = None,
    clock: Clock = utc_now,
    payment_decline: bool = False,
    registry: WorkerRegistry | None = None,
) -> GovernanceEngine:
    """The fixture world: funded ledger, seeded trust (worker-alpha at 55
    via one earned audit success), canned plans, deterministic workers."""
    if charter is None:
        charter = load_charter(DEMO_CHARTER_YAML if demo else DEFAULT_CHARTER_YAML)
    if registry is None:
        registry = WorkerRegistry(demo_workers() if demo else case_study_workers())
    engine = GovernanceEngine(
        charter,
        registry,
        default_judge(),
        strategist=fixture_planner(),
        payment_provider=MockPaymentProvider(decline=payment_decline, clock=clock),
        clock=clock,
        data_dir=data_dir,
    )
    if len(engine.ledger) == 0:  # fresh world (not a restart over existing files)
        engine.ledger.append(
            EntryKind.USD_CREDIT, INITIAL_FUNDING_USD_CENTS, purpose="initial funding"
        )
    if "worker-alpha" in registry and not engine.auth.history("worker-alpha"):
        engine.auth.record_audit_success("worker-alpha")  # earned 50 -> 55
    return engine
