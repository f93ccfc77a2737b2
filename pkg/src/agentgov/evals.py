"""Evaluation harness: three axes, desk-scale, fully deterministic.

- fiscal: 30 violation scenarios (5 categories x 6) plus one compliant
  control per category; every violation must raise the right error with
  zero token-ledger entries.
- trust: 200 scripted missions over behavioral profiles; every gate
  decision is compared against the closed-form clamp-fold oracle.
  Gating agreement is measured against committed scores, which makes the
  expected decision well-defined at every gate (no judge-latency races),
  so the target here is full agreement rather than a sampled rate.
- audit: >= 1,200 sealed reports; trail verification must find zero
  mismatches and zero collisions, and 100 randomized single-field
  mutations must all be detected.

Each eval returns a JSON-able report dict; render_markdown() formats it
for the CLI. Runs are seed-pinned: two runs produce identical tables.
"""

from __future__ import annotations

import random
import time
from datetime import datetime, timezone
from pathlib import Path

from .auth import Capability, SovereignAuth, THRESHOLDS, clamp_fold
from .charter import charter_from_document
from .clock import ManualClock
from .engine import GovernanceEngine
from .errors import GovernanceError
from .ledger import EntryKind
from .review import (
    ReviewEngine,
    compute_proof_hash,
    parse_trail_line,
    verify_report_integrity,
    verify_trail_lines,
)
from .strategist import StaticPlanBackend, Strategist
from .treasury import FiscalInsolvencyError, UnprofitableJobError
from .workers import BidPolicy, MockPaymentProvider, WorkerBehavior, WorkerProfile, WorkerRegistry

from . import fixtures

GOLDEN_REPORT = {
    "task_id": "task-2-write_email",
    "kpi_name": "email_quality",
    "passed": True,
    "score_bp": 8700,
    "reason": (
        "Email sequence demonstrates clear value proposition, professional tone, "
        "and strong call-to-action."
    ),
    "suggested_fix": None,
    "timestamp_utc": "2026-03-14T10:23:41Z",
}
GOLDEN_PROOF_HASH = "e06da2218d7ecfb6b35cf14b2654ff5d8562dffad688e4bcd37e64df843ee95a"

FISCAL_CATEGORIES = (
    "insufficient_balance",
    "daily_burn_cap",
    "unprofitable_job",
    "reserve_depletion",
    "budget_ceiling",
)


def _scenario_charter(
    daily_cap_c: int = 1_000_000,
    budget_c: int = 10_000_000,
    reserve_c: int = 0,
    margin: float = 0.35,
) -> dict:
    return {
        "mission": "Fiscal scenario entity",
        "core_competencies": [
            {"name": "general", "description": "General task work", "priority": 5}
        ],
        "fiscal_boundaries": {
            "daily_burn_max_usd": daily_cap_c / 100,
            "max_budget_usd": budget_c / 100,
            "currency": "USD",
            "min_job_margin_ratio": margin,
            "min_reserve_usd": reserve_c / 100,
        },
        "success_kpis": [
            {
                "name": "quality",
                "metric": "quality_score",
                "target_value": 0.8,
                "unit": "score",
                "verification_prompt": "Assess quality of the deliverable output.",
            }
        ],
    }


def _scenario_engine(
    charter_doc: dict,
    task_cost_c: int,
    opening_balance_c: int,
    today_debits_c: int = 0,
    lifetime_debits_c: int = 0,
) -> GovernanceEngine:
    """`today_debits_c` land inside the current UTC day (they count toward the
    daily cap); `lifetime_debits_c` land the day before (they count only
    toward the aggregate ceiling)."""
    charter = charter_from_document(charter_doc)
    registry = WorkerRegistry(
        [
            WorkerProfile(
                worker_id="scenario-worker",
                skills=frozenset({"general"}),
                bid_policy=BidPolicy.of(task_cost_c, 60, "0.8", "sim-small"),
                behavior=WorkerBehavior.CONSISTENT_SUCCESS,
                token_rate=500,
            )
        ]
    )
    planner = Strategist(
        StaticPlanBackend(
            {
                "scenario": {
                    "tasks": [
                        {
                            "id": "work",
                            "description": "Scenario deliverable with fixed cost",
                            "skill": "general",
                            "budget": 4000,
                            "cost_usd_cents": task_cost_c,
                        }
                    ]
                }
            }
        )
    )
    clock = ManualClock(datetime(2026, 3, 13, 9, 0, 0, tzinfo=timezone.utc))
    engine = GovernanceEngine(
        charter,
        registry,
        fixtures.default_judge(),
        strategist=planner,
        payment_provider=MockPaymentProvider(clock=clock),
        clock=clock,
    )
    if opening_balance_c:
        engine.ledger.append(EntryKind.USD_CREDIT, opening_balance_c, purpose="scenario funding")
    if lifetime_debits_c:
        engine.ledger.append(
            EntryKind.USD_DEBIT, lifetime_debits_c, purpose="scenario lifetime spend"
        )
    clock.set(datetime(2026, 3, 14, 9, 0, 0, tzinfo=timezone.utc))
    if today_debits_c:
        engine.ledger.append(EntryKind.USD_DEBIT, today_debits_c, purpose="scenario daily spend")
    return engine


def _fiscal_scenarios() -> list[dict]:
    """30 deterministic violation scenarios: 6 per category."""
    scenarios: list[dict] = []
    for i in range(6):
        # cost strictly exceeds the full balance (reserve 0)
        balance = 1_000 + 250 * i
        scenarios.append(
            {
                "category": "insufficient_balance",
                "charter": _scenario_charter(),
                "balance": balance,
                "today": 0,
                "lifetime": 0,
                "cost": balance + 1 + 7 * i,
                "revenue": None,
                "expect": FiscalInsolvencyError,
                "check": "BALANCE",
            }
        )
    for i in range(6):
        cap = 500 + 100 * i
        prior = 200 + 50 * i
        scenarios.append(
            {
                "category": "daily_burn_cap",
                "charter": _scenario_charter(daily_cap_c=cap),
                "balance": 100_000,
                "today": prior,
                "lifetime": 0,
                "cost": cap - prior + 1 + 13 * i,  # daily + cost > cap, strictly
                "revenue": None,
                "expect": FiscalInsolvencyError,
                "check": "DAILY_CAP",
            }
        )
    for i in range(6):
        revenue = 500 + 200 * i
        max_cost = revenue * 65 // 100
        scenarios.append(
            {
                "category": "unprofitable_job",
                "charter": _scenario_charter(),
                "balance": 100_000,
                "today": 0,
                "lifetime": 0,
                "cost": max_cost + 1 + 11 * i,
                "revenue": revenue,
                "expect": UnprofitableJobError,
                "check": "PROFITABILITY",
            }
        )
    for i in range(6):
        reserve = 2_000 + 500 * i
        balance = reserve + 300
        scenarios.append(
            {
                # cost fits the raw balance but would dip below the reserve
                "category": "reserve_depletion",
                "charter": _scenario_charter(reserve_c=reserve),
                "balance": balance,
                "today": 0,
                "lifetime": 0,
                "cost": 301 + 17 * i,
                "revenue": None,
                "expect": FiscalInsolvencyError,
                "check": "BALANCE",
            }
        )
    for i in range(6):
        ceiling = 5_000 + 400 * i
        lifetime = ceiling - 100
        scenarios.append(
            {
                # lifetime debits + cost breach the aggregate ceiling; the
                # debits sit on a prior day so the daily cap stays clear
                "category": "budget_ceiling",
                "charter": _scenario_charter(daily_cap_c=ceiling, budget_c=ceiling),
                "balance": 1_000_000,
                "today": 0,
                "lifetime": lifetime,
                "cost": 101 + 19 * i,
                "revenue": None,
                "expect": FiscalInsolvencyError,
                "check": "BUDGET_CEILING",
            }
        )
    return scenarios


def _fiscal_controls() -> list[dict]:
    """One compliant control per category; none may be blocked."""
    return [
        {"category": "insufficient_balance", "charter": _scenario_charter(), "balance": 10_000,
         "today": 0, "lifetime": 0, "cost": 400, "revenue": None},
        {"category": "daily_burn_cap", "charter": _scenario_charter(daily_cap_c=1_000),
         "balance": 100_000, "today": 200, "lifetime": 0, "cost": 800,
         "revenue": None},  # 200+800 == cap passes
        {"category": "unprofitable_job", "charter": _scenario_charter(), "balance": 100_000,
         "today": 0, "lifetime": 0, "cost": 325, "revenue": 500},  # boundary: exactly max cost
        {"category": "reserve_depletion", "charter": _scenario_charter(reserve_c=2_000),
         "balance": 2_500, "today": 0, "lifetime": 0, "cost": 500,
         "revenue": None},  # lands exactly on reserve
        {"category": "budget_ceiling", "charter": _scenario_charter(daily_cap_c=5_000, budget_c=5_000),
         "balance": 100_000, "today": 0, "lifetime": 4_000, "cost": 1_000,
         "revenue": None},  # hits ceiling exactly
    ]


def eval_fiscal() -> dict:
    started = time.monotonic()
    rows = []
    blocked = 0
    for idx, sc in enumerate(_fiscal_scenarios(), 1):
        engine = _scenario_engine(
            sc["charter"], sc["cost"], sc["balance"], sc["today"], sc["lifetime"]
        )
        tokens_before = engine.ledger.total_tokens_spent()
        outcome: str
        check = None
        try:
            engine.run_mission_with_audit("scenario", sc["revenue"])
            outcome = "NOT_BLOCKED"
        except GovernanceError as exc:
            outcome = type(exc).__name__
            decision = getattr(exc, "decision", None)
            if decision is not None and decision.check_failed is not None:
                check = decision.check_failed.value
        tokens_after = engine.ledger.total_tokens_spent()
        ok = (
            outcome == sc["expect"].__name__
            and tokens_after == tokens_before
            and check == sc["check"]
        )
        blocked += ok
        rows.append(
            {
                "scenario": idx,
                "category": sc["category"],
                "expected": sc["expect"].__name__,
                "raised": outcome,
                "check": check if check else sc["check"],
                "token_entries_added": tokens_after - tokens_before,
                "blocked": ok,
            }
        )

    control_rows = []
    controls_passed = 0
    for sc in _fiscal_controls():
        engine = _scenario_engine(
            sc["charter"], sc["cost"], sc["balance"], sc["today"], sc["lifetime"]
        )
        job = engine.submit_job("scenario", sc["revenue"])
        engine.process_next()
        completed = engine.job(job.job_id).state.value == "COMPLETED"
        tokens = engine.ledger.total_tokens_spent()
        controls_passed += completed and tokens > 0
        control_rows.append(
            {
                "category": sc["category"],
                "state": engine.job(job.job_id).state.value,
                "tokens_spent": tokens,
                "passed": completed and tokens > 0,
            }
        )

    return {
        "axis": "fiscal",
        "scenarios": len(rows),
        "blocked": blocked,
        "block_rate": f"{blocked}/{len(rows)}",
        "controls": len(control_rows),
        "controls_passed": controls_passed,
        "rows": rows,
        "control_rows": control_rows,
        "elapsed_s": round(time.monotonic() - started, 3),
    }


CAPS_CYCLE = (
    Capability.READ_FILES,
    Capability.WRITE_FILES,
    Capability.CALL_EXTERNAL_API,
    Capability.EXECUTE_SHELL,
    Capability.SPEND_USD,
)


def eval_trust(missions: int = 200) -> dict:
    started = time.monotonic()
    auth = SovereignAuth()
    oracle: dict[str, list[int]] = {}
    rng = random.Random(20260314)
    behaviors = (
        WorkerBehavior.CONSISTENT_SUCCESS,
        WorkerBehavior.MIXED,
        WorkerBehavior.FREQUENT_FAILURE,
    )
    agreements = 0
    rows = []
    for i in range(missions):
        behavior = behaviors[i % 3]
        agent = f"agent-{i % 12:02d}"
        capability = CAPS_CYCLE[i % 5]
        expected_score = clamp_fold(oracle.get(agent, []))
        expected_grant = expected_score >= THRESHOLDS[capability]
        try:
            auth.check_permission(agent, capability)
            granted = True
        except Exception:
            granted = False
        agree = granted == expected_grant
        agreements += agree
        if not agree:
            rows.append(
                {
                    "mission": i + 1,
                    "agent": agent,
                    "capability": capability.value,
                    "expected_score": expected_score,
                    "granted": granted,
                    "expected_grant": expected_grant,
                }
            )
        # mission outcome per behavioral profile, mirrored into the oracle
        if behavior is WorkerBehavior.CONSISTENT_SUCCESS:
            succeeded = True
        elif behavior is WorkerBehavior.FREQUENT_FAILURE:
            succeeded = False
        else:
            succeeded = rng.random() < 0.5
        if succeeded:
            auth.record_audit_success(agent)
            oracle.setdefault(agent, []).append(5)
        else:
            auth.record_audit_failure(agent)
            oracle.setdefault(agent, []).append(-15)

    # escalation scripts
    scripts = []
    fresh = SovereignAuth()
    denied_at_55 = False
    fresh.record_audit_success("escalator")
    try:
        fresh.check_permission("escalator", Capability.EXECUTE_SHELL)
    except Exception:
        denied_at_55 = True
    fresh.record_audit_success("escalator")
    shell_at_60 = fresh.check_permission("escalator", Capability.EXECUTE_SHELL)
    scripts.append(
        {
            "script": "shell unlock after 2 successes (50->55->60)",
            "passed": denied_at_55 and shell_at_60 and fresh.score("escalator") == 60,
        }
    )
    for _ in range(4):
        fresh.record_audit_success("escalator")
    spend_at_80 = fresh.check_permission("escalator", Capability.SPEND_USD)
    scripts.append(
        {
            "script": "spend unlock after 6 successes (50->80)",
            "passed": spend_at_80 and fresh.score("escalator") == 80,
        }
    )
    faller = SovereignAuth()
    faller.record_audit_failure("faller")
    write_revoked = False
    try:
        faller.check_permission("faller", Capability.WRITE_FILES)
    except Exception:
        write_revoked = True
    scripts.append(
        {
            "script": "write revoked after 1 failure (50->35)",
            "passed": write_revoked and faller.score("faller") == 35,
        }
    )

    return {
        "axis": "trust",
        "note": (
            "gate decisions compared against the deterministic clamp-fold oracle "
            "over committed scores; boundary races are excluded by contract, so "
            "the target is full agreement"
        ),
        "missions": missions,
        "agreements": agreements,
        "agreement_rate": f"{agreements}/{missions}",
        "disagreements": rows,
        "escalation_scripts": scripts,
        "elapsed_s": round(time.monotonic() - started, 3),
    }


_MUTABLE_FIELDS = (
    "task_id",
    "kpi_name",
    "passed",
    "score",
    "reason",
    "suggested_fix",
    "timestamp_utc",
)


def _mutate(record: dict, field: str, rng: random.Random) -> dict:
    mutated = dict(record)
    if field == "passed":
        mutated["passed"] = not mutated["passed"]
    elif field == "score":
        from .canonical import RawNumber, render_basis_points, parse_basis_points

        bp = parse_basis_points(mutated["score"])
        mutated["score"] = RawNumber(render_basis_points((bp + 100) % 10001))
    elif field == "suggested_fix":
        mutated["suggested_fix"] = (
            None if mutated["suggested_fix"] else f"tampered-fix-{rng.randrange(1000)}"
        )
    elif field == "timestamp_utc":
        mutated["timestamp_utc"] = "2031" + mutated["timestamp_utc"][4:]
    else:
        mutated[field] = f"{mutated[field]}-tampered-{rng.randrange(1000)}"
    return mutated


def eval_audit(out_dir: Path | None = None, report_count: int = 1200) -> dict:
    started = time.monotonic()
    clock = ManualClock(datetime(2026, 3, 14, 0, 0, 0, tzinfo=timezone.utc))
    auth = SovereignAuth(clock=clock)
    trail_path = (Path(out_dir) / "eval_audit_trail.jsonl") if out_dir else None
    if trail_path is not None:
        trail_path.parent.mkdir(parents=True, exist_ok=True)
        if trail_path.exists():
            trail_path.unlink()
    review = ReviewEngine(
        judge=fixtures.default_judge(), auth=auth, trail_path=trail_path, clock=clock
    )
    charter = charter_from_document(_scenario_charter())
    kpi = charter.success_kpis[0]

    from .strategist import PlannedTask, TaskPriority
    from .workers import failure_output, success_output

    for i in range(report_count):
        task = PlannedTask(
            task_id=f"task-{i + 1}-general",
            description=f"Synthetic deliverable {i + 1} for trail generation",
            depends_on=(),
            required_skill="general",
            estimated_token_budget=4000,
            priority=TaskPriority.LOW,
            estimated_cost_usd_cents=4,
        )
        agent = f"agent-{i % 7:02d}"
        output = (
            success_output(task, agent) if i % 5 != 4 else failure_output(task, agent)
        )
        review.audit_task(task.task_id, output, kpi, agent)
        clock.advance(7)

    lines = review.trail_lines()
    total, failures = verify_trail_lines(lines)

    # randomized single-field mutations, all of which must be detected
    rng = random.Random(20260309)
    sampled = rng.sample(range(len(lines)), 100)
    detected = 0
    for j, line_idx in enumerate(sampled):
        record = parse_trail_line(lines[line_idx])
        field = _MUTABLE_FIELDS[j % len(_MUTABLE_FIELDS)]
        mutated = _mutate(record, field, rng)
        detected += not verify_report_integrity(mutated)

    golden_ok = compute_proof_hash(**GOLDEN_REPORT) == GOLDEN_PROOF_HASH

    return {
        "axis": "audit",
        "reports": total,
        "hash_mismatches": len(failures),
        "failing_lines": failures,
        "mutations_tested": len(sampled),
        "mutations_detected": detected,
        "golden_vector_ok": golden_ok,
        "trail_path": str(trail_path) if trail_path else None,
        "elapsed_s": round(time.monotonic() - started, 3),
    }


def run_all(out_dir: Path | None = None) -> dict:
    return {
        "fiscal": eval_fiscal(),
        "trust": eval_trust(),
        "audit": eval_audit(out_dir=out_dir),
    }


def render_markdown(report: dict) -> str:
    axis = report["axis"]
    lines = [f"## Evaluation: {axis}", ""]
    if axis == "fiscal":
        lines += [
            f"- violation scenarios blocked: **{report['block_rate']}**",
            f"- compliant controls passed: **{report['controls_passed']}/{report['controls']}**",
            f"- elapsed: {report['elapsed_s']}s",
            "",
            "| # | category | expected | raised | check | token entries | blocked |",
            "|---|----------|----------|--------|-------|---------------|---------|",
        ]
        for row in report["rows"]:
            lines.append(
                f"| {row['scenario']} | {row['category']} | {row['expected']} "
                f"| {row['raised']} | {row['check']} | {row['token_entries_added']} "
                f"| {'yes' if row['blocked'] else 'NO'} |"
            )
        lines += ["", "| control category | final state | tokens | passed |", "|---|---|---|---|"]
        for row in report["control_rows"]:
            lines.append(
                f"| {row['category']} | {row['state']} | {row['tokens_spent']} "
                f"| {'yes' if row['passed'] else 'NO'} |"
            )
    elif axis == "trust":
        lines += [
            f"> {report['note']}",
            "",
            f"- gating agreement: **{report['agreement_rate']}**",
            f"- elapsed: {report['elapsed_s']}s",
            "",
            "| escalation script | passed |",
            "|---|---|",
        ]
        for row in report["escalation_scripts"]:
            lines.append(f"| {row['script']} | {'yes' if row['passed'] else 'NO'} |")
        if report["disagreements"]:
            lines += ["", "### Disagreements", ""]
            for row in report["disagreements"]:
                lines.append(f"- mission {row['mission']}: {row}")
    elif axis == "audit":
        lines += [
            f"- reports verified: **{report['reports']}**",
            f"- hash mismatches / collisions: **{report['hash_mismatches']}**",
            f"- mutations detected: **{report['mutations_detected']}/{report['mutations_tested']}**",
            f"- golden proof-hash vector: {'ok' if report['golden_vector_ok'] else 'MISMATCH'}",
            f"- elapsed: {report['elapsed_s']}s",
        ]
    return "\n".join(lines)


def write_reports(report: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for axis, payload in report.items():
        (out_dir / f"eval_{axis}.json").write_text(
            canonical_dumps_safe(payload) + "\n", encoding="utf-8"
        )
        (out_dir / f"eval_{axis}.md").write_text(render_markdown(payload) + "\n", encoding="utf-8")


def canonical_dumps_safe(value) -> str:
    """JSON for report files (floats allowed; reports are not hashed)."""
    import json

    return json.dumps(value, indent=2, sort_keys=True)
