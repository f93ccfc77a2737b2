from __future__ import annotations

import pytest

from agentgov import fixtures
from agentgov.charter import charter_from_document, charter_to_document
from agentgov.engine import AUDIT_FAILURE_REASON, JobState, LEGAL_TRANSITIONS, Role
from agentgov.errors import InvalidState
from agentgov.ledger import EntryKind
from agentgov.strategist import StaticPlanBackend, Strategist
from agentgov.treasury import FiscalInsolvencyError, UnprofitableJobError
from agentgov.workers import BidPolicy, WorkerBehavior, WorkerProfile, WorkerRegistry


def test_case_study_mission_end_to_end(engine):
    outcome = engine.run_mission_with_audit(fixtures.GOAL_EMAIL_SEQUENCE, 500)
    assert [t.task_id for t in outcome.plan.tasks] == [
        "task-1-research",
        "task-2-email_writing",
        "task-3-email_writing",
    ]
    assert outcome.plan.total_estimated_cost_usd_cents() == 12
    assert outcome.all_passed
    assert len(outcome.audits) == 3
    assert all(a.passed for a in outcome.audits)
    assert engine.review.report_count() == 3
    # the auction winner earned +5 per passing audit
    assert engine.auth.score("worker-alpha") == 65  # 55 + 2 audits
    assert engine.auth.score("worker-research") == 55


def test_unprofitable_mission_blocks_before_any_execution(engine):
    tokens_before = engine.ledger.total_tokens_spent()
    # plan costs 12c; with 10c revenue the max allowed cost is 6c
    with pytest.raises(UnprofitableJobError):
        engine.run_mission_with_audit(fixtures.GOAL_EMAIL_SEQUENCE, 10)
    assert engine.ledger.total_tokens_spent() == tokens_before
    assert engine.review.report_count() == 0


def test_winner_without_capability_fails_task_not_executed(charter):
    raw = {
        "tasks": [
            {
                "id": "a",
                "description": "needs shell",
                "skill": "email_writing",
                "capability": "EXECUTE_SHELL",
            }
        ]
    }
    engine = _engine_with_plan(charter, raw)
    outcome = engine.run_mission_with_audit("shell goal")
    assert not outcome.results
    assert outcome.failures[0].code == "PERMISSION_DENIED"
    assert engine.ledger.total_tokens_spent() == 0
    assert not any(e.kind is EntryKind.USD_DEBIT for e in engine.ledger.entries())


def _engine_with_plan(charter, raw_plan, goal="shell goal", workers=None, funding=50_000):
    registry = WorkerRegistry(
        workers
        or [
            WorkerProfile(
                worker_id="solo",
                skills=frozenset({"email_writing", "research"}),
                bid_policy=BidPolicy.of(4, 100, "0.7", "sim"),
                behavior=WorkerBehavior.CONSISTENT_SUCCESS,
                token_rate=800,
            )
        ]
    )
    engine_ = __import__("agentgov.engine", fromlist=["GovernanceEngine"]).GovernanceEngine(
        charter,
        registry,
        fixtures.default_judge(),
        strategist=Strategist(StaticPlanBackend({goal: raw_plan})),
        payment_provider=fixtures.MockPaymentProvider(),
    )
    engine_.ledger.append(EntryKind.USD_CREDIT, funding, purpose="funding")
    return engine_


def test_dependents_of_failed_task_are_skipped(charter):
    raw = {
        "tasks": [
            {"id": "a", "description": "will fail", "skill": "email_writing"},
            {"id": "b", "description": "depends on a", "skill": "email_writing", "deps": ["a"]},
        ]
    }
    failing_worker = WorkerProfile(
        worker_id="flaky",
        skills=frozenset({"email_writing"}),
        bid_policy=BidPolicy.of(4, 100, "0.7", "sim"),
        behavior=WorkerBehavior.FREQUENT_FAILURE,
        token_rate=800,
    )
    engine = _engine_with_plan(charter, raw, workers=[failing_worker])
    outcome = engine.run_mission_with_audit("shell goal")
    codes = {f.task_id: f.code for f in outcome.failures}
    assert codes["task-1-email_writing"] == "AUDIT_FAILED"
    assert codes["task-2-email_writing"] == "DEPENDENCY_FAILED"
    # the skipped dependent consumed nothing
    assert not any(
        e.task_id == "task-2-email_writing" for e in engine.ledger.entries()
    )


def test_dispatch_time_denial_spends_nothing(charter):
    # two independent 600c tasks under a 1000c daily cap: the first dispatches,
    # the second passes its plan estimate upfront but is denied at dispatch
    doc = charter_to_document(charter)
    doc["fiscal_boundaries"]["daily_burn_max_usd"] = 10.0
    charter = charter_from_document(doc)
    raw = {
        "tasks": [
            {"id": "a", "description": "first large task", "skill": "email_writing",
             "cost_usd_cents": 600},
            {"id": "b", "description": "second large task", "skill": "email_writing",
             "cost_usd_cents": 600},
        ]
    }
    workers = [
        WorkerProfile(
            worker_id="pricey",
            skills=frozenset({"email_writing"}),
            bid_policy=BidPolicy.of(600, 100, "0.7", "sim"),
            behavior=WorkerBehavior.CONSISTENT_SUCCESS,
            token_rate=800,
        )
    ]
    engine = _engine_with_plan(charter, raw, workers=workers)
    outcome = engine.run_mission_with_audit("shell goal")
    assert len(outcome.audits) == 1
    denied = [f for f in outcome.failures if f.code == "FISCAL_INSOLVENCY"]
    assert len(denied) == 1
    denied_task = denied[0].task_id
    assert "Daily burn cap exceeded: 1200c > 1000c cap" in denied[0].reason
    assert not any(
        e.task_id == denied_task and e.kind is EntryKind.TOKEN_DEBIT
        for e in engine.ledger.entries()
    )


def test_gate_ordering_in_event_stream(engine):
    engine.run_mission_with_audit(fixtures.GOAL_EMAIL_SEQUENCE, 500)
    events = engine.decision_stream()
    for task_id in ("task-1-research", "task-2-email_writing", "task-3-email_writing"):
        approve = next(
            e.seq for e in events
            if e.task_id == task_id and e.role is Role.CFO and "dispatch approved" in e.message
        )
        dispatch = next(
            e.seq for e in events
            if e.task_id == task_id and e.role is Role.SYSTEM and "dispatched" in e.message
        )
        audit = next(
            e.seq for e in events if e.task_id == task_id and e.role is Role.AUDIT
        )
        assert approve < dispatch < audit


def test_mission_events_in_pipeline_order(engine):
    engine.run_mission_with_audit(fixtures.GOAL_EMAIL_SEQUENCE, 500)
    events = engine.decision_stream()
    first_ceo = next(e.seq for e in events if e.role is Role.CEO)
    first_cfo = next(e.seq for e in events if e.role is Role.CFO)
    first_audit = next(e.seq for e in events if e.role is Role.AUDIT)
    assert first_ceo < first_cfo < first_audit
    seqs = [e.seq for e in events]
    assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)


def test_replay_determinism(tmp_path):
    def run():
        engine = fixtures.build_engine()
        outcome = engine.run_mission_with_audit(fixtures.GOAL_EMAIL_SEQUENCE, 500)
        winners = [
            e.payload["winner"] for e in engine.decision_stream() if "winner" in e.payload
        ]
        return (
            [t.task_id for t in outcome.plan.tasks],
            [r.output for r in outcome.results],
            [(a.task_id, a.score_bp, a.passed) for a in outcome.audits],
            winners,
            [(e.role, e.message) for e in engine.decision_stream()],
        )

    assert run() == run()


def test_submit_creates_pending_jobs_with_distinct_ids(engine):
    a = engine.submit_job("goal one")
    b = engine.submit_job("goal one")
    assert a.state is JobState.PENDING and b.state is JobState.PENDING
    assert a.job_id != b.job_id


def test_queue_is_fifo(engine):
    first = engine.submit_job(fixtures.GOAL_EMAIL_SEQUENCE, 500)
    second = engine.submit_job("research the market")
    done = engine.process_next()
    assert done.job_id == first.job_id
    done = engine.process_next()
    assert done.job_id == second.job_id


def test_completed_job_collects_payment_once(engine):
    job = engine.submit_job(fixtures.GOAL_EMAIL_SEQUENCE, 500)
    engine.process_next()
    job = engine.job(job.job_id)
    assert job.state is JobState.COMPLETED
    assert job.deliverable and job.deliverable.startswith("# Deliverable")
    credits = [
        e for e in engine.ledger.entries()
        if e.kind is EntryKind.USD_CREDIT and "revenue" in e.purpose
    ]
    assert len(credits) == 1 and credits[0].amount == 500


def test_failed_audit_gives_canonical_failure_reason(tmp_path):
    engine = fixtures.build_engine(demo=True)
    job = engine.submit_job(fixtures.GOAL_DOOMED_SUMMARY, 300)
    engine.process_next()
    job = engine.job(job.job_id)
    assert job.state is JobState.FAILED
    assert job.failure_reason == AUDIT_FAILURE_REASON
    assert job.task_states == {"task-1-summarization": "failed"}


def test_unprofitable_job_fails_without_running(engine):
    job = engine.submit_job(fixtures.GOAL_EMAIL_SEQUENCE, 10)
    engine.process_next()
    job = engine.job(job.job_id)
    assert job.state is JobState.FAILED
    assert "exceeds max" in job.failure_reason
    # never entered RUNNING: no running/approved events for this job
    states = [
        e.message for e in engine.decision_stream() if e.job_id == job.job_id
        and e.message.startswith("job ")
    ]
    assert "job running" not in states


def test_retry_resets_failed_job(engine):
    engine_demo = fixtures.build_engine(demo=True)
    job = engine_demo.submit_job(fixtures.GOAL_DOOMED_SUMMARY)
    engine_demo.process_next()
    assert engine_demo.job(job.job_id).state is JobState.FAILED
    retried = engine_demo.retry_job(job.job_id)
    assert retried.state is JobState.PENDING
    trail_before = engine_demo.review.report_count()
    engine_demo.process_next()
    assert engine_demo.job(job.job_id).state is JobState.FAILED
    assert engine_demo.review.report_count() > trail_before  # new trail entries appended


def test_retry_of_completed_job_rejected(engine):
    job = engine.submit_job(fixtures.GOAL_EMAIL_SEQUENCE, 500)
    engine.process_next()
    with pytest.raises(InvalidState):
        engine.retry_job(job.job_id)


def test_job_state_transitions_stay_legal(engine):
    observed = []

    original = engine._transition

    def spy(job, new_state):
        observed.append((job.state, new_state))
        original(job, new_state)

    engine._transition = spy
    engine.submit_job(fixtures.GOAL_EMAIL_SEQUENCE, 500)
    engine.submit_job(fixtures.GOAL_EMAIL_SEQUENCE, 10)
    engine.process_next()
    engine.process_next()
    for old, new in observed:
        assert new in LEGAL_TRANSITIONS[old]


def test_edit_and_delete_lifecycle(engine):
    job = engine.submit_job("first goal")
    engine.update_job(job.job_id, goal="second goal", revenue_cents=700)
    assert engine.job(job.job_id).goal == "second goal"
    assert engine.job(job.job_id).revenue_usd_cents == 700
    engine.delete_job(job.job_id)
    with pytest.raises(KeyError):
        engine.job(job.job_id)


def test_edit_completed_job_rejected(engine):
    job = engine.submit_job(fixtures.GOAL_EMAIL_SEQUENCE, 500)
    engine.process_next()
    with pytest.raises(InvalidState):
        engine.update_job(job.job_id, goal="too late")


def test_decision_stream_since(engine):
    engine.submit_job("a goal")
    all_events = engine.decision_stream(0)
    assert engine.decision_stream(all_events[-1].seq) == ()
    assert engine.decision_stream(all_events[0].seq) == all_events[1:]


def test_charter_swap_governs_next_mission(engine):
    doc = charter_to_document(engine.charter)
    doc["fiscal_boundaries"]["daily_burn_max_usd"] = 0.03  # below one 4c estimate
    engine.replace_charter(charter_from_document(doc))
    with pytest.raises(FiscalInsolvencyError):
        engine.run_mission_with_audit(fixtures.GOAL_EMAIL_SEQUENCE)


def test_plan_rejection_fails_job(engine):
    engine.strategist = Strategist(
        StaticPlanBackend({"bad": {"tasks": [{"id": "x", "skill": "alchemy", "description": "d"}]}})
    )
    job = engine.submit_job("bad")
    engine.process_next()
    assert engine.job(job.job_id).state is JobState.FAILED
    assert "alchemy" in engine.job(job.job_id).failure_reason


def test_token_usage_view(engine):
    engine.run_mission_with_audit(fixtures.GOAL_EMAIL_SEQUENCE, 500)
    usage = engine.token_usage()
    assert {u["task_id"] for u in usage} == {
        "task-1-research", "task-2-email_writing", "task-3-email_writing"
    }
    assert all(u["tokens"] > 0 for u in usage)
