"""End-to-end governed mission.

A goal enters the pipeline, the planner decomposes it into a task DAG,
the treasury clears every cost, workers bid, the winner executes under
its earned permissions, and the review engine seals each output with a
proof hash. The decision stream below shows every gate firing in order.

Run:  python demos/01_governed_mission.py
"""

from agentgov import fixtures

engine = fixtures.build_engine()

print(f"mission: {fixtures.GOAL_EMAIL_SEQUENCE!r} with 500c revenue")
print(f"opening balance: {engine.ledger.total_usd_cents()}c")
print()

job = engine.submit_job(fixtures.GOAL_EMAIL_SEQUENCE, revenue_cents=500)
engine.process_next()
job = engine.job(job.job_id)

print(f"job {job.job_id} -> {job.state.value}")
for task_id, state in job.task_states.items():
    print(f"  {task_id}: {state}")
print()

print("decision stream:")
for event in engine.decision_stream():
    tag = f" [{event.task_id}]" if event.task_id else ""
    print(f"  {event.seq:3d} {event.role.value:6s} {event.message}{tag}")
print()

snapshot = engine.ledger.snapshot()
print(f"closing balance: {snapshot.balance_usd_cents}c "
      f"(spent {snapshot.daily_debits_usd_cents}c, earned 500c, "
      f"{snapshot.total_tokens_spent} tokens)")

total, failures = engine.review.verify()
print(f"audit trail: {total} sealed report(s), {len(failures)} verification failure(s)")

print()
print("deliverable:")
print(job.deliverable)
