"""Trust escalation: a new worker earns its way from restricted to
fully authorized, with on-the-spot cryptographic verification of the
audit trail that drove every score change.

Run:  python demos/03_trust_escalation.py
"""

from agentgov.auth import Capability, PermissionDeniedError, SovereignAuth, THRESHOLDS
from agentgov.charter import load_charter
from agentgov.review import ReviewEngine, verify_trail_lines
from agentgov import fixtures
from agentgov.strategist import PlannedTask, TaskPriority
from agentgov.workers import WorkerBehavior, WorkerProfile, BidPolicy

auth = SovereignAuth()
review = ReviewEngine(judge=fixtures.default_judge(), auth=auth)
kpi = load_charter(fixtures.DEFAULT_CHARTER_YAML).success_kpis[0]
worker = WorkerProfile(
    worker_id="worker-new",
    skills=frozenset({"email_writing"}),
    bid_policy=BidPolicy.of(4, 120, "0.7", "sim-medium"),
    behavior=WorkerBehavior.CONSISTENT_SUCCESS,
    token_rate=1200,
)


def show_permissions(agent_id):
    score = auth.score(agent_id)
    line = []
    for cap in Capability:
        try:
            auth.check_permission(agent_id, cap)
            line.append(f"{cap.value}:granted")
        except PermissionDeniedError:
            line.append(f"{cap.value}:denied({THRESHOLDS[cap]})")
    print(f"  score {score:3d}  " + "  ".join(line))


print("fresh worker at the base score:")
show_permissions("worker-new")
print()

print("six audited successes, one at a time:")
for i in range(1, 7):
    task = PlannedTask(
        task_id=f"task-{i}-email_writing",
        description=f"Escalation exercise {i}",
        depends_on=(),
        required_skill="email_writing",
        estimated_token_budget=4000,
        priority=TaskPriority.LOW,
        estimated_cost_usd_cents=4,
    )
    result = worker.execute(task, max_tokens=4000)
    report = review.audit_task(task.task_id, result.output, kpi, "worker-new")
    print(f"audit {i}: score {report.score_bp / 10000:.2f} "
          f"passed={report.passed} proof={report.proof_hash[:16]}…")
    show_permissions("worker-new")
print()

print("one failure undoes three successes:")
review.audit_task("task-7-email_writing", "empty stub", kpi, "worker-new")
show_permissions("worker-new")
print()

total, failures = verify_trail_lines(review.trail_lines())
print(f"trail verification: {total} report(s), {len(failures)} mismatch(es)")
for line in review.trail_lines()[:2]:
    print(f"  {line[:100]}…")
