"""Fiscal denials under budget and profitability constraints.

The same task stream meets two different charters: a permissive one that
clears everything, and a tight one whose daily cap and margin floor halt
the pipeline before a single token is spent. Swapping the YAML document
is the only difference.

Run:  python demos/02_fiscal_denials.py
"""

from agentgov import fixtures
from agentgov.charter import charter_from_document, charter_to_document, load_charter
from agentgov.treasury import FiscalInsolvencyError, UnprofitableJobError

# -- permissive charter: the mission sails through ---------------------------

engine = fixtures.build_engine()
outcome = engine.run_mission_with_audit(fixtures.GOAL_EMAIL_SEQUENCE, 500)
print(f"permissive charter: {len(outcome.audits)}/{len(outcome.plan.tasks)} tasks passed audit")
print(f"  tokens consumed: {engine.ledger.total_tokens_spent()}")
print()

# -- tight daily cap: denial before any execution ------------------------------

doc = charter_to_document(load_charter(fixtures.DEFAULT_CHARTER_YAML))
doc["fiscal_boundaries"]["daily_burn_max_usd"] = 0.03  # three cents a day
tight = fixtures.build_engine(charter_from_document(doc))
try:
    tight.run_mission_with_audit(fixtures.GOAL_EMAIL_SEQUENCE, 500)
except FiscalInsolvencyError as err:
    print(f"tight daily cap: {err}")
    print(f"  failed check: {err.check_failed.value}")
    print(f"  tokens consumed: {tight.ledger.total_tokens_spent()} (halted pre-dispatch)")
print()

# -- margin floor: unprofitable work is refused --------------------------------

margin_engine = fixtures.build_engine()
try:
    # the plan costs 12c; 10c of revenue only supports 6c of cost at a 35% floor
    margin_engine.run_mission_with_audit(fixtures.GOAL_EMAIL_SEQUENCE, 10)
except UnprofitableJobError as err:
    print(f"margin floor: {err}")
    print(f"  max allowed cost: {err.max_cost_usd_cents}c")
    print(f"  tokens consumed: {margin_engine.ledger.total_tokens_spent()}")
