"""Strategist: turns a natural-language goal plus Charter competencies into a
validated TaskPlan DAG.

A pluggable backend may generate the raw plan as a structured document;
normalization rewrites IDs to ``task-{n}-{skill}``, remaps dependencies,
validates skills against the Charter, and rejects cycles. Without a
backend, a deterministic keyword fallback produces a single-task plan.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Protocol, Sequence

from .auth import Capability
from .charter import Charter
from .errors import PlanRejected

DEFAULT_TOKEN_BUDGET = 4000
# Plan-time cost estimate: one cent per thousand budgeted tokens.
CENTS_PER_1000_TOKENS = 1

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")

STOPWORDS = frozenset(
    "a an and are as at be but by for from has have if in into is it its "
    "of on or that the their then there these this to was were will with".split()
)


class TaskPriority(str, Enum):
    HIGH = "HIGH"
    LOW = "LOW"


@dataclass(frozen=True)
class PlannedTask:
    task_id: str
    description: str
    depends_on: tuple[str, ...]
    required_skill: str
    estimated_token_budget: int
    priority: TaskPriority
    estimated_cost_usd_cents: int
    kpi_name: str | None = None
    required_capability: Capability = Capability.WRITE_FILES


@dataclass(frozen=True)
class TaskPlan:
    goal: str
    tasks: tuple[PlannedTask, ...]

    def task(self, task_id: str) -> PlannedTask:
        for t in self.tasks:
            if t.task_id == task_id:
                return t
        raise KeyError(task_id)

    def total_estimated_cost_usd_cents(self) -> int:
        return sum(t.estimated_cost_usd_cents for t in self.tasks)


class PlannerBackend(Protocol):
    def generate(
        self, goal: str, charter: Charter, reflections: Sequence[Mapping] = ()
    ) -> Mapping | None:
        """Return a raw plan document {"tasks": [{...}, ...]}, or None to
        decline (the Strategist then uses the keyword fallback)."""
        ...


@dataclass
class StaticPlanBackend:
    """Replays canned raw-plan documents keyed by goal (test/demo fixture);
    unknown goals are declined."""

    plans: dict[str, Mapping] = field(default_factory=dict)

    def generate(
        self, goal: str, charter: Charter, reflections: Sequence[Mapping] = ()
    ) -> Mapping | None:
        return self.plans.get(goal)


def tokenize(text: str) -> set[str]:
    """Lowercase, split on non-alphanumerics, drop stopwords."""
    return {tok for tok in _TOKEN_SPLIT.split(text.lower()) if tok and tok not in STOPWORDS}


def default_cost_for_budget(token_budget: int) -> int:
    return max(1, -(-token_budget * CENTS_PER_1000_TOKENS // 1000))  # ceil division


def topological_order(plan: TaskPlan) -> list[PlannedTask]:
    """Kahn's algorithm; among simultaneously-ready tasks, ascending task_id.

    Raises PlanRejected when the dependency graph has a cycle.
    """
    by_id = {t.task_id: t for t in plan.tasks}
    pending = {t.task_id: set(t.depends_on) for t in plan.tasks}
    order: list[PlannedTask] = []
    while pending:
        ready = sorted(tid for tid, deps in pending.items() if not deps)
        if not ready:
            cyclic = sorted(pending)
            raise PlanRejected(f"dependency cycle among tasks {cyclic}", task_ref=cyclic[0])
        for tid in ready:
            order.append(by_id[tid])
            del pending[tid]
            for deps in pending.values():
                deps.discard(tid)
    return order


def validate_plan(plan: TaskPlan, charter: Charter) -> TaskPlan:
    """Shared validator: every plan returned by any path satisfies these."""
    seen: set[str] = set()
    competencies = charter.competency_names()
    for task in plan.tasks:
        if task.task_id in seen:
            raise PlanRejected(f"duplicate task id '{task.task_id}'", task_ref=task.task_id)
        seen.add(task.task_id)
        if task.required_skill not in competencies:
            raise PlanRejected(
                f"task '{task.task_id}' requires unknown skill '{task.required_skill}'",
                task_ref=task.task_id,
            )
        if task.estimated_token_budget <= 0:
            raise PlanRejected(
                f"task '{task.task_id}' has non-positive token budget", task_ref=task.task_id
            )
        if task.estimated_cost_usd_cents < 0:
            raise PlanRejected(
                f"task '{task.task_id}' has negative estimated cost", task_ref=task.task_id
            )
        if task.kpi_name is not None and task.kpi_name not in charter.kpi_names():
            raise PlanRejected(
                f"task '{task.task_id}' references unknown KPI '{task.kpi_name}'",
                task_ref=task.task_id,
            )
    for task in plan.tasks:
        for dep in task.depends_on:
            if dep not in seen:
                raise PlanRejected(
                    f"task '{task.task_id}' depends on unknown task '{dep}'",
                    task_ref=task.task_id,
                )
    topological_order(plan)  # rejects cycles
    return plan


def _parse_priority(value: object, task_ref: str) -> TaskPriority:
    if value is None:
        return TaskPriority.LOW
    if isinstance(value, TaskPriority):
        return value
    if isinstance(value, str):
        try:
            return TaskPriority(value.upper())
        except ValueError:
            pass
    raise PlanRejected(f"task '{task_ref}' has invalid priority {value!r}", task_ref=task_ref)


def _parse_capability(value: object, task_ref: str) -> Capability:
    if value is None:
        return Capability.WRITE_FILES
    if isinstance(value, Capability):
        return value
    if isinstance(value, str):
        try:
            return Capability(value.upper())
        except ValueError:
            pass
    raise PlanRejected(f"task '{task_ref}' has invalid capability {value!r}", task_ref=task_ref)


class Strategist:
    def __init__(self, backend: PlannerBackend | None = None):
        self._backend = backend

    def plan(
        self, goal: str, charter: Charter, reflections: Sequence[Mapping] = ()
    ) -> TaskPlan:
        if not goal.strip():
            raise PlanRejected("goal must be non-empty")
        raw = self._backend.generate(goal, charter, reflections) if self._backend else None
        if raw is None:
            return self.fallback_plan(goal, charter)
        return self.normalize(raw, charter, goal=goal)

    def normalize(self, raw: Mapping, charter: Charter, goal: str | None = None) -> TaskPlan:
        """Rewrite IDs to task-{n}-{skill}, remap dependencies, validate."""
        raw_tasks = raw.get("tasks")
        if not isinstance(raw_tasks, (list, tuple)) or not raw_tasks:
            raise PlanRejected("raw plan has no tasks")

        raw_ids: list[str] = []
        for i, item in enumerate(raw_tasks, 1):
            raw_id = str(item.get("id", f"t{i}"))
            if raw_id in raw_ids:
                raise PlanRejected(
                    f"ambiguous dependency: duplicate raw task id '{raw_id}'", task_ref=raw_id
                )
            raw_ids.append(raw_id)

        competencies = charter.competency_names()
        id_map: dict[str, str] = {}
        skills: list[str] = []
        for i, item in enumerate(raw_tasks, 1):
            skill = item.get("skill")
            if skill not in competencies:
                raise PlanRejected(
                    f"task '{raw_ids[i - 1]}' requires unknown skill '{skill}'",
                    task_ref=raw_ids[i - 1],
                )
            skills.append(skill)
            id_map[raw_ids[i - 1]] = f"task-{i}-{skill}"

        tasks: list[PlannedTask] = []
        for i, item in enumerate(raw_tasks, 1):
            raw_id = raw_ids[i - 1]
            deps = item.get("deps", ())
            mapped_deps = []
            for dep in deps:
                if dep not in id_map:
                    raise PlanRejected(
                        f"task '{raw_id}' depends on unknown task '{dep}'", task_ref=raw_id
                    )
                mapped_deps.append(id_map[dep])
            budget = item.get("budget", DEFAULT_TOKEN_BUDGET)
            if not isinstance(budget, int) or budget <= 0:
                raise PlanRejected(
                    f"task '{raw_id}' has invalid token budget {budget!r}", task_ref=raw_id
                )
            cost = item.get("cost_usd_cents", default_cost_for_budget(budget))
            if not isinstance(cost, int) or cost < 0:
                raise PlanRejected(
                    f"task '{raw_id}' has invalid cost {cost!r}", task_ref=raw_id
                )
            tasks.append(
                PlannedTask(
                    task_id=id_map[raw_id],
                    description=str(item.get("description", "")),
                    depends_on=tuple(mapped_deps),
                    required_skill=skills[i - 1],
                    estimated_token_budget=budget,
                    priority=_parse_priority(item.get("priority"), raw_id),
                    estimated_cost_usd_cents=cost,
                    kpi_name=item.get("kpi"),
                    required_capability=_parse_capability(item.get("capability"), raw_id),
                )
            )

        plan = TaskPlan(goal=goal if goal is not None else str(raw.get("goal", "")), tasks=tuple(tasks))
        return validate_plan(plan, charter)

    def fallback_plan(self, goal: str, charter: Charter) -> TaskPlan:
        """Keyword-matched single task with the default 4,000-token budget."""
        goal_tokens = tokenize(goal)
        best = None
        for index, comp in enumerate(charter.core_competencies):
            overlap = len(goal_tokens & (tokenize(comp.name) | tokenize(comp.description)))
            # ties: higher priority weight, then charter list order
            key = (-overlap, -comp.priority, index)
            if best is None or key < best[0]:
                best = (key, comp)
        assert best is not None  # Charter guarantees >= 1 competency
        skill = best[1].name
        task = PlannedTask(
            task_id=f"task-1-{skill}",
            description=goal,
            depends_on=(),
            required_skill=skill,
            estimated_token_budget=DEFAULT_TOKEN_BUDGET,
            priority=TaskPriority.LOW,
            estimated_cost_usd_cents=default_cost_for_budget(DEFAULT_TOKEN_BUDGET),
        )
        return validate_plan(TaskPlan(goal=goal, tasks=(task,)), charter)


def raw_document(plan: TaskPlan) -> dict:
    """A TaskPlan re-encoded as a raw-plan document (normalize is idempotent
    over this encoding)."""
    return {
        "goal": plan.goal,
        "tasks": [
            {
                "id": t.task_id,
                "description": t.description,
                "skill": t.required_skill,
                "deps": list(t.depends_on),
                "budget": t.estimated_token_budget,
                "priority": t.priority.value,
                "cost_usd_cents": t.estimated_cost_usd_cents,
                **({"kpi": t.kpi_name} if t.kpi_name is not None else {}),
                **(
                    {"capability": t.required_capability.value}
                    if t.required_capability is not Capability.WRITE_FILES
                    else {}
                ),
            }
            for t in plan.tasks
        ],
    }
