"""ReviewEngine: audits task outputs against Charter KPIs.

A pluggable Judge scores each output on a 0-1 scale; scores >= 0.50 pass.
Every AuditReport is sealed with a SHA-256 proof hash over the canonical
JSON of its other seven fields, appended to a JSONL trail, and fed back
into TrustScores (+5 pass / -15 fail). Failed audits persist a
ReflectionObject so retries can avoid repeating the mistake.

Scores are held as integer basis points (0-10000) and rendered with a
fixed decimal formatter, so the hashed payload is byte-identical across
runs and languages.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Protocol

from .auth import SovereignAuth
from .canonical import (
    RawNumber,
    canonical_bytes,
    parse_basis_points,
    render_basis_points,
    sha256_hex,
)
from .charter import KpiSpec
from .clock import Clock, format_timestamp, utc_now

PASS_THRESHOLD_BP = 5000

KEYWORD_WEIGHT = Fraction(6, 10)
LENGTH_WEIGHT = Fraction(2, 10)
MARKER_WEIGHT = Fraction(2, 10)


@dataclass(frozen=True)
class JudgeVerdict:
    score: Fraction  # within [0, 1]
    reason: str
    suggested_fix: str | None = None

    def __post_init__(self):
        if not (0 <= self.score <= 1):
            raise ValueError(f"judge score must be within [0, 1], got {self.score}")


@dataclass(frozen=True)
class JudgeRule:
    """Deterministic scoring rule for one KPI: keyword coverage (0.6),
    length bounds (0.2), structure markers (0.2)."""

    required_keywords: tuple[str, ...]
    min_length: int
    max_length: int
    required_markers: tuple[str, ...] = ()


class Judge(Protocol):
    def judge(self, output: str, kpi: KpiSpec) -> JudgeVerdict: ...


class RuleJudge:
    """Default deterministic judge; external judges plug in behind the same
    verdict contract (a backend failure raises JudgeUnavailable and is
    treated as task failure, never a pass)."""

    def __init__(self, rules: Mapping[str, JudgeRule], default_rule: JudgeRule | None = None):
        self._rules = dict(rules)
        self._default = default_rule

    def rule_for(self, kpi: KpiSpec) -> JudgeRule:
        rule = self._rules.get(kpi.name, self._default)
        if rule is None:
            raise KeyError(f"no judge rule configured for KPI '{kpi.name}'")
        return rule

    def judge(self, output: str, kpi: KpiSpec) -> JudgeVerdict:
        rule = self.rule_for(kpi)
        lowered = output.lower()
        matched = [kw for kw in rule.required_keywords if kw.lower() in lowered]
        keyword_frac = (
            Fraction(len(matched), len(rule.required_keywords))
            if rule.required_keywords
            else Fraction(1)
        )
        length_ok = rule.min_length <= len(output) <= rule.max_length
        markers_ok = all(marker in output for marker in rule.required_markers)

        score = (
            KEYWORD_WEIGHT * keyword_frac
            + LENGTH_WEIGHT * (1 if length_ok else 0)
            + MARKER_WEIGHT * (1 if markers_ok else 0)
        )

        parts = [
            f"matched {len(matched)}/{len(rule.required_keywords)} required keywords",
            f"length {'within' if length_ok else 'outside'} "
            f"[{rule.min_length}, {rule.max_length}]",
            f"structure markers {'present' if markers_ok else 'missing'}",
        ]
        fixes = []
        missing = [kw for kw in rule.required_keywords if kw not in matched]
        if missing:
            fixes.append(f"include required keywords: {', '.join(missing)}")
        if not length_ok:
            fixes.append(
                f"keep output length within [{rule.min_length}, {rule.max_length}] characters"
            )
        if not markers_ok:
            fixes.append(f"add structure markers: {', '.join(rule.required_markers)}")
        return JudgeVerdict(
            score=score,
            reason="; ".join(parts),
            suggested_fix="; ".join(fixes) if fixes else None,
        )


def score_to_basis_points(score: Fraction) -> int:
    """Exact half-up rounding of a 0-1 rational onto the basis-point grid."""
    scaled = score * 10000
    quotient, remainder = divmod(scaled.numerator, scaled.denominator)
    if 2 * remainder >= scaled.denominator:
        quotient += 1
    return quotient


@dataclass(frozen=True)
class AuditReport:
    task_id: str
    kpi_name: str
    passed: bool
    score_bp: int  # basis points, 0..10000
    reason: str
    suggested_fix: str | None
    timestamp_utc: datetime
    proof_hash: str

    def to_record(self) -> dict:
        """The trail-line form: all eight members, canonical key order."""
        record = _canonical_payload(
            task_id=self.task_id,
            kpi_name=self.kpi_name,
            passed=self.passed,
            score_bp=self.score_bp,
            reason=self.reason,
            suggested_fix=self.suggested_fix,
            timestamp_utc=format_timestamp(self.timestamp_utc),
        )
        record["proof_hash"] = self.proof_hash
        return record


@dataclass(frozen=True)
class ReflectionObject:
    task_id: str
    kpi_name: str
    failure_reason: str
    suggested_fix: str | None
    timestamp_utc: datetime


class ReflectionStore:
    """Failed-audit memory handed back to the planner on retry."""

    def __init__(self):
        self._items: list[ReflectionObject] = []

    def add(self, reflection: ReflectionObject) -> None:
        self._items.append(reflection)

    def all(self) -> tuple[ReflectionObject, ...]:
        return tuple(self._items)

    def for_task(self, task_id: str) -> tuple[ReflectionObject, ...]:
        return tuple(r for r in self._items if r.task_id == task_id)

    def as_planner_context(self, task_ids: list[str] | None = None) -> list[dict]:
        items = self._items if task_ids is None else [
            r for r in self._items if r.task_id in task_ids
        ]
        return [
            {
                "task_id": r.task_id,
                "kpi_name": r.kpi_name,
                "failure_reason": r.failure_reason,
                "suggested_fix": r.suggested_fix,
            }
            for r in items
        ]


def _canonical_payload(
    task_id: str,
    kpi_name: str,
    passed: bool,
    score_bp: int,
    reason: str,
    suggested_fix: str | None,
    timestamp_utc: str,
) -> dict:
    return {
        "task_id": task_id,
        "kpi_name": kpi_name,
        "passed": passed,
        "score": RawNumber(render_basis_points(score_bp)),
        "reason": reason,
        "suggested_fix": suggested_fix,
        "timestamp_utc": timestamp_utc,
    }


def compute_proof_hash(
    task_id: str,
    kpi_name: str,
    passed: bool,
    score_bp: int,
    reason: str,
    suggested_fix: str | None,
    timestamp_utc: datetime | str,
) -> str:
    """SHA-256 (lowercase hex) over the canonical JSON of the seven fields."""
    ts = timestamp_utc if isinstance(timestamp_utc, str) else format_timestamp(timestamp_utc)
    payload = _canonical_payload(
        task_id=task_id,
        kpi_name=kpi_name,
        passed=passed,
        score_bp=score_bp,
        reason=reason,
        suggested_fix=suggested_fix,
        timestamp_utc=ts,
    )
    return sha256_hex(canonical_bytes(payload))


def verify_report_integrity(record: Mapping) -> bool:
    """True iff the digest recomputed from the stored fields equals the stored
    proof_hash byte-for-byte (hex case is significant)."""
    try:
        score_bp = parse_basis_points(record["score"])
        if not (0 <= score_bp <= 10000):
            return False
        recomputed = compute_proof_hash(
            task_id=record["task_id"],
            kpi_name=record["kpi_name"],
            passed=record["passed"],
            score_bp=score_bp,
            reason=record["reason"],
            suggested_fix=record["suggested_fix"],
            timestamp_utc=record["timestamp_utc"],
        )
    except (KeyError, TypeError, ValueError):
        return False
    return recomputed == record.get("proof_hash")


def parse_trail_line(line: str) -> dict:
    """Trail-line JSON with score kept exact (Decimal, not float)."""
    return json.loads(line, parse_float=Decimal)


def verify_trail_lines(lines: list[str]) -> tuple[int, list[int]]:
    """Verify every line's proof hash and scan for digest collisions among
    distinct canonical payloads. Returns (total, 1-based failing lines)."""
    failures: list[int] = []
    seen_digests: dict[str, bytes] = {}
    total = 0
    for line_no, line in enumerate(lines, 1):
        if not line.strip():
            continue
        total += 1
        try:
            record = parse_trail_line(line)
        except (json.JSONDecodeError, ValueError):
            failures.append(line_no)
            continue
        if not isinstance(record, dict) or not verify_report_integrity(record):
            failures.append(line_no)
            continue
        payload = _canonical_payload(
            task_id=record["task_id"],
            kpi_name=record["kpi_name"],
            passed=record["passed"],
            score_bp=parse_basis_points(record["score"]),
            reason=record["reason"],
            suggested_fix=record["suggested_fix"],
            timestamp_utc=record["timestamp_utc"],
        )
        payload_bytes = canonical_bytes(payload)
        digest = record["proof_hash"]
        if digest in seen_digests and seen_digests[digest] != payload_bytes:
            failures.append(line_no)  # distinct payloads sharing a digest
        else:
            seen_digests[digest] = payload_bytes
    return total, failures


def verify_trail(path: Path | str) -> tuple[int, list[int]]:
    text = Path(path).read_text(encoding="utf-8")
    return verify_trail_lines(text.splitlines())


class ReviewEngine:
    """Seals reports, appends the trail, couples audits to trust.

    Failure-path ordering: append report -> update trust -> persist
    reflection; a trail-append failure aborts before any trust update.
    One writer owns the trail file; verification reads a consistent prefix.
    """

    def __init__(
        self,
        judge: Judge,
        auth: SovereignAuth,
        trail_path: Path | None = None,
        reflections: ReflectionStore | None = None,
        clock: Clock = utc_now,
    ):
        self._judge = judge
        self._auth = auth
        self._clock = clock
        self._trail_path = Path(trail_path) if trail_path is not None else None
        self._lines: list[str] = []
        if self._trail_path is not None and self._trail_path.exists():
            self._lines = [
                line
                for line in self._trail_path.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
        self.reflections = reflections if reflections is not None else ReflectionStore()

    @property
    def trail_path(self) -> Path | None:
        return self._trail_path

    def trail_lines(self) -> list[str]:
        return list(self._lines)

    def report_count(self) -> int:
        return len(self._lines)

    def judge_output(self, output: str, kpi: KpiSpec) -> JudgeVerdict:
        return self._judge.judge(output, kpi)

    def audit_task(self, task_id: str, output: str, kpi: KpiSpec, agent_id: str) -> AuditReport:
        """Score, seal, append, then couple the verdict into the agent's trust."""
        verdict = self._judge.judge(output, kpi)  # JudgeUnavailable propagates
        score_bp = score_to_basis_points(verdict.score)
        passed = score_bp >= PASS_THRESHOLD_BP
        timestamp = self._clock()
        report = AuditReport(
            task_id=task_id,
            kpi_name=kpi.name,
            passed=passed,
            score_bp=score_bp,
            reason=verdict.reason,
            suggested_fix=verdict.suggested_fix,
            timestamp_utc=timestamp,
            proof_hash=compute_proof_hash(
                task_id=task_id,
                kpi_name=kpi.name,
                passed=passed,
                score_bp=score_bp,
                reason=verdict.reason,
                suggested_fix=verdict.suggested_fix,
                timestamp_utc=timestamp,
            ),
        )
        self._append(report)
        if passed:
            self._auth.record_audit_success(agent_id)
        else:
            self._auth.record_audit_failure(agent_id)
            self.reflections.add(
                ReflectionObject(
                    task_id=task_id,
                    kpi_name=kpi.name,
                    failure_reason=verdict.reason,
                    suggested_fix=verdict.suggested_fix,
                    timestamp_utc=timestamp,
                )
            )
        return report

    def _append(self, report: AuditReport) -> None:
        from .canonical import canonical_dumps

        line = canonical_dumps(report.to_record())
        if self._trail_path is not None:
            with self._trail_path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        self._lines.append(line)

    def verify(self) -> tuple[int, list[int]]:
        if self._trail_path is not None:
            return verify_trail(self._trail_path)
        return verify_trail_lines(self._lines)
