"""SovereignAuth: earned-autonomy permissions.

Agents start at a base TrustScore of 50 and unlock capabilities by
sustained audited behavior: +5 per audit success (capped at 100), -15 per
audit failure (floored at 0), -10 per budget overrun. A capability is
granted when score >= threshold; only strictly lower scores are denied.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path

from .canonical import canonical_dumps
from .clock import Clock, format_timestamp, parse_timestamp, utc_now
from .errors import GovernanceError

BASE_SCORE = 50
MIN_SCORE = 0
MAX_SCORE = 100


class Capability(str, Enum):
    READ_FILES = "READ_FILES"
    WRITE_FILES = "WRITE_FILES"
    CALL_EXTERNAL_API = "CALL_EXTERNAL_API"
    EXECUTE_SHELL = "EXECUTE_SHELL"
    SPEND_USD = "SPEND_USD"


# System policy, not Charter-configurable.
THRESHOLDS: dict[Capability, int] = {
    Capability.READ_FILES: 10,
    Capability.WRITE_FILES: 40,
    Capability.CALL_EXTERNAL_API: 50,
    Capability.EXECUTE_SHELL: 60,
    Capability.SPEND_USD: 80,
}


class UpdateCause(str, Enum):
    AUDIT_SUCCESS = "AUDIT_SUCCESS"
    AUDIT_FAILURE = "AUDIT_FAILURE"
    BUDGET_OVERRUN = "BUDGET_OVERRUN"


DELTAS: dict[UpdateCause, int] = {
    UpdateCause.AUDIT_SUCCESS: 5,
    UpdateCause.AUDIT_FAILURE: -15,
    UpdateCause.BUDGET_OVERRUN: -10,
}


@dataclass(frozen=True)
class TrustUpdate:
    timestamp_utc: datetime
    delta: int
    cause: UpdateCause


class PermissionDeniedError(GovernanceError):
    code = "PERMISSION_DENIED"

    def __init__(self, agent_id: str, capability: Capability, score: int, threshold: int):
        super().__init__(
            f"'{agent_id}' denied {capability.value}: score {score} < threshold {threshold}"
        )
        self.agent_id = agent_id
        self.capability = capability
        self.score = score
        self.threshold = threshold

    def payload(self) -> dict:
        return {
            "code": self.code,
            "message": str(self),
            "agent_id": self.agent_id,
            "capability": self.capability.value,
            "score": self.score,
            "threshold": self.threshold,
        }


def clamp_fold(deltas: list[int], base: int = BASE_SCORE) -> int:
    """Score as a pure fold over history deltas, clamping at every step."""
    score = base
    for delta in deltas:
        score = min(MAX_SCORE, max(MIN_SCORE, score + delta))
    return score


class SovereignAuth:
    """Per-agent trust records. Updates are serialized per agent (the engine
    funnels all mutations through one owner); checks read the latest
    committed score, never a partial update."""

    def __init__(self, history_path: Path | None = None, clock: Clock = utc_now):
        self._clock = clock
        self._path = Path(history_path) if history_path is not None else None
        self._history: dict[str, list[TrustUpdate]] = {}
        self._scores: dict[str, int] = {}
        if self._path is not None and self._path.exists():
            self._recover()

    def _recover(self) -> None:
        assert self._path is not None
        for line in self._path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            update = TrustUpdate(
                timestamp_utc=parse_timestamp(record["timestamp_utc"]),
                delta=record["delta"],
                cause=UpdateCause(record["cause"]),
            )
            agent_id = record["agent_id"]
            self._history.setdefault(agent_id, []).append(update)
        for agent_id, updates in self._history.items():
            self._scores[agent_id] = clamp_fold([u.delta for u in updates])

    def score(self, agent_id: str) -> int:
        """Unknown agents implicitly hold the base score."""
        return self._scores.get(agent_id, BASE_SCORE)

    def known_agents(self) -> dict[str, int]:
        return dict(self._scores)

    def history(self, agent_id: str) -> tuple[TrustUpdate, ...]:
        return tuple(self._history.get(agent_id, ()))

    def check_permission(self, agent_id: str, capability: Capability) -> bool:
        """Grant iff score >= threshold; equality grants."""
        score = self.score(agent_id)
        threshold = THRESHOLDS[capability]
        if score < threshold:
            raise PermissionDeniedError(agent_id, capability, score, threshold)
        return True

    def _record(self, agent_id: str, cause: UpdateCause) -> int:
        update = TrustUpdate(timestamp_utc=self._clock(), delta=DELTAS[cause], cause=cause)
        if self._path is not None:
            record = {
                "agent_id": agent_id,
                "timestamp_utc": format_timestamp(update.timestamp_utc),
                "delta": update.delta,
                "cause": update.cause.value,
            }
            with self._path.open("a", encoding="utf-8") as fh:
                fh.write(canonical_dumps(record) + "\n")
        self._history.setdefault(agent_id, []).append(update)
        new_score = min(MAX_SCORE, max(MIN_SCORE, self.score(agent_id) + update.delta))
        self._scores[agent_id] = new_score
        return new_score

    def record_audit_success(self, agent_id: str) -> int:
        return self._record(agent_id, UpdateCause.AUDIT_SUCCESS)

    def record_audit_failure(self, agent_id: str) -> int:
        return self._record(agent_id, UpdateCause.AUDIT_FAILURE)

    def record_budget_overrun(self, agent_id: str) -> int:
        return self._record(agent_id, UpdateCause.BUDGET_OVERRUN)
