"""UnifiedLedger: append-only record of every USD-cent and token flow.

Single source of truth for balance, daily burn, and runway. Entries get
strictly increasing sequence numbers (1..N, no gaps) and are never mutated
or deleted. Persistence is one canonical-JSON line per entry; recovery
re-reads the file and re-validates monotonicity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable

from .canonical import canonical_dumps
from .clock import Clock, day_start, format_timestamp, parse_timestamp, utc_now
from .errors import LedgerError


class EntryKind(str, Enum):
    USD_CREDIT = "USD_CREDIT"
    USD_DEBIT = "USD_DEBIT"
    TOKEN_DEBIT = "TOKEN_DEBIT"


@dataclass(frozen=True)
class LedgerEntry:
    seq: int
    timestamp_utc: datetime
    kind: EntryKind
    amount: int  # cents for USD kinds, tokens for TOKEN_DEBIT
    purpose: str
    task_id: str | None = None
    agent_id: str | None = None

    def to_record(self) -> dict:
        return {
            "seq": self.seq,
            "timestamp_utc": format_timestamp(self.timestamp_utc),
            "kind": self.kind.value,
            "amount": self.amount,
            "purpose": self.purpose,
            "task_id": self.task_id,
            "agent_id": self.agent_id,
        }


@dataclass(frozen=True)
class LedgerSnapshot:
    balance_usd_cents: int
    daily_debits_usd_cents: int
    total_tokens_spent: int
    entry_count: int


class UnifiedLedger:
    """Single-writer append log; reads observe a consistent prefix."""

    def __init__(self, path: Path | None = None, clock: Clock = utc_now):
        self._clock = clock
        self._path = Path(path) if path is not None else None
        self._entries: list[LedgerEntry] = []
        if self._path is not None and self._path.exists():
            self._recover()

    def _recover(self) -> None:
        assert self._path is not None
        for line_no, line in enumerate(self._path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            record = json.loads(line)
            entry = LedgerEntry(
                seq=record["seq"],
                timestamp_utc=parse_timestamp(record["timestamp_utc"]),
                kind=EntryKind(record["kind"]),
                amount=record["amount"],
                purpose=record["purpose"],
                task_id=record.get("task_id"),
                agent_id=record.get("agent_id"),
            )
            if entry.seq != len(self._entries) + 1:
                raise LedgerError(
                    f"ledger file corrupt at line {line_no}: "
                    f"seq {entry.seq}, expected {len(self._entries) + 1}"
                )
            if entry.amount < 0:
                raise LedgerError(f"ledger file corrupt at line {line_no}: negative amount")
            self._entries.append(entry)

    def append(
        self,
        kind: EntryKind,
        amount: int,
        purpose: str,
        task_id: str | None = None,
        agent_id: str | None = None,
    ) -> LedgerEntry:
        if amount < 0:
            raise LedgerError(f"ledger amounts must be >= 0, got {amount}")
        entry = LedgerEntry(
            seq=len(self._entries) + 1,
            timestamp_utc=self._clock(),
            kind=kind,
            amount=amount,
            purpose=purpose,
            task_id=task_id,
            agent_id=agent_id,
        )
        if self._path is not None:
            with self._path.open("a", encoding="utf-8") as fh:
                fh.write(canonical_dumps(entry.to_record()) + "\n")
        self._entries.append(entry)
        return entry

    def entries(self) -> tuple[LedgerEntry, ...]:
        return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def total_usd_cents(self) -> int:
        total = 0
        for entry in self._entries:
            if entry.kind is EntryKind.USD_CREDIT:
                total += entry.amount
            elif entry.kind is EntryKind.USD_DEBIT:
                total -= entry.amount
        return total

    def usd_debits_since(self, window_start: datetime) -> int:
        return sum(
            e.amount
            for e in self._entries
            if e.kind is EntryKind.USD_DEBIT and e.timestamp_utc >= window_start
        )

    def daily_debits_usd_cents(self) -> int:
        """USD debits within the current UTC calendar day."""
        return self.usd_debits_since(day_start(self._clock()))

    def lifetime_usd_debits(self) -> int:
        return sum(e.amount for e in self._entries if e.kind is EntryKind.USD_DEBIT)

    def total_tokens_spent(self) -> int:
        return sum(e.amount for e in self._entries if e.kind is EntryKind.TOKEN_DEBIT)

    def token_debits(self) -> tuple[LedgerEntry, ...]:
        return tuple(e for e in self._entries if e.kind is EntryKind.TOKEN_DEBIT)

    def runway_usd_cents(self, min_reserve: int) -> int:
        """Spendable balance above the minimum reserve, clamped at zero."""
        return max(0, self.total_usd_cents() - min_reserve)

    def snapshot(self) -> LedgerSnapshot:
        return LedgerSnapshot(
            balance_usd_cents=self.total_usd_cents(),
            daily_debits_usd_cents=self.daily_debits_usd_cents(),
            total_tokens_spent=self.total_tokens_spent(),
            entry_count=len(self._entries),
        )


def replay_total_usd_cents(records: Iterable[dict]) -> int:
    """Independent fold over raw JSONL records (recovery / audit helper)."""
    total = 0
    for record in records:
        if record["kind"] == "USD_CREDIT":
            total += record["amount"]
        elif record["kind"] == "USD_DEBIT":
            total -= record["amount"]
    return total
