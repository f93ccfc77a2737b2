"""Charter: the constitutional document every mission is governed by.

The YAML surface expresses money in decimal USD; internally the kernel
holds integer cents and exact rationals so fiscal inequalities never see
floating-point drift. Validation is strict: any field not in the schema
is rejected with its path.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Union

import pydantic
import yaml
from pydantic import ConfigDict

from .errors import CharterValidationError

DEFAULT_MARGIN_RATIO = Fraction(35, 100)

_Number = Union[int, float, Decimal]


@dataclass(frozen=True)
class CompetencySpec:
    name: str
    description: str
    priority: int  # planner weight, 1..10


@dataclass(frozen=True)
class FiscalBoundaries:
    daily_burn_max_usd_cents: int
    max_budget_usd_cents: int
    currency: str
    min_job_margin_ratio: Fraction
    min_reserve_usd_cents: int


@dataclass(frozen=True)
class KpiSpec:
    name: str
    metric: str
    target_value: Fraction
    unit: str
    verification_prompt: str


@dataclass(frozen=True)
class Charter:
    mission: str
    core_competencies: tuple[CompetencySpec, ...]
    fiscal_boundaries: FiscalBoundaries
    success_kpis: tuple[KpiSpec, ...]

    def competency_names(self) -> set[str]:
        return {c.name for c in self.core_competencies}

    def kpi_names(self) -> set[str]:
        return {k.name for k in self.success_kpis}

    def kpi(self, name: str | None) -> KpiSpec:
        """KPI by name; None falls back to the first Charter KPI."""
        if name is None:
            return self.success_kpis[0]
        for kpi in self.success_kpis:
            if kpi.name == name:
                return kpi
        raise KeyError(name)


def competency_names(charter: Charter) -> set[str]:
    return charter.competency_names()


# --- document schema (the YAML / HTTP surface) -------------------------------

class _DocModel(pydantic.BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True, arbitrary_types_allowed=True)


class _CompetencyDoc(_DocModel):
    name: str
    description: str
    priority: int


class _FiscalDoc(_DocModel):
    daily_burn_max_usd: _Number
    max_budget_usd: _Number
    currency: str
    min_job_margin_ratio: _Number | None = None
    min_reserve_usd: _Number | None = None


class _KpiDoc(_DocModel):
    name: str
    metric: str
    target_value: _Number
    unit: str
    verification_prompt: str


class _CharterDoc(_DocModel):
    mission: str
    core_competencies: list[_CompetencyDoc]
    fiscal_boundaries: _FiscalDoc
    success_kpis: list[_KpiDoc]


class _DecimalSafeLoader(yaml.SafeLoader):
    """SafeLoader whose float scalars become exact Decimals (raw-text parse)."""


def _construct_decimal(loader: yaml.SafeLoader, node: yaml.ScalarNode) -> Decimal:
    try:
        return Decimal(node.value)
    except InvalidOperation as exc:
        raise yaml.constructor.ConstructorError(
            None, None, f"cannot read number {node.value!r}", node.start_mark
        ) from exc


_DecimalSafeLoader.add_constructor("tag:yaml.org,2002:float", _construct_decimal)


def _as_decimal(value: _Number, path: str, errors: list[tuple[str, str]]) -> Decimal | None:
    if isinstance(value, bool):
        errors.append((path, "expected a number"))
        return None
    if isinstance(value, Decimal):
        return value
    if isinstance(value, int):
        return Decimal(value)
    # floats only arrive via the HTTP surface; str() recovers the intended
    # decimal for values that fit in two fractional digits
    return Decimal(str(value))


def _usd_to_cents(value: _Number, path: str, errors: list[tuple[str, str]]) -> int:
    dec = _as_decimal(value, path, errors)
    if dec is None:
        return 0
    if dec < 0:
        errors.append((path, f"money must be >= 0, got {dec}"))
        return 0
    cents = dec * 100
    if cents != cents.to_integral_value():
        errors.append((path, f"{dec} has more than 2 fractional digits; amounts are exact cents"))
        return 0
    return int(cents)


def _ratio(value: _Number, path: str, errors: list[tuple[str, str]]) -> Fraction:
    dec = _as_decimal(value, path, errors)
    if dec is None:
        return Fraction(0)
    ratio = Fraction(dec)
    if not (0 <= ratio <= 1):
        errors.append((path, f"ratio must be within [0, 1], got {dec}"))
        return Fraction(0)
    return ratio


def _loc_to_path(loc: tuple) -> str:
    return ".".join(str(part) for part in loc)


def charter_from_document(document: object) -> Charter:
    """Validate a parsed document (dict) and build the internal Charter.

    Raises CharterValidationError carrying every offending field path.
    """
    try:
        doc = _CharterDoc.model_validate(document)
    except pydantic.ValidationError as exc:
        raise CharterValidationError(
            [(_loc_to_path(err["loc"]), err["msg"]) for err in exc.errors()]
        ) from None

    errors: list[tuple[str, str]] = []

    if not doc.mission.strip():
        errors.append(("mission", "mission must be non-empty"))
    if not doc.core_competencies:
        errors.append(("core_competencies", "at least one competency is required"))

    competencies = []
    seen_names: set[str] = set()
    for i, comp in enumerate(doc.core_competencies):
        base = f"core_competencies.{i}"
        if not comp.name.strip():
            errors.append((f"{base}.name", "competency name must be non-empty"))
        if comp.name in seen_names:
            errors.append((f"{base}.name", f"duplicate competency name '{comp.name}'"))
        seen_names.add(comp.name)
        if not (1 <= comp.priority <= 10):
            errors.append((f"{base}.priority", f"priority must be in [1, 10], got {comp.priority}"))
        competencies.append(
            CompetencySpec(name=comp.name, description=comp.description, priority=comp.priority)
        )

    fb = doc.fiscal_boundaries
    daily = _usd_to_cents(fb.daily_burn_max_usd, "fiscal_boundaries.daily_burn_max_usd", errors)
    ceiling = _usd_to_cents(fb.max_budget_usd, "fiscal_boundaries.max_budget_usd", errors)
    reserve = (
        _usd_to_cents(fb.min_reserve_usd, "fiscal_boundaries.min_reserve_usd", errors)
        if fb.min_reserve_usd is not None
        else 0
    )
    margin = (
        _ratio(fb.min_job_margin_ratio, "fiscal_boundaries.min_job_margin_ratio", errors)
        if fb.min_job_margin_ratio is not None
        else DEFAULT_MARGIN_RATIO
    )
    if fb.currency != "USD":
        errors.append(("fiscal_boundaries.currency", f"only USD is supported, got '{fb.currency}'"))
    if not errors and daily > ceiling:
        errors.append(
            (
                "fiscal_boundaries.daily_burn_max_usd",
                f"daily burn cap {daily}c exceeds max budget {ceiling}c",
            )
        )

    kpis = []
    seen_kpis: set[str] = set()
    for i, kpi in enumerate(doc.success_kpis):
        base = f"success_kpis.{i}"
        if not kpi.name.strip():
            errors.append((f"{base}.name", "KPI name must be non-empty"))
        if kpi.name in seen_kpis:
            errors.append((f"{base}.name", f"duplicate KPI name '{kpi.name}'"))
        seen_kpis.add(kpi.name)
        if not kpi.verification_prompt.strip():
            errors.append((f"{base}.verification_prompt", "verification_prompt must be non-empty"))
        target = _as_decimal(kpi.target_value, f"{base}.target_value", errors)
        kpis.append(
            KpiSpec(
                name=kpi.name,
                metric=kpi.metric,
                target_value=Fraction(target) if target is not None else Fraction(0),
                unit=kpi.unit,
                verification_prompt=kpi.verification_prompt,
            )
        )

    if errors:
        raise CharterValidationError(errors)

    return Charter(
        mission=doc.mission,
        core_competencies=tuple(competencies),
        fiscal_boundaries=FiscalBoundaries(
            daily_burn_max_usd_cents=daily,
            max_budget_usd_cents=ceiling,
            currency=fb.currency,
            min_job_margin_ratio=margin,
            min_reserve_usd_cents=reserve,
        ),
        success_kpis=tuple(kpis),
    )


def load_charter(source: str | Path) -> Charter:
    """Load a Charter from YAML text or a file path.

    Monetary values in decimal USD convert exactly to integer cents;
    absent optionals default (margin ratio 0.35, reserve 0).
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and source.endswith((".yaml", ".yml"))):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source
    try:
        document = yaml.load(text, Loader=_DecimalSafeLoader)
    except yaml.YAMLError as exc:
        raise CharterValidationError([("<document>", f"invalid YAML: {exc}")]) from None
    if not isinstance(document, dict):
        raise CharterValidationError([("<document>", "charter document must be a mapping")])
    return charter_from_document(document)


def charter_to_document(charter: Charter) -> dict:
    """The Charter back in document (YAML/HTTP surface) form.

    Money renders as decimal USD; with <= 2 fractional digits the float
    representation is exact, so document -> charter -> document round-trips.
    """
    return {
        "mission": charter.mission,
        "core_competencies": [
            {"name": c.name, "description": c.description, "priority": c.priority}
            for c in charter.core_competencies
        ],
        "fiscal_boundaries": {
            "daily_burn_max_usd": charter.fiscal_boundaries.daily_burn_max_usd_cents / 100,
            "max_budget_usd": charter.fiscal_boundaries.max_budget_usd_cents / 100,
            "currency": charter.fiscal_boundaries.currency,
            "min_job_margin_ratio": float(charter.fiscal_boundaries.min_job_margin_ratio),
            "min_reserve_usd": charter.fiscal_boundaries.min_reserve_usd_cents / 100,
        },
        "success_kpis": [
            {
                "name": k.name,
                "metric": k.metric,
                "target_value": float(k.target_value),
                "unit": k.unit,
                "verification_prompt": k.verification_prompt,
            }
            for k in charter.success_kpis
        ],
    }
