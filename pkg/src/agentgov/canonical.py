"""Canonical JSON: the byte-exact serialization used for hashing and wire messages.

Rules (bit-exact across languages and runs):
- one JSON object, keys sorted ascending by Unicode code point;
- member separator ", " and key separator ": ";
- strings escaped per JSON, non-ASCII emitted as raw UTF-8;
- booleans lowercase, absent optionals serialized as null;
- no floats: fractional values are pre-rendered decimal tokens
  (see :func:`render_basis_points`), so number formatting can never
  drift between serializers.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from typing import Any


class RawNumber(str):
    """A pre-rendered numeric token, emitted verbatim (no quotes)."""


def render_basis_points(bp: int) -> str:
    """Render an integer basis-point value (1/10000ths) as a decimal string.

    Trailing zeros are stripped but at least one fractional digit is kept:
    8700 -> "0.87", 3000 -> "0.3", 10000 -> "1.0", 0 -> "0.0".
    """
    if bp < 0:
        raise ValueError(f"basis points must be >= 0, got {bp}")
    whole, frac = divmod(bp, 10000)
    digits = f"{frac:04d}".rstrip("0") or "0"
    return f"{whole}.{digits}"


def parse_basis_points(token: str | Any) -> int:
    """Inverse of :func:`render_basis_points` for values read back from JSON.

    Accepts the decimal token (or a Decimal produced by a parse_float hook)
    and returns exact basis points; raises ValueError when the value does
    not sit on a basis-point grid (more than 4 fractional digits).
    """
    from decimal import Decimal, InvalidOperation

    try:
        dec = token if isinstance(token, Decimal) else Decimal(str(token))
    except InvalidOperation as exc:
        raise ValueError(f"not a decimal number: {token!r}") from exc
    scaled = dec * 10000
    if scaled != scaled.to_integral_value():
        raise ValueError(f"{token!r} is finer than basis-point precision")
    return int(scaled)


def render_fraction(value: Fraction, places: int) -> str:
    """Fixed-point decimal rendering of an exact rational, half-up at `places`."""
    scale = 10**places
    scaled = value * scale
    # round half up, exactly
    num, den = scaled.numerator, scaled.denominator
    quotient, remainder = divmod(num, den)
    if 2 * remainder >= den:
        quotient += 1
    whole, frac = divmod(quotient, scale)
    return f"{whole}.{frac:0{places}d}"


def render_usd_cents(cents: int) -> str:
    """Integer cents as a decimal-USD token: 1000 -> "10.0", 1234 -> "12.34"."""
    if cents < 0:
        raise ValueError(f"cents must be >= 0, got {cents}")
    whole, frac = divmod(cents, 100)
    digits = f"{frac:02d}".rstrip("0") or "0"
    return f"{whole}.{digits}"


def _encode(value: Any) -> str:
    if isinstance(value, RawNumber):
        return str(value)
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        for key in value:
            if not isinstance(key, str):
                raise TypeError(f"canonical JSON keys must be str, got {key!r}")
        members = ", ".join(
            f"{json.dumps(key, ensure_ascii=False)}: {_encode(value[key])}"
            for key in sorted(value)
        )
        return "{" + members + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_encode(item) for item in value) + "]"
    raise TypeError(
        f"type {type(value).__name__} has no canonical form; "
        "pre-render floats/rationals as RawNumber"
    )


def canonical_dumps(value: Any) -> str:
    return _encode(value)


def canonical_bytes(value: Any) -> bytes:
    return _encode(value).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_hash(value: Any) -> str:
    """Lowercase-hex SHA-256 over the canonical bytes of `value`."""
    return sha256_hex(canonical_bytes(value))
