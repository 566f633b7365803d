"""Precision handling for the arbitrary-precision reals used everywhere.

All geometry runs on :class:`mpmath.mpf` values.  Functions take an explicit
``digits`` argument and evaluate inside ``mp.workdps(digits)`` so that
callers never depend on the ambient mpmath context.
"""

from __future__ import annotations

import os
import re
from fractions import Fraction

import mpmath as mp

BigReal = mp.mpf

DEFAULT_DIGITS = 50
MIN_DIGITS = 10
MAX_DIGITS = 2000


def default_digits() -> int:
    """Working precision, honouring the ``GEONET_DIGITS`` override."""
    raw = os.environ.get("GEONET_DIGITS")
    if raw:
        try:
            return check_digits(int(raw))
        except ValueError as exc:
            raise ValueError(f"GEONET_DIGITS={raw!r} is not a valid digit count") from exc
    return DEFAULT_DIGITS


def check_digits(digits: int) -> int:
    if not isinstance(digits, int) or isinstance(digits, bool):
        raise ValueError(f"digits must be an integer, got {digits!r}")
    if not MIN_DIGITS <= digits <= MAX_DIGITS:
        raise ValueError(f"digits must lie in [{MIN_DIGITS}, {MAX_DIGITS}], got {digits}")
    return digits


def balance_tolerance(digits: int) -> mp.mpf:
    """Default balance threshold 10^-(digits/2)."""
    return mp.mpf(10) ** (-(digits // 2))


def collinear_tolerance(digits: int) -> mp.mpf:
    """Angular / offset tolerance 10^-(digits/3) used by overlap detection."""
    return mp.mpf(10) ** (-(digits // 3))


def guard_tolerance(digits: int) -> mp.mpf:
    """Tolerance for case-dispatch guards (alpha vs pi and similar)."""
    return mp.mpf(10) ** (-(digits // 3))


_FRACTION_RE = re.compile(r"^\s*([+-]?[0-9.eE+-]+)\s*/\s*([+-]?[0-9.eE+-]+)\s*$")


def parse_real(text, digits: int | None = None) -> mp.mpf:
    """Parse a decimal string, a ``p/q`` fraction, an int or a Fraction.

    Binary floats are accepted but only for convenience in tests; they are
    converted through ``repr`` so ``0.1`` means the decimal 0.1.
    """
    digits = digits or default_digits()
    with mp.workdps(digits):
        if isinstance(text, mp.mpf):
            return +text
        if isinstance(text, Fraction):
            return mp.mpf(text.numerator) / text.denominator
        if isinstance(text, bool):
            raise ValueError("booleans are not reals")
        if isinstance(text, int):
            return mp.mpf(text)
        if isinstance(text, float):
            text = repr(text)
        if not isinstance(text, str):
            raise TypeError(f"cannot parse {type(text).__name__} as a real")
        m = _FRACTION_RE.match(text)
        if m:
            den = mp.mpf(m.group(2))
            if den == 0:
                raise ValueError(f"zero denominator in {text!r}")
            return mp.mpf(m.group(1)) / den
        try:
            value = mp.mpf(text.strip())
        except (ValueError, TypeError) as exc:
            raise ValueError(f"not a decimal number: {text!r}") from exc
        if not mp.isfinite(value):
            raise ValueError(f"non-finite value: {text!r}")
        return value


def parse_angle(text, digits: int | None = None) -> mp.mpf:
    """Parse an angle; radians unless suffixed with ``deg`` (or the degree sign)."""
    digits = digits or default_digits()
    if isinstance(text, str):
        s = text.strip()
        for suffix in ("deg", "°", "d"):
            if s.endswith(suffix):
                with mp.workdps(digits + 10):
                    value = parse_real(s[: -len(suffix)], digits + 10) * mp.pi / 180
                with mp.workdps(digits):
                    return +value
        if s.endswith("rad"):
            s = s[:-3]
        return parse_real(s, digits)
    return parse_real(text, digits)


def to_decimal_string(value, digits: int) -> str:
    """Serialize with ``digits`` significant digits (never a binary float)."""
    with mp.workdps(digits):
        return mp.nstr(mp.mpf(value), digits)


def degrees(value) -> mp.mpf:
    return value * 180 / mp.pi
