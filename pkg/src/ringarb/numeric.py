"""Exact-number helpers: decimal parsing/formatting and rational roots."""

from __future__ import annotations

import math
import re
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Union

Number = Union[Fraction, float]

MAX_FRACTION_DIGITS = 36

_DECIMAL_RE = re.compile(r"^(?P<int>\d+)(?:\.(?P<frac>\d+))?$")


def parse_decimal(text: str, max_fraction_digits: int = MAX_FRACTION_DIGITS) -> Fraction:
    """Parse a plain non-negative decimal string such as ``"285.71"`` exactly."""
    if not isinstance(text, str):
        raise ValueError(f"expected a decimal string, got {type(text).__name__}")
    m = _DECIMAL_RE.match(text.strip())
    if m is None:
        raise ValueError(f"not a plain decimal string: {text!r}")
    frac = m.group("frac") or ""
    if len(frac) > max_fraction_digits:
        raise ValueError(f"more than {max_fraction_digits} fractional digits: {text!r}")
    return Fraction(int(m.group("int") + frac), 10 ** len(frac))


def to_fraction(value) -> Fraction:
    """Coerce ints, Fractions, Decimals, floats (exactly) and decimal strings."""
    if isinstance(value, bool):
        raise TypeError("booleans are not amounts")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        text = value.strip()
        if text.startswith("-"):
            return -parse_decimal(text[1:])
        return parse_decimal(text)
    return Fraction(value)


def format_decimal(value, significant: int = 18) -> str:
    """Render ``value`` positionally, rounded to ``significant`` digits."""
    q = Fraction(value)
    if q == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = significant
        d = Decimal(q.numerator) / Decimal(q.denominator)
    text = format(d, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


def format_fixed(value, places: int = MAX_FRACTION_DIGITS) -> str:
    """Render ``value`` with at most ``places`` fractional digits (round half even)."""
    q = Fraction(value)
    scaled = round(q * 10**places)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**places)
    text = f"{whole}.{frac:0{places}d}".rstrip("0").rstrip(".") if places else str(whole)
    return sign + text


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a non-negative integer."""
    if n < 0:
        raise ValueError("iroot of a negative number")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << -(-n.bit_length() // k)  # upper bound
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def exact_root(q: Fraction, k: int) -> Fraction | None:
    """Return q**(1/k) if it is rational, else None."""
    q = Fraction(q)
    if q < 0:
        return None
    p, d = iroot(q.numerator, k), iroot(q.denominator, k)
    if p ** k == q.numerator and d ** k == q.denominator:
        return Fraction(p, d)
    return None


def sqrt_fraction(q, bits: int = 256) -> Fraction:
    """Square root of a non-negative rational, exact when q is a perfect square.

    Otherwise returns the floor of sqrt(q) on a grid of 2**-bits relative to the
    denominator, which is well below any tolerance used in this package.
    """
    q = Fraction(q)
    exact = exact_root(q, 2)
    if exact is not None:
        return exact
    scale = 1 << bits
    return Fraction(math.isqrt(q.numerator * q.denominator * scale * scale), q.denominator * scale)
