"""
Support for reading and writing exact rationals as text.

Every rational that crosses a file boundary is written as a string ``"p/q"`` (or ``"p"``
when the denominator is one) so that JSON artifacts round trip bit-exactly. Decimal
renderings are only produced for human-facing CSV columns.
"""

import re
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any, Iterable, Sequence, Tuple, Union


__all__ = [
    "RationalLike",
    "advance_past_rational",
    "format_matrix",
    "format_rational",
    "format_vector",
    "parse_matrix",
    "parse_rational",
    "parse_vector",
    "to_decimal_string",
    "to_fraction",
]


RationalLike = Union[Fraction, int, str]


def parse_rational(text: str) -> Fraction:
    """Parse a rational written as ``p/q``, ``p`` or a finite decimal such as ``-0.25``.

    Args:
        text: The text to parse. Surrounding whitespace is ignored.

    Returns:
        The exact value.
    """
    value, end = advance_past_rational(text.strip())
    if end != len(text.strip()):
        raise ValueError(f"Invalid rational {text!r}: trailing characters")
    return value


def advance_past_rational(text: str, *, start: int = 0) -> Tuple[Fraction, int]:
    """Read a rational starting at ``text[start]``.

    Args:
        text: Text containing a rational literal at position ``start``.
        start: Where the literal starts.

    Returns:
        A tuple with the parsed value and the index just after the literal.
    """
    match = _RATIONAL_RE.match(text, start)
    if match is None:
        raise ValueError(
            f"Invalid rational at offset {start} of {text!r}: "
            f"{text[start:start + 10]!r} is not of the form p/q"
        )

    sign = -1 if match["sign"] == "-" else 1
    if match["denominator"] is not None:
        denominator = int(match["denominator"])
        if denominator == 0:
            raise ValueError(f"Zero denominator in {match.group(0)!r}")
        value = Fraction(int(match["integer"]), denominator)
    elif match["fractional"] is not None:
        value = Fraction(Decimal(f"{match['integer']}.{match['fractional']}"))
    else:
        value = Fraction(int(match["integer"]))
    return sign * value, match.end()


def to_fraction(value: Any) -> Fraction:
    """Convert ints, Fractions and rational strings to a Fraction.

    Floats are refused: a float has already been rounded and would smuggle rounding into
    exact computations.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"Cannot use {value!r} of type {type(value).__name__} as a rational")


def format_rational(value: Fraction) -> str:
    """Format a rational as ``p/q``, or ``p`` for integers."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_vector(items: Iterable[Any]) -> Tuple[Fraction, ...]:
    return tuple(to_fraction(item) for item in items)


def format_vector(vector: Sequence[Fraction]) -> Tuple[str, ...]:
    return tuple(format_rational(x) for x in vector)


def parse_matrix(rows: Iterable[Iterable[Any]]) -> Tuple[Tuple[Fraction, ...], ...]:
    return tuple(parse_vector(row) for row in rows)


def format_matrix(
    matrix: Sequence[Sequence[Fraction]],
) -> Tuple[Tuple[str, ...], ...]:
    return tuple(format_vector(row) for row in matrix)


def to_decimal_string(value: Union[Fraction, Decimal], digits: int) -> str:
    """Render ``value`` with ``digits`` significant digits (round half even).

    Only used for display columns; the exact value is always written next to it.
    """
    with localcontext() as ctx:
        ctx.prec = digits
        if isinstance(value, Fraction):
            rendered = Decimal(value.numerator) / Decimal(value.denominator)
        else:
            rendered = +value
        return format(rendered, "f") if abs(rendered.adjusted()) < digits else str(rendered)


# A signed integer, optionally followed by either a denominator or a fractional part.
_RATIONAL_RE = re.compile(
    r"""
    \s*
    (?P<sign>[+-]?)
    (?P<integer>\d+)
    (
        /(?P<denominator>\d+)
        |
        \.(?P<fractional>\d+)
    )?
    """,
    flags=re.VERBOSE,
)
