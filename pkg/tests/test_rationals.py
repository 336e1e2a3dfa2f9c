from decimal import Decimal
from fractions import Fraction
from typing import Any

import pytest

from pwlcomplexity.rationals import (
    advance_past_rational,
    format_matrix,
    format_rational,
    parse_matrix,
    parse_rational,
    to_decimal_string,
    to_fraction,
)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("3/4", Fraction(3, 4)),
        ("-3/4", Fraction(-3, 4)),
        ("+5", Fraction(5)),
        ("7", Fraction(7)),
        (" 2/6 ", Fraction(1, 3)),
        ("-0.25", Fraction(-1, 4)),
        ("0.1", Fraction(1, 10)),
    ],
)
def test_parse_rational(text: str, expected: Fraction) -> None:
    assert parse_rational(text) == expected


@pytest.mark.parametrize(
    "text, message",
    [
        ("1/0", "Zero denominator"),
        ("abc", "is not of the form p/q"),
        ("1/2x", "trailing characters"),
        ("", "Invalid rational"),
    ],
)
def test_parse_rational_errors(text: str, message: str) -> None:
    with pytest.raises(ValueError, match=message):
        parse_rational(text)


def test_advance_past_rational() -> None:
    assert advance_past_rational("x=-3/4,", start=2) == (Fraction(-3, 4), 6)
    assert advance_past_rational("12 apples") == (Fraction(12), 2)


@pytest.mark.parametrize("value", [0.5, True, None, [1]])
def test_to_fraction_refuses_inexact_values(value: Any) -> None:
    with pytest.raises(TypeError):
        to_fraction(value)


def test_format_rational() -> None:
    assert format_rational(Fraction(4, 2)) == "2"
    assert format_rational(Fraction(-6, 8)) == "-3/4"
    assert parse_rational(format_rational(Fraction(-6, 8))) == Fraction(-3, 4)


def test_matrix_text() -> None:
    matrix = parse_matrix([["1/2", 0], [3, "-1"]])
    assert matrix == ((Fraction(1, 2), Fraction(0)), (Fraction(3), Fraction(-1)))
    assert format_matrix(matrix) == (("1/2", "0"), ("3", "-1"))


@pytest.mark.parametrize(
    "value, digits, expected",
    [
        (Fraction(1, 3), 5, "0.33333"),
        (Fraction(2), 12, "2"),
        (Fraction(-7, 8), 12, "-0.875"),
        (Decimal("3.14159265"), 3, "3.14"),
    ],
)
def test_to_decimal_string(value: Any, digits: int, expected: str) -> None:
    assert to_decimal_string(value, digits) == expected
