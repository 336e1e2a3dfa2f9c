from fractions import Fraction

import pytest

from pwlcomplexity.constants import PresetError
from pwlcomplexity.presetparser import PresetCall, parse_preset


F = Fraction


def test_parse_name() -> None:
    assert parse_preset("appendixA2") == PresetCall("appendixA2")
    assert parse_preset("  example5 ") == PresetCall("example5", (), 2)


def test_parse_nested_call() -> None:
    text = "montufar(1, [1/2, 1/2], cut(1/3))"
    call = parse_preset(text)
    assert call.name == "montufar"
    assert call.args == (
        F(1),
        (F(1, 2), F(1, 2)),
        PresetCall("cut", (F(1, 3),), 24),
    )
    assert str(call) == text


@pytest.mark.parametrize(
    "text, args",
    [
        ("cut( 1 ,-2 )", (F(1), F(-2))),
        ("cut(0.25)", (F(1, 4),)),
        ("f([])", ((),)),
        ("f()", ()),
        ("f([[1/2, 1/2], [1/3, 2/3]])", (((F(1, 2), F(1, 2)), (F(1, 3), F(2, 3))),)),
    ],
)
def test_parse_arguments(text: str, args: tuple) -> None:
    assert parse_preset(text).args == args


@pytest.mark.parametrize(
    "text, message",
    [
        ("", "empty preset expression"),
        ("   ", "empty preset expression"),
        ("cut(1", r"expected ',' or '\)' at offset"),
        ("cut(1) x", "unexpected 'x' at offset 7"),
        ("[1]", "must start with a name"),
        ("cut(?)", "expected a name, a number or '\\[', got '\\?' at offset 4"),
        ("cut(1/0)", "Zero denominator"),
        ("f([1, 2)", r"expected ',' or '\]'"),
    ],
)
def test_parse_errors(text: str, message: str) -> None:
    with pytest.raises(PresetError, match=message):
        parse_preset(text)
