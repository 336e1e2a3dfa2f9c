"""
Parser for preset expressions given on the command line.

A preset expression is a name, optionally followed by a parenthesised argument list.
Arguments are rationals, lists in square brackets, or nested preset expressions:

    appendixA2
    montufar(2, [1/2, 1/3, 1/6], scaledA1b)
    deepset(2, [1/2, 1/2], invhead(2))

The parser only builds the expression tree; :mod:`pwlcomplexity.presets` resolves it.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, NoReturn, Pattern, Tuple, Union

from pwlcomplexity.constants import PresetError
from pwlcomplexity.printcolor import fmt_green
from pwlcomplexity.StringStream import StringStream


__all__ = [
    "PresetArg",
    "PresetCall",
    "parse_preset",
]


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PresetCall:
    """``name(args…)``; ``offset`` is where the name starts in the parsed text."""

    name: str
    args: Tuple["PresetArg", ...] = ()
    offset: int = 0

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(_render(a) for a in self.args)})"


PresetArg = Union[Fraction, PresetCall, Tuple["PresetArg", ...]]


def _render(arg: "PresetArg") -> str:
    if isinstance(arg, tuple):
        return "[" + ", ".join(_render(a) for a in arg) + "]"
    return str(arg)


def parse_preset(text: str) -> PresetCall:
    """Parse a preset expression.

    Args:
        text: The expression, e.g. ``"montufar(1, [1/2, 1/2], [1/2, 1/2], cut(1/3))"``.

    Returns:
        The top-level call.
    """
    stream = StringStream(text)
    stream.skip_whitespace()
    if stream.at_end():
        raise PresetError("empty preset expression")
    value = _parse_value(stream)
    stream.skip_whitespace()
    if not stream.at_end():
        _fail(stream, f"unexpected {stream.peek()!r}")
    if not isinstance(value, PresetCall):
        raise PresetError(f"preset expression {text!r} must start with a name")
    logger.debug("parsed preset %s", fmt_green(value))
    return value


# ========================================================================
# All functions and variables below are used internally to parse presets
# ========================================================================


def _fail(stream: StringStream, message: str) -> NoReturn:
    raise PresetError(f"{message} at offset {stream.index} of {stream.raw_text!r}")


def _parse_value(stream: StringStream) -> PresetArg:
    stream.skip_whitespace()
    for pattern, parser in _PRESET_PATTERNS_AND_PARSERS:
        if pattern.match(stream.raw_text, stream.index):
            return parser(stream)
    _fail(stream, f"expected a name, a number or '[', got {stream.peek()!r}")


def _parse_call(stream: StringStream) -> PresetCall:
    """Parser for ``name`` and ``name(args…)``."""
    offset = stream.index
    name = stream.advance_past_name()
    stream.skip_whitespace()
    if stream.peek() != "(":
        return PresetCall(name, (), offset)
    stream.read(1)
    args = _parse_sequence(stream, ")")
    logger.debug("parsed call %s with %d arguments", name, len(args))
    return PresetCall(name, tuple(args), offset)


def _parse_list(stream: StringStream) -> Tuple[PresetArg, ...]:
    """Parser for ``[a, b, …]``; the stream is at the opening bracket."""
    stream.read(1)
    return tuple(_parse_sequence(stream, "]"))


def _parse_number(stream: StringStream) -> Fraction:
    try:
        return stream.advance_past_rational()
    except ValueError as error:
        raise PresetError(f"{error}") from error


def _parse_sequence(stream: StringStream, closing: str) -> List[PresetArg]:
    """Comma-separated values up to and including ``closing``."""
    items: List[PresetArg] = []
    stream.skip_whitespace()
    if stream.peek() == closing:
        stream.read(1)
        return items
    while True:
        items.append(_parse_value(stream))
        stream.skip_whitespace()
        c = stream.read(1)
        if c == closing:
            return items
        if c != ",":
            stream.seek(-len(c))
            _fail(stream, f"expected ',' or {closing!r}")


# A list where each item is a tuple of:
# - A compiled regular expression matching the start of a value.
# - The function parsing the value from the stream positioned at that start.
#
# The order matters as items are iterated in order and that stops once a match is found.
_PRESET_PATTERNS_AND_PARSERS: List[Tuple[Pattern, Callable[[StringStream], PresetArg]]] = [
    (re.compile(r"[A-Za-z_]"), _parse_call),
    (re.compile(r"\["), _parse_list),
    (re.compile(r"[+-]?\d"), _parse_number),
]
