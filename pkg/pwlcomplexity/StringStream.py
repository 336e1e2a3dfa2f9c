import re
from fractions import Fraction

from pwlcomplexity.rationals import advance_past_rational


__all__ = ["StringStream"]


_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class StringStream:
    """Cursor over a preset expression.

    Every parsing function receives the same instance, so the offset reached by one
    reader is where the next one starts. Offsets are reported in error messages.
    """

    def __init__(self, raw_text: str) -> None:
        self.raw_text = raw_text
        self.index = 0
        self.len = len(raw_text)

    def read(self, count: int) -> str:
        """Return up to ``count`` characters and move past them.

        Reading beyond the end returns what is left; the index still advances by
        ``count``.
        """
        buf = self.raw_text[self.index : self.index + count]
        self.index += count
        return buf

    def peek(self) -> str:
        """The next character, or "" at the end of the text"""
        return self.raw_text[self.index : self.index + 1]

    def seek(self, offset: int) -> None:
        self.index += offset

    def at_end(self) -> bool:
        return self.index >= self.len

    def skip_whitespace(self) -> None:
        while self.index < self.len and self.raw_text[self.index].isspace():
            self.index += 1

    def advance_past_name(self) -> str:
        """Move past an identifier such as ``montufar`` or ``appendixA1b`` and return it"""
        match = _NAME_RE.match(self.raw_text, self.index)
        if match is None:
            raise ValueError(f"expected a name at offset {self.index} of {self.raw_text!r}")
        self.index = match.end()
        return match.group(0)

    def advance_past_rational(self) -> Fraction:
        """Move past a rational literal such as ``-3/4`` or ``0.25`` and return it"""
        value, self.index = advance_past_rational(self.raw_text, start=self.index)
        return value
