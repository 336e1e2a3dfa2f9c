import io

import pytest

from pwlcomplexity import printcolor
from pwlcomplexity.printcolor import fmt_green, fmt_red, print_green, use_color


class FakeTerminal(io.StringIO):
    def isatty(self) -> bool:
        return True


def test_plain_streams_get_no_color() -> None:
    stream = io.StringIO()
    assert not use_color(stream)
    assert fmt_red("failed", stream) == "failed"
    print_green("ok", stream)
    assert stream.getvalue() == "ok\n"


def test_terminals_get_color(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("NO_COLOR", raising=False)
    monkeypatch.setattr(printcolor, "USING_WINDOWS", False)
    terminal = FakeTerminal()
    assert fmt_green("ok", terminal) == "\033[92mok\033[00m"

    monkeypatch.setenv("NO_COLOR", "1")
    assert fmt_green("ok", terminal) == "ok"
