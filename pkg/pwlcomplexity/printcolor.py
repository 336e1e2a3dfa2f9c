import os
import sys
from typing import IO, Any, Optional


__all__ = [
    "fmt_cyan",
    "fmt_green",
    "fmt_red",
    "print_cyan",
    "print_green",
    "print_red",
    "use_color",
]


USING_WINDOWS = os.name == "nt"


def use_color(stream: Optional[IO[str]] = None) -> bool:
    """Colors only for terminals, never on Windows or when NO_COLOR is set."""
    stream = stream if stream is not None else sys.stdout
    if USING_WINDOWS or os.environ.get("NO_COLOR"):
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _fmt(x: Any, code: str, stream: Optional[IO[str]] = None) -> str:
    if not use_color(stream):
        return str(x)
    return f"\033[{code}m{x}\033[00m"


def fmt_red(x: Any, stream: Optional[IO[str]] = None) -> str:
    return _fmt(x, "91", stream)


def fmt_green(x: Any, stream: Optional[IO[str]] = None) -> str:
    return _fmt(x, "92", stream)


def fmt_cyan(x: Any, stream: Optional[IO[str]] = None) -> str:
    return _fmt(x, "96", stream)


def print_red(x: Any, stream: Optional[IO[str]] = None) -> None:
    print(fmt_red(x, stream), file=stream)


def print_green(x: Any, stream: Optional[IO[str]] = None) -> None:
    print(fmt_green(x, stream), file=stream)


def print_cyan(x: Any, stream: Optional[IO[str]] = None) -> None:
    print(fmt_cyan(x, stream), file=stream)
