"""
Line-oriented file grammar shared by every input and output format.

All formats accept `#` comments and blank lines, and an optional leading
`format 1` directive. Writers always emit the directive.
"""

from typing import Iterator, List, Tuple
from src.errors import ParseError

FORMAT_VERSION = 1
FORMAT_HEADER = f"format {FORMAT_VERSION}"


def tokenize_lines(text: str) -> Iterator[Tuple[int, List[str]]]:
    """
    Yield (line_number, tokens) for each meaningful line.

    The `format` directive is consumed here: it may only appear before any
    other directive and must name the supported version.
    """
    seen_content = False
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "format":
            if seen_content:
                raise ParseError("format directive must come first", line_number)
            if len(tokens) != 2 or tokens[1] != str(FORMAT_VERSION):
                raise ParseError(f"unsupported format {' '.join(tokens[1:])!r}", line_number)
            seen_content = True
            continue
        seen_content = True
        yield line_number, tokens


def parse_int(token: str, line_number: int, what: str) -> int:
    """Parse a non-negative integer token or raise ParseError naming the field."""
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {token!r}", line_number) from None
    if value < 0:
        raise ParseError(f"{what} must be non-negative, got {value}", line_number)
    return value


def first_directive(text: str) -> str:
    """Name of the first directive in a file (used to sniff graph vs matrix files)."""
    for _, tokens in tokenize_lines(text):
        return tokens[0]
    return ""


def render(lines: List[str]) -> str:
    """Join lines under the version header, newline terminated."""
    return "\n".join([FORMAT_HEADER, *lines]) + "\n"
