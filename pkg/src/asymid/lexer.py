"""Tokenizer for the ``.aid`` model format and the label grammar."""

from __future__ import annotations

import re
from dataclasses import dataclass

BARE_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*")
KEYWORDS = frozenset({
    "format", "chance", "decision", "testdecision", "value", "arc", "kind",
    "label", "cpt", "utility", "restrict", "given", "true", "false",
})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?(?![A-Za-z_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
  | (?P<op><=>|=>|->|[!&|=(){},:;])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_col: int
    file: str = "<input>"

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}"


@dataclass(frozen=True)
class Token:
    kind: str  # ident | string | number | op | newline | eof
    text: str
    span: Span

    @property
    def name(self):
        """Identifier value for ident/string tokens (quotes stripped)."""
        if self.kind == "string":
            return bytes(self.text[1:-1], "utf-8").decode("unicode_escape")
        return self.text


class LexError(Exception):
    def __init__(self, message, span):
        self.span = span
        super().__init__(message)


def tokenize(text, file="<input>"):
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise LexError(f"unexpected character {text[pos]!r}",
                           Span(line, col, col + 1, file))
        kind = m.lastgroup
        col = pos - line_start + 1
        span = Span(line, col, col + len(m.group()), file)
        if kind == "newline":
            tokens.append(Token("newline", "\n", span))
            line += 1
            line_start = m.end()
        elif kind in ("ident", "string", "number", "op"):
            tokens.append(Token(kind, m.group(), span))
        pos = m.end()
    col = pos - line_start + 1
    tokens.append(Token("eof", "", Span(line, col, col, file)))
    return tokens


def quote_id(name):
    """Render an identifier, quoting it when it is not a bare word."""
    if BARE_ID.fullmatch(name) and name not in KEYWORDS:
        return name
    escaped = name.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'
