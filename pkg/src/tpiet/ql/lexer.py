"""Tokenizer for TPiet-QL."""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import QuerySyntaxError

KEYWORDS = frozenset({
    "SELECT", "GIS", "CUBE", "SNAPSHOT", "CURRENT", "FROM", "OVERLAP", "WHERE",
    "AND", "OR", "NOT", "IN", "SLICE", "ON", "ROWS", "COLUMNS", "TRUE", "FALSE", "NOW",
})

# Token kinds
KW, IDENT, BRACKET, NUMBER, DATE, STRING, OP, PUNCT, EOF = (
    "KW", "IDENT", "BRACKET", "NUMBER", "DATE", "STRING", "OP", "PUNCT", "EOF",
)


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    line: int
    column: int
    text: str = ""

    def __repr__(self):
        return f"{self.kind}({self.value!r})@{self.line}:{self.column}"


_DATE = r"\d{1,2}/\d{1,2}/\d{4}"
_NUM = r"\d+(?:\.\d+)?(?:[eE][-+]?\d+)?"
_INSTANT = rf"(?:{_DATE}|{_NUM}|[Nn][Oo][Ww])"
# "[t1,t2]" is an interval literal, any other bracketed text is a quoted name.
_INTERVAL_BODY = re.compile(rf"\[\s*{_INSTANT}\s*,\s*{_INSTANT}\s*\]")

_SPEC = [
    ("WS", r"[ \t\r\n]+"),
    ("COMMENT", r"--[^\n]*"),
    ("DATE", _DATE),
    ("NUMBER", _NUM),
    ("STRING", r'"(?:[^"\\]|\\.)*"'),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("OP", r"<=|>=|<>|!=|≤|≥|≠|[=<>]"),
    ("PUNCT", r"[(),.;\[\]\-]"),
]
_MASTER = re.compile("|".join(f"(?P<{k}>{p})" for k, p in _SPEC))
_OP_CANON = {"!=": "<>", "≠": "<>", "≤": "<=", "≥": ">="}


def _number(text: str):
    if re.fullmatch(r"\d+", text):
        return int(text)
    return float(text)


def tokenize(text: str) -> list[Token]:
    """Split query text into tokens with 1-based line/column positions."""
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0

    def here(p):
        return line, p - line_start + 1

    while pos < len(text):
        ch = text[pos]
        if ch == "[" and not _INTERVAL_BODY.match(text, pos):
            end = text.find("]", pos + 1)
            if end < 0:
                raise QuerySyntaxError("unterminated bracketed name", *here(pos))
            name = text[pos + 1:end]
            if "\n" in name:
                raise QuerySyntaxError("bracketed name spans lines", *here(pos))
            tokens.append(Token(BRACKET, name, *here(pos), text=text[pos:end + 1]))
            pos = end + 1
            continue
        m = _MASTER.match(text, pos)
        if not m:
            raise QuerySyntaxError(f"illegal character {ch!r}", *here(pos))
        kind, value = m.lastgroup, m.group()
        if kind in ("WS", "COMMENT"):
            for i, c in enumerate(value):
                if c == "\n":
                    line += 1
                    line_start = pos + i + 1
        elif kind == "IDENT":
            up = value.upper()
            if up in KEYWORDS:
                tokens.append(Token(KW, up, *here(pos), text=value))
            else:
                tokens.append(Token(IDENT, value, *here(pos), text=value))
        elif kind == "NUMBER":
            tokens.append(Token(NUMBER, _number(value), *here(pos), text=value))
        elif kind == "DATE":
            month, day, year = (int(x) for x in value.split("/"))
            tokens.append(Token(DATE, (month, day, year), *here(pos), text=value))
        elif kind == "STRING":
            body = re.sub(r"\\(.)", r"\1", value[1:-1])
            tokens.append(Token(STRING, body, *here(pos), text=value))
        elif kind == "OP":
            tokens.append(Token(OP, _OP_CANON.get(value, value), *here(pos), text=value))
        else:
            tokens.append(Token(PUNCT, value, *here(pos), text=value))
        pos = m.end()
    tokens.append(Token(EOF, None, *here(pos)))
    return tokens
