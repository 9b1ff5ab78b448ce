"""Tokenizer for the tool-script dialect."""

from __future__ import annotations

import re
from typing import NamedTuple


class Token(NamedTuple):
    kind: str  # IDENT NUMBER STRING OP NEWLINE EOF
    text: str
    line: int
    col: int


class LexError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?")
# longest first so == beats =
_OPERATORS = ("==", "!=", "<=", ">=", "<", ">", "=", "+", "-", "*", "/",
              "(", ")", "[", "]", ",", ".")

_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", '"': '"', "'": "'"}


def _lex_string(text: str, i: int, line: int, col: int) -> tuple[str, int]:
    quote = text[i]
    i += 1
    out = []
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            break
        if ch == quote:
            return "".join(out), i + 1
        if ch == "\\":
            if i + 1 >= len(text):
                break
            esc = text[i + 1]
            if esc not in _ESCAPES:
                raise LexError(f"unknown escape \\{esc}", line, col)
            out.append(_ESCAPES[esc])
            i += 2
            continue
        out.append(ch)
        i += 1
    raise LexError("unterminated string", line, col)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    for line_no, raw in enumerate(source.splitlines(), start=1):
        i = 0
        line_had_token = False
        while i < len(raw):
            ch = raw[i]
            if ch in " \t\r":
                i += 1
                continue
            col = i + 1
            if ch in "\"'":
                # strings stay on one line; pass the full remaining source line
                value, end = _lex_string(raw, i, line_no, col)
                tokens.append(Token("STRING", value, line_no, col))
                i = end
                line_had_token = True
                continue
            m = _NUMBER_RE.match(raw, i)
            if m and (ch.isdigit() or (ch == "." and i + 1 < len(raw) and raw[i + 1].isdigit())):
                tokens.append(Token("NUMBER", m.group(), line_no, col))
                i = m.end()
                line_had_token = True
                continue
            m = _IDENT_RE.match(raw, i)
            if m:
                tokens.append(Token("IDENT", m.group(), line_no, col))
                i = m.end()
                line_had_token = True
                continue
            for op in _OPERATORS:
                if raw.startswith(op, i):
                    tokens.append(Token("OP", op, line_no, col))
                    i += len(op)
                    line_had_token = True
                    break
            else:
                raise LexError(f"unexpected character {ch!r}", line_no, col)
        if line_had_token:
            tokens.append(Token("NEWLINE", "", line_no, len(raw) + 1))
    tokens.append(Token("EOF", "", source.count("\n") + 2, 1))
    return tokens
