"""Tiny regex tokenizer shared by the expression and formula parsers."""

from __future__ import annotations

import re

from .core import ParseError


class Scanner:
    def __init__(self, text: str, token_spec: list[tuple[str, str]]):
        self.text = text
        parts = [f"(?P<{kind}>{pattern})" for kind, pattern in token_spec]
        parts.append(r"(?P<WS>\s+)")
        parts.append(r"(?P<BAD>.)")
        regex = re.compile("|".join(parts))
        self.tokens: list[tuple[str, str, int]] = []
        for match in regex.finditer(text):
            kind = match.lastgroup
            if kind == "WS":
                continue
            if kind == "BAD":
                line, col = self._loc(match.start())
                raise ParseError(f"unexpected character {match.group()!r}", line, col)
            self.tokens.append((kind, match.group(), match.start()))
        self.pos = 0

    def _loc(self, offset: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, offset) + 1
        col = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return line, col

    def error(self, message: str, offset: int | None = None):
        if offset is None:
            offset = self.tokens[self.pos][2] if self.pos < len(self.tokens) else len(self.text)
        line, col = self._loc(offset)
        raise ParseError(message, line, col)

    def peek(self) -> tuple[str, str] | None:
        if self.pos < len(self.tokens):
            kind, value, _ = self.tokens[self.pos]
            return kind, value
        return None

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        if tok is None:
            return False
        return tok[0] == kind and (value is None or tok[1] == value)

    def take(self) -> tuple[str, str]:
        if self.pos >= len(self.tokens):
            self.error("unexpected end of input")
        kind, value, _ = self.tokens[self.pos]
        self.pos += 1
        return kind, value

    def expect(self, kind: str, value: str | None = None) -> str:
        tok = self.peek()
        want = value if value is not None else kind
        if tok is None:
            self.error(f"expected {want!r}, found end of input")
        if tok[0] != kind or (value is not None and tok[1] != value):
            self.error(f"expected {want!r}, found {tok[1]!r}")
        return self.take()[1]

    def done(self) -> bool:
        return self.pos >= len(self.tokens)

    def expect_done(self):
        if not self.done():
            self.error(f"trailing input starting at {self.tokens[self.pos][1]!r}")
