"""Recursive-descent parser for channel expressions such as ``corrWish(mp(1), atoms(1:1), 1/4)``."""
from __future__ import annotations

import re
from fractions import Fraction

from .channels import AR1, AgramWish, Atoms, ChannelError, CorrWish, FreeMultiply, MP, Scale, Shift


class ParseError(ValueError):
    def __init__(self, msg, pos):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


_RAT = re.compile(r"[+-]?\d+(?:/\d+)?")
_NAME = re.compile(r"[A-Za-z][A-Za-z0-9]*")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch):
        self.ws()
        if not self.text.startswith(ch, self.pos):
            found = self.text[self.pos] if self.pos < len(self.text) else "end of input"
            raise ParseError(f"expected '{ch}', found {found!r}", self.pos)
        self.pos += len(ch)

    def peek(self, ch):
        self.ws()
        return self.text.startswith(ch, self.pos)

    def rat(self):
        self.ws()
        m = _RAT.match(self.text, self.pos)
        if not m:
            raise ParseError("expected a rational number", self.pos)
        self.pos = m.end()
        num, _, den = m.group().partition("/")
        if den and int(den) == 0:
            raise ParseError("zero denominator", m.start())
        return Fraction(int(num), int(den) if den else 1)

    def expr(self):
        self.ws()
        start = self.pos
        m = _NAME.match(self.text, self.pos)
        if not m:
            raise ParseError("expected a channel constructor", self.pos)
        name = m.group()
        self.pos = m.end()
        self.expect("(")
        try:
            node = self._node(name, start)
        except ChannelError as exc:
            raise ParseError(str(exc), start) from exc
        self.expect(")")
        return node

    def _node(self, name, start):
        if name == "atoms":
            pairs = []
            while True:
                w = self.rat()
                self.expect(":")
                pairs.append((w, self.rat()))
                if not self.peek(","):
                    break
                self.expect(",")
            return Atoms(tuple(pairs))
        if name == "mp":
            return MP(self.rat())
        if name == "ar1":
            return AR1(self.rat())
        if name in ("scale", "shift"):
            child = self.expr()
            self.expect(",")
            v = self.rat()
            return Scale(child, v) if name == "scale" else Shift(child, v)
        if name == "corrWish":
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(",")
            return CorrWish(a, b, self.rat())
        if name == "agramWish":
            a = self.expr()
            self.expect(",")
            c = self.rat()
            self.expect(",")
            return AgramWish(a, c, self.rat())
        if name == "freeMultiply":
            a = self.expr()
            self.expect(",")
            return FreeMultiply(a, self.expr())
        raise ParseError(f"unknown constructor {name!r}", start)


def parse_channel_expr(text: str):
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    p = _Parser(text)
    node = p.expr()
    p.ws()
    if p.pos != len(text):
        raise ParseError("trailing characters", p.pos)
    return node
