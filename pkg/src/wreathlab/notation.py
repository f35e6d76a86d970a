"""Text form of group elements.

Top level: ``z:-4``, ``vec:(1,-2)``, ``word:abA`` (capital letter = inverse
generator) and ``wreath{2:1,5:1|cursor=3}``.  Inside a wreath the integer
and vector forms drop their prefix.  ``parse(format(a)) == a`` for every
element.
"""
from __future__ import annotations

import re

from .groups import GroupSpec, Word, WreathElement, contains

_INT = re.compile(r"-?\d+")


class NotationError(ValueError):
    pass


def format_element(a, top: bool = True) -> str:
    if isinstance(a, WreathElement):
        body = ",".join(f"{format_element(s, False)}:{format_element(v, False)}" for s, v in a.lamps)
        return f"wreath{{{body}|cursor={format_element(a.cursor, False)}}}"
    if isinstance(a, Word):
        return f"word:{a}"
    if isinstance(a, tuple):
        vec = "(" + ",".join(str(c) for c in a) + ")"
        return f"vec:{vec}" if top else vec
    if isinstance(a, int) and not isinstance(a, bool):
        return f"z:{a}" if top else str(a)
    raise NotationError(f"cannot format {a!r}")


class _Parser:
    def __init__(self, text: str):
        self.s = text
        self.i = 0

    def fail(self, what: str):
        raise NotationError(f"expected {what} at position {self.i} in {self.s!r}")

    def eat(self, tok: str) -> bool:
        if self.s.startswith(tok, self.i):
            self.i += len(tok)
            return True
        return False

    def expect(self, tok: str):
        if not self.eat(tok):
            self.fail(repr(tok))

    def integer(self) -> int:
        m = _INT.match(self.s, self.i)
        if not m:
            self.fail("integer")
        self.i = m.end()
        return int(m.group())

    def vector(self) -> tuple:
        self.expect("(")
        out = [self.integer()]
        while self.eat(","):
            out.append(self.integer())
        self.expect(")")
        return tuple(out)

    def word(self) -> Word:
        letters = []
        while self.i < len(self.s) and self.s[self.i].isalpha() and self.s[self.i].isascii():
            c = self.s[self.i]
            letters.append(ord(c) - 96 if c.islower() else -(ord(c) - 64))
            self.i += 1
        w = Word(tuple(letters))
        if len(w.letters) != len(letters):
            raise NotationError(f"word {self.s!r} is not reduced")
        return w

    def term(self):
        if self.eat("z:"):
            return self.integer()
        if self.eat("vec:"):
            return self.vector()
        if self.eat("word:"):
            return self.word()
        if self.eat("wreath{"):
            lamps = []
            if not self.s.startswith("|", self.i):
                while True:
                    site = self.term()
                    self.expect(":")
                    lamps.append((site, self.term()))
                    if not self.eat(","):
                        break
            self.expect("|cursor=")
            cursor = self.term()
            self.expect("}")
            u = WreathElement(tuple(lamps), cursor)
            if len(u.lamps) != len(lamps) or list(u.lamps) != lamps:
                raise NotationError(f"lamps of {self.s!r} are not in canonical order")
            return u
        if self.s.startswith("(", self.i):
            return self.vector()
        return self.integer()


def parse_element(text: str, g: GroupSpec | None = None):
    """Parse the text form; with ``g`` also check membership."""
    p = _Parser(text.strip())
    a = p.term()
    if p.i != len(p.s):
        p.fail("end of input")
    if g is not None and not contains(g, a):
        raise NotationError(f"{text!r} is not an element of {g}")
    return a
