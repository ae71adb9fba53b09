"""Recursive-descent parser for the MTL text grammar.

Grammar (precedence low to high)::

    formula  := disj
    disj     := conj   { "|" conj }
    conj     := until  { "&" until }
    until    := unary  [ "U" interval? unary ]
    unary    := "!" unary
              | "G" interval? unary
              | "F" interval? unary
              | "(" formula ")"
              | "T" | "F0" | ident
    interval := "[" int "," ( int | "inf" ) "]"

An omitted interval means ``[0, UNBOUNDED]``.  ``T``, ``F0``, ``G``, ``F``
and ``U`` are reserved words; every other identifier is an atom name looked
up in the supplied :class:`AtomTable`.
"""
from __future__ import annotations

import re

from .formula import (UNBOUNDED, Always, Atom, AtomTable, Eventually, FALSE,
                      Formula, Interval, MtlError, Not, And, Or, TrueF, Until)


class ParseError(MtlError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>\d+)"
                       r"|(?P<sym>[()\[\],&|!]))")

_RESERVED = {"T", "F0", "G", "F", "U", "inf"}


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._tokenize()
        self.i = 0

    def _line_col(self, pos: int):
        line = self.text.count("\n", 0, pos) + 1
        start = self.text.rfind("\n", 0, pos) + 1
        return line, pos - start + 1

    def _tokenize(self):
        pos = 0
        while pos < len(self.text):
            m = _TOKEN_RE.match(self.text, pos)
            if m is None or m.end() == pos:
                rest = self.text[pos:].lstrip()
                if not rest:
                    break
                line, col = self._line_col(len(self.text) - len(rest))
                raise ParseError(f"unexpected character {rest[0]!r}", line, col)
            kind = m.lastgroup
            value = m.group(kind)
            self.tokens.append((kind, value, m.start(kind)))
            pos = m.end()
        self.tokens.append(("eof", "", len(self.text)))

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok=None) -> ParseError:
        tok = tok or self.peek()
        line, col = self._line_col(tok[2])
        return ParseError(message, line, col)


class _Parser:
    def __init__(self, text: str, atoms: AtomTable):
        self.lex = _Lexer(text)
        self.atoms = atoms

    def parse(self) -> Formula:
        f = self.disj()
        kind, value, _ = self.lex.peek()
        if kind != "eof":
            raise self.lex.error(f"trailing input {value!r}")
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self._accept_sym("|"):
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.until()
        while self._accept_sym("&"):
            f = And(f, self.until())
        return f

    def until(self) -> Formula:
        f = self.unary()
        if self._accept_ident("U"):
            iv = self.maybe_interval()
            f = Until(f, self.unary(), iv)
        return f

    def unary(self) -> Formula:
        kind, value, _ = self.lex.peek()
        if kind == "sym" and value == "!":
            self.lex.next()
            return Not(self.unary())
        if kind == "ident" and value == "G":
            self.lex.next()
            iv = self.maybe_interval()
            return Always(self.unary(), iv)
        if kind == "ident" and value == "F":
            self.lex.next()
            iv = self.maybe_interval()
            return Eventually(self.unary(), iv)
        if kind == "sym" and value == "(":
            self.lex.next()
            f = self.disj()
            self._expect_sym(")")
            return f
        if kind == "ident":
            self.lex.next()
            if value == "T":
                return TrueF()
            if value == "F0":
                return FALSE
            if value in _RESERVED:
                raise self.lex.error(f"reserved word {value!r} cannot be an atom")
            if value not in self.atoms:
                raise self.lex.error(f"unknown atom {value!r}")
            return Atom(value)
        raise self.lex.error(f"expected a formula, found {value or kind!r}")

    def maybe_interval(self) -> Interval:
        kind, value, _ = self.lex.peek()
        if kind == "sym" and value == "[":
            self.lex.next()
            lo = self._expect_int()
            self._expect_sym(",")
            k, v, _ = self.lex.peek()
            if k == "ident" and v == "inf":
                self.lex.next()
                hi = UNBOUNDED
            else:
                hi = self._expect_int()
            self._expect_sym("]")
            try:
                return Interval(lo, hi)
            except MtlError as exc:
                raise self.lex.error(str(exc)) from None
        return Interval(0, UNBOUNDED)

    def _accept_sym(self, s: str) -> bool:
        kind, value, _ = self.lex.peek()
        if kind == "sym" and value == s:
            self.lex.next()
            return True
        return False

    def _accept_ident(self, s: str) -> bool:
        kind, value, _ = self.lex.peek()
        if kind == "ident" and value == s:
            self.lex.next()
            return True
        return False

    def _expect_sym(self, s: str):
        if not self._accept_sym(s):
            raise self.lex.error(f"expected {s!r}")

    def _expect_int(self) -> int:
        kind, value, _ = self.lex.peek()
        if kind != "int":
            raise self.lex.error("expected an integer")
        self.lex.next()
        return int(value)


def parse(text: str, atoms: AtomTable) -> Formula:
    """Parse formula text, validating atom names against the table."""
    return _Parser(text, atoms).parse()
