"""Finite-trace temporal formulas: AST, parser, printer.

Grammar (infix, case-sensitive):

    formula  := iff
    iff      := implies (('<->' | '->') implies)*     right associative
    or       := and ('|' and)*
    and      := until ('&' until)*
    until    := unary ('U' until)?                     right associative
    unary    := '!' unary | 'X' unary | 'WX' unary
              | 'F' unary | 'G' unary | primary
    primary  := 'true' | 'false' | atom | '(' formula ')'
    atom     := [a-z0-9_] ('-'? [a-z0-9_])*

Precedence: unary > U > & > | > -> / <->.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class LtlfSyntaxError(ValueError):
    """Raised on malformed formula text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class Formula:
    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __post_init__(self):
        if not _ATOM_RE.fullmatch(self.name):
            raise ValueError(f"invalid atom name: {self.name!r}")


@dataclass(frozen=True)
class TrueConst(Formula):
    pass


@dataclass(frozen=True)
class FalseConst(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula


@dataclass(frozen=True)
class WeakNext(Formula):
    arg: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula


@dataclass(frozen=True)
class Globally(Formula):
    arg: Formula


TRUE = TrueConst()
FALSE = FalseConst()

_ATOM_RE = re.compile(r"[a-z0-9_](?:-?[a-z0-9_])*")

_UNARY = {"!": Not, "X": Next, "WX": WeakNext, "F": Eventually, "G": Globally}

# Token kinds: operators, keywords, atoms, parens.
_TOKEN_RE = re.compile(
    r"\s*(?:(?P<op><->|->|[!&|()])"
    r"|(?P<kw>WX|X|F|G|U)(?![a-zA-Z0-9_])"
    r"|(?P<atom>[a-z0-9_](?:-?[a-z0-9_])*))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise LtlfSyntaxError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def _next(self):
        tok = self._peek()
        self.i += 1
        return tok

    def _expect(self, value: str):
        kind, val, pos = self._next()
        if val != value:
            raise LtlfSyntaxError(f"expected {value!r}, found {val!r}", pos)

    def parse(self) -> Formula:
        f = self.iff()
        kind, val, pos = self._peek()
        if kind is not None:
            raise LtlfSyntaxError(f"trailing input {val!r}", pos)
        return f

    def iff(self) -> Formula:
        left = self.disj()
        kind, val, _ = self._peek()
        if val == "->":
            self._next()
            return Implies(left, self.iff())
        if val == "<->":
            self._next()
            return Iff(left, self.iff())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self._peek()[1] == "|":
            self._next()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.until()
        while self._peek()[1] == "&":
            self._next()
            f = And(f, self.until())
        return f

    def until(self) -> Formula:
        left = self.unary()
        if self._peek()[1] == "U":
            self._next()
            return Until(left, self.until())
        return left

    def unary(self) -> Formula:
        kind, val, pos = self._peek()
        if val in _UNARY:
            self._next()
            return _UNARY[val](self.unary())
        return self.primary()

    def primary(self) -> Formula:
        kind, val, pos = self._next()
        if val == "(":
            f = self.iff()
            self._expect(")")
            return f
        if kind == "atom":
            if val == "true":
                return TRUE
            if val == "false":
                return FALSE
            return Atom(val)
        if kind is None:
            raise LtlfSyntaxError("unexpected end of input", pos)
        raise LtlfSyntaxError(f"unexpected token {val!r}", pos)


def parse(text: str) -> Formula:
    """Parse formula text; raises LtlfSyntaxError with position on bad input."""
    if not text or not text.strip():
        raise LtlfSyntaxError("empty formula", 0)
    return _Parser(text).parse()


# Precedence levels used by the printer (higher binds tighter).
_LEVEL = {
    Iff: 1, Implies: 1, Or: 2, And: 3, Until: 4,
    Not: 5, Next: 5, WeakNext: 5, Eventually: 5, Globally: 5,
    Atom: 6, TrueConst: 6, FalseConst: 6,
}

_UNARY_SYM = {Not: "!", Next: "X", WeakNext: "WX", Eventually: "F", Globally: "G"}
_BINARY_SYM = {And: "&", Or: "|", Implies: "->", Iff: "<->", Until: "U"}


def pretty(f: Formula) -> str:
    """Render with minimal parentheses.

    & and | chains are printed flat (they are associative); U, -> and <->
    keep structure-revealing parentheses. Consequently
    parse(pretty(f)) == normalize(f).
    """

    def go(node: Formula, min_level: int) -> str:
        level = _LEVEL[type(node)]
        if isinstance(node, Atom):
            s = node.name
        elif isinstance(node, TrueConst):
            s = "true"
        elif isinstance(node, FalseConst):
            s = "false"
        elif type(node) in _UNARY_SYM:
            s = f"{_UNARY_SYM[type(node)]} {go(node.arg, level)}"
        elif isinstance(node, (And, Or)):
            s = f"{go(node.left, level)} {_BINARY_SYM[type(node)]} {go(node.right, level)}"
        else:
            # right-associative: left child must bind strictly tighter
            s = f"{go(node.left, level + 1)} {_BINARY_SYM[type(node)]} {go(node.right, level)}"
        return f"({s})" if level < min_level else s

    return go(f, 0)


def normalize(f: Formula) -> Formula:
    """Reassociate &/| chains into the left-nested form the parser produces.

    parse(pretty(f)) == normalize(f) for every formula f.
    """
    if isinstance(f, (Atom, TrueConst, FalseConst)):
        return f
    if isinstance(f, (Not, Next, WeakNext, Eventually, Globally)):
        return type(f)(normalize(f.arg))
    if isinstance(f, (And, Or)):
        items: list[Formula] = []

        def gather(node: Formula):
            if type(node) is type(f):
                gather(node.left)
                gather(node.right)
            else:
                items.append(normalize(node))

        gather(f)
        out = items[0]
        for item in items[1:]:
            out = type(f)(out, item)
        return out
    return type(f)(normalize(f.left), normalize(f.right))


def atoms(f: Formula) -> frozenset[str]:
    """All atom names occurring in the formula."""
    if isinstance(f, Atom):
        return frozenset({f.name})
    if isinstance(f, (TrueConst, FalseConst)):
        return frozenset()
    if isinstance(f, (Not, Next, WeakNext, Eventually, Globally)):
        return atoms(f.arg)
    return atoms(f.left) | atoms(f.right)


def rename_atoms(f: Formula, mapping: dict[str, str]) -> Formula:
    """Replace atom names per `mapping`; unmapped atoms pass through."""
    if isinstance(f, Atom):
        new = mapping.get(f.name, f.name)
        return f if new == f.name else Atom(new)
    if isinstance(f, (TrueConst, FalseConst)):
        return f
    if isinstance(f, (Not, Next, WeakNext, Eventually, Globally)):
        return type(f)(rename_atoms(f.arg, mapping))
    return type(f)(rename_atoms(f.left, mapping), rename_atoms(f.right, mapping))
