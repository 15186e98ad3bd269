"""Boolean labels over ``Variable=state`` atoms.

Labels are immutable expression trees.  ``restrict`` substitutes a partial
assignment and constant-folds the result; ``evaluate`` needs every variable
of the label assigned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import IncompleteAssignment
from .lexer import Token, quote_id, tokenize

SEMANTIC_BOUND = 8


class Expr:
    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Const(Expr):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Atom(Expr):
    var: str
    state: str


@dataclass(frozen=True)
class Not(Expr):
    arg: Expr


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Or(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Implies(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Iff(Expr):
    left: Expr
    right: Expr


_BINARY = (And, Or, Implies, Iff)


def dom(expr):
    """Variables mentioned by atoms of ``expr``."""
    if isinstance(expr, Atom):
        return frozenset((expr.var,))
    if isinstance(expr, Const):
        return frozenset()
    if isinstance(expr, Not):
        return dom(expr.arg)
    return dom(expr.left) | dom(expr.right)


def atoms(expr):
    if isinstance(expr, Atom):
        yield expr
    elif isinstance(expr, Not):
        yield from atoms(expr.arg)
    elif isinstance(expr, _BINARY):
        yield from atoms(expr.left)
        yield from atoms(expr.right)


def conjoin(exprs):
    """Folded conjunction of an iterable of labels."""
    out = TRUE
    for e in exprs:
        out = _fold_and(out, e)
    return out


def _fold_not(a):
    if isinstance(a, Const):
        return Const(not a.value)
    return Not(a)


def _fold_and(a, b):
    if isinstance(a, Const):
        return b if a.value else FALSE
    if isinstance(b, Const):
        return a if b.value else FALSE
    return And(a, b)


def _fold_or(a, b):
    if isinstance(a, Const):
        return TRUE if a.value else b
    if isinstance(b, Const):
        return TRUE if b.value else a
    return Or(a, b)


def _fold_implies(a, b):
    if isinstance(a, Const):
        return b if a.value else TRUE
    if isinstance(b, Const):
        return TRUE if b.value else _fold_not(a)
    return Implies(a, b)


def _fold_iff(a, b):
    if isinstance(a, Const):
        return b if a.value else _fold_not(b)
    if isinstance(b, Const):
        return a if b.value else _fold_not(a)
    return Iff(a, b)


_FOLD = {And: _fold_and, Or: _fold_or, Implies: _fold_implies, Iff: _fold_iff}


def restrict(expr, assignment):
    """Substitute ``assignment`` (var -> state) into ``expr`` and fold."""
    if isinstance(expr, Const):
        return expr
    if isinstance(expr, Atom):
        if expr.var in assignment:
            return Const(assignment[expr.var] == expr.state)
        return expr
    if isinstance(expr, Not):
        return _fold_not(restrict(expr.arg, assignment))
    fold = _FOLD[type(expr)]
    return fold(restrict(expr.left, assignment), restrict(expr.right, assignment))


def fold(expr):
    return restrict(expr, {})


def evaluate(expr, assignment):
    missing = dom(expr) - set(assignment)
    if missing:
        raise IncompleteAssignment(missing)
    return _eval(expr, assignment)


def _eval(expr, a):
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Atom):
        return a[expr.var] == expr.state
    if isinstance(expr, Not):
        return not _eval(expr.arg, a)
    left, right = _eval(expr.left, a), _eval(expr.right, a)
    if isinstance(expr, And):
        return left and right
    if isinstance(expr, Or):
        return left or right
    if isinstance(expr, Implies):
        return (not left) or right
    return left == right


def is_constant(expr):
    """Syntactic constancy after folding: True, False or None (non-constant)."""
    folded = fold(expr)
    if isinstance(folded, Const):
        return folded.value
    return None


def semantic_constant(expr, states, bound=SEMANTIC_BOUND):
    """Decide constancy by enumerating every assignment over ``dom(expr)``.

    ``states`` maps each variable to its state list.  Atoms naming a state
    outside the list are simply false everywhere.  Returns True/False for a
    constant label, None when it varies or the domain exceeds ``bound``.
    """
    folded = fold(expr)
    if isinstance(folded, Const):
        return folded.value
    variables = sorted(dom(folded))
    if len(variables) > bound:
        return None
    seen = set()
    for combo in itertools.product(*(states[v] for v in variables)):
        seen.add(_eval(folded, dict(zip(variables, combo))))
        if len(seen) > 1:
            return None
    return seen.pop() if seen else None


def truth_table(expr, states):
    variables = sorted(dom(expr))
    return {
        combo: _eval(expr, dict(zip(variables, combo)))
        for combo in itertools.product(*(states[v] for v in variables))
    }


# -- concrete syntax ------------------------------------------------------

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5, Atom: 6, Const: 6}
_SYMBOL = {Iff: "<=>", Implies: "=>", Or: "|", And: "&"}
_RIGHT_ASSOC = (Implies, Iff)


def to_text(expr):
    """Render with the minimal parentheses that reparse to the same tree."""
    if isinstance(expr, Const):
        return "true" if expr.value else "false"
    if isinstance(expr, Atom):
        return f"{quote_id(expr.var)}={quote_id(expr.state)}"
    if isinstance(expr, Not):
        inner = to_text(expr.arg)
        return "!" + (f"({inner})" if _PREC[type(expr.arg)] < 5 else inner)
    p = _PREC[type(expr)]
    lp, rp = _PREC[type(expr.left)], _PREC[type(expr.right)]
    if isinstance(expr, _RIGHT_ASSOC):
        lparen, rparen = lp <= p, rp < p
    else:
        lparen, rparen = lp < p, rp <= p
    left, right = to_text(expr.left), to_text(expr.right)
    if lparen:
        left = f"({left})"
    if rparen:
        right = f"({right})"
    return f"{left} {_SYMBOL[type(expr)]} {right}"


class LabelSyntaxError(Exception):
    def __init__(self, message, span):
        self.span = span
        super().__init__(message)


class LabelParser:
    """Recursive-descent parser over a token list.

    Precedence, loosest first: ``<=>``, ``=>`` (both right-associative),
    ``|``, ``&`` (left-associative), ``!``.
    """

    def __init__(self, tokens, pos=0):
        self.tokens = tokens
        self.pos = pos

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def _is(self, text):
        return self.tok.kind == "op" and self.tok.text == text

    def _advance(self):
        t = self.tok
        self.pos += 1
        return t

    def parse(self):
        return self._iff()

    def _iff(self):
        left = self._implies()
        if self._is("<=>"):
            self._advance()
            return Iff(left, self._iff())
        return left

    def _implies(self):
        left = self._or()
        if self._is("=>"):
            self._advance()
            return Implies(left, self._implies())
        return left

    def _or(self):
        left = self._and()
        while self._is("|"):
            self._advance()
            left = Or(left, self._and())
        return left

    def _and(self):
        left = self._not()
        while self._is("&"):
            self._advance()
            left = And(left, self._not())
        return left

    def _not(self):
        if self._is("!"):
            self._advance()
            return Not(self._not())
        if self._is("("):
            self._advance()
            inner = self._iff()
            if not self._is(")"):
                raise LabelSyntaxError(
                    f"expected ')' but found {self.tok.text or 'end of input'!r}",
                    self.tok.span)
            self._advance()
            return inner
        t = self.tok
        if t.kind == "ident" and t.text in ("true", "false"):
            self._advance()
            return TRUE if t.text == "true" else FALSE
        if t.kind in ("ident", "string"):
            self._advance()
            if not self._is("="):
                raise LabelSyntaxError(
                    f"expected '=' after {t.name!r} in label atom", self.tok.span)
            self._advance()
            s = self.tok
            if s.kind not in ("ident", "string"):
                raise LabelSyntaxError("expected a state name after '='", s.span)
            self._advance()
            return Atom(t.name, s.name)
        raise LabelSyntaxError(
            f"expected a label term but found {t.text or 'end of input'!r}", t.span)


def parse_label(text):
    tokens = [t for t in tokenize(text) if t.kind != "newline"]
    parser = LabelParser(tokens)
    expr = parser.parse()
    if parser.tok.kind != "eof":
        raise LabelSyntaxError(f"unexpected {parser.tok.text!r}", parser.tok.span)
    return expr
