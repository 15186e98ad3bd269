"""Textual ``.aid`` model format: parser with source spans and a canonical
serializer.

    format 1
    chance "Likes me?" { y, n }
    testdecision "Date?" { y, n }
    decision "Club?" { y, n } label "Accept?"=n | "Date?"=n
    value Pleasure
    arc "Accept?" -> "Club?" kind informational label "Date?"=y
    cpt "Accept?" | "Likes me?" { y : 0.8, 0.2 ; n : 0.3, 0.7 }
    utility Pleasure { high, low : 10 ; ... }
    restrict Movie given "To do?" { movie : {comedy, drama} ; ... }

Labels run to the end of their line; tables may span lines.
"""

from __future__ import annotations

import dataclasses
import itertools

import numpy as np

from . import labels as L
from .errors import ModelError
from .lexer import LexError, quote_id, tokenize
from .model import (AidModel, Arc, ArcKind, Diagnostic, Node, NodeKind,
                    RestrictiveFunction, validate)
from .potentials import BOTTOM, Kind, PartialTable

FORMAT_VERSION = "1"

_NODE_KEYWORDS = {
    "chance": NodeKind.CHANCE,
    "decision": NodeKind.DECISION,
    "testdecision": NodeKind.TEST,
    "value": NodeKind.VALUE,
}
_ARC_KINDS = {k.value: k for k in ArcKind}

# diagnostics about a table point at the table, not the node declaration
_TABLE_CODES = {"TableDomainMismatch", "RowNotNormalized", "ProbabilityOutOfRange",
                "NegativeUtility", "UndefinedRow"}


class _Syntax(Exception):
    def __init__(self, message, span, code="SyntaxError"):
        self.code = code
        self.span = span
        super().__init__(message)


class _Parser:
    def __init__(self, text, file):
        self.tokens = tokenize(text, file)
        self.pos = 0
        self.depth = 0
        self.diags = []
        self.nodes, self.arcs = [], []
        self.cpts, self.utils, self.restricts = [], [], []
        self.spans = {}

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self):
        return self.tokens[self.pos]

    def advance(self):
        t = self.tokens[self.pos]
        self.pos += 1
        if self.depth:
            self.skip_newlines()
        return t

    def skip_newlines(self):
        while self.tokens[self.pos].kind == "newline":
            self.pos += 1

    def is_op(self, text):
        return self.tok.kind == "op" and self.tok.text == text

    def expect_op(self, text):
        if not self.is_op(text):
            raise _Syntax(f"expected {text!r} but found {self.describe()}", self.tok.span)
        if text == "{":
            self.depth += 1
        elif text == "}":
            self.depth -= 1
        return self.advance()

    def describe(self, t=None):
        t = t or self.tok
        if t.kind == "eof":
            return "end of input"
        if t.kind == "newline":
            return "end of line"
        return repr(t.text)

    def ident(self, what="identifier"):
        t = self.tok
        if t.kind == "string" or (t.kind == "ident" and t.text not in ("_",)):
            self.advance()
            return t.name, t.span
        raise _Syntax(f"expected {what} but found {self.describe()}", t.span)

    def keyword(self, word):
        if self.tok.kind == "ident" and self.tok.text == word:
            return self.advance()
        raise _Syntax(f"expected {word!r} but found {self.describe()}", self.tok.span)

    def end_of_statement(self):
        if self.tok.kind not in ("newline", "eof"):
            raise _Syntax(f"unexpected {self.describe()} after statement", self.tok.span)

    def recover(self):
        self.depth = 0
        while self.tok.kind not in ("newline", "eof"):
            if self.tok.kind == "op" and self.tok.text == "}":
                self.pos += 1
                break
            self.pos += 1

    # -- statements ---------------------------------------------------------

    def parse(self):
        seen_statement = False
        while True:
            self.skip_newlines()
            t = self.tok
            if t.kind == "eof":
                break
            try:
                if t.kind != "ident" or t.text not in _STATEMENTS:
                    raise _Syntax(f"expected a declaration but found {self.describe()}", t.span)
                if t.text == "format":
                    if seen_statement:
                        raise _Syntax("'format' must be the first statement", t.span)
                    self.header()
                else:
                    getattr(self, "stmt_" + t.text)()
                self.end_of_statement()
            except _Syntax as exc:
                self.diags.append(Diagnostic(exc.code, str(exc), span=exc.span))
                self.recover()
            except L.LabelSyntaxError as exc:
                self.diags.append(Diagnostic("SyntaxError", str(exc), span=exc.span))
                self.recover()
            seen_statement = True

    def header(self):
        self.advance()
        t = self.tok
        if t.kind != "number" or t.text != FORMAT_VERSION:
            raise _Syntax(f"unsupported format version {t.text!r} (expected {FORMAT_VERSION})",
                          t.span, "UnsupportedFormat")
        self.advance()

    def label_opt(self):
        if self.tok.kind == "ident" and self.tok.text == "label":
            self.advance()
            parser = L.LabelParser(self.tokens, self.pos)
            expr = parser.parse()
            self.pos = parser.pos
            return expr
        return L.TRUE

    def _node(self, kind):
        start = self.advance().span
        name, span = self.ident("a node name")
        states = ()
        if kind is not NodeKind.VALUE:
            states = tuple(self.state_set())
        label = self.label_opt()
        self.nodes.append(Node(name, kind, states, label))
        self.spans.setdefault(("node", name), span if start is None else start)

    def stmt_chance(self):
        self._node(NodeKind.CHANCE)

    def stmt_decision(self):
        self._node(NodeKind.DECISION)

    def stmt_testdecision(self):
        self._node(NodeKind.TEST)

    def stmt_value(self):
        self._node(NodeKind.VALUE)

    def state_set(self):
        self.expect_op("{")
        out = []
        if not self.is_op("}"):
            out.append(self.ident("a state name")[0])
            while self.is_op(","):
                self.advance()
                out.append(self.ident("a state name")[0])
        self.expect_op("}")
        return out

    def stmt_arc(self):
        start = self.advance().span
        src, _ = self.ident("an arc source")
        self.expect_op("->")
        dst, _ = self.ident("an arc target")
        self.keyword("kind")
        t = self.tok
        if t.kind != "ident" or t.text not in _ARC_KINDS:
            raise _Syntax(f"unknown arc kind {self.describe()}; expected one of "
                          + ", ".join(_ARC_KINDS), t.span)
        self.advance()
        label = self.label_opt()
        arc = Arc(src, dst, _ARC_KINDS[t.text], label)
        self.arcs.append(arc)
        self.spans.setdefault(("node", str(arc)), start)

    def names(self):
        out = [self.ident()[0]]
        while self.is_op(","):
            self.advance()
            out.append(self.ident()[0])
        return out

    def number(self):
        t = self.tok
        if t.kind == "ident" and t.text == "_":
            self.advance()
            return BOTTOM, t.span
        if t.kind == "number":
            self.advance()
            return float(t.text), t.span
        raise _Syntax(f"expected a number or '_' but found {self.describe()}", t.span)

    def rows(self, value_parser):
        """``{ cfg : values ; ... }`` where a row without ':' has an empty config."""
        self.expect_op("{")
        rows = []
        while not self.is_op("}"):
            row_span = self.tok.span
            config = []
            # a row starts with a config unless it is a bare value list
            if not self.is_op(":") and not self._starts_value():
                config = self.names()
            if self.is_op(":"):
                self.advance()
            elif config:
                raise _Syntax(f"expected ':' but found {self.describe()}", self.tok.span)
            rows.append((tuple(config), value_parser(), row_span))
            if self.is_op(";"):
                self.advance()
            elif not self.is_op("}"):
                raise _Syntax(f"expected ';' or '}}' but found {self.describe()}", self.tok.span)
        self.expect_op("}")
        return rows

    def _starts_value(self):
        t = self.tok
        return t.kind == "number" or (t.kind == "ident" and t.text == "_") or self.is_op("{")

    def number_list(self):
        out = [self.number()[0]]
        while self.is_op(","):
            self.advance()
            out.append(self.number()[0])
        return out

    def option_set(self):
        return frozenset(self.state_set())

    def stmt_cpt(self):
        start = self.advance().span
        var, _ = self.ident("a chance variable")
        parents = []
        if self.is_op("|"):
            self.advance()
            parents = self.names()
        rows = self.rows(self.number_list)
        self.cpts.append((var, parents, rows, start))

    def stmt_utility(self):
        start = self.advance().span
        var, _ = self.ident("a value node")
        rows = self.rows(lambda: self.number()[0])
        self.utils.append((var, rows, start))

    def stmt_restrict(self):
        start = self.advance().span
        decision, _ = self.ident("a decision")
        self.keyword("given")
        domain = self.names()
        rows = self.rows(self.option_set)
        self.restricts.append((decision, domain, rows, start))


_STATEMENTS = {"format", "chance", "decision", "testdecision", "value", "arc",
               "cpt", "utility", "restrict"}


# -- assembly ---------------------------------------------------------------

def _state_lists(parser, names, span):
    known = {n.id: n for n in parser.nodes}
    out = []
    for v in names:
        node = known.get(v)
        if node is None:
            raise _Syntax(f"undeclared variable {v!r}", span, "UnknownReference")
        if node.kind is NodeKind.VALUE:
            raise _Syntax(f"{v!r} is a value node", span, "ArcKindMismatch")
        out.append(node.states)
    return out


def _check_config(config, names, states, span):
    if len(config) != len(names):
        raise _Syntax(f"row configuration has {len(config)} entries, expected {len(names)}",
                      span, "ArityMismatch")
    for v, s, allowed in zip(names, config, states):
        if s not in allowed:
            raise _Syntax(f"{v!r} has no state {s!r}", span, "UnknownState")


def _build_cpt(parser, var, parents, rows, span):
    own, *pstates = _state_lists(parser, [var] + parents, span)
    shape = (len(own),) + tuple(len(s) for s in pstates)
    values = np.zeros(shape)
    defined = np.zeros(shape, dtype=bool)
    seen = set()
    for config, cells, row_span in rows:
        _check_config(config, parents, pstates, row_span)
        if config in seen:
            raise _Syntax(f"duplicate row {', '.join(config) or '()'}", row_span,
                          "DuplicateDeclaration")
        seen.add(config)
        if len(cells) != len(own):
            raise _Syntax(f"row has {len(cells)} entries but {var!r} has {len(own)} states",
                          row_span, "ArityMismatch")
        idx = tuple(s.index(c) for s, c in zip(pstates, config))
        for k, c in enumerate(cells):
            if c is not BOTTOM:
                values[(k,) + idx] = c
                defined[(k,) + idx] = True
    return PartialTable((var, *parents), (own, *pstates), values, defined, Kind.PROBABILITY)


def _build_utility(parser, var, rows, span):
    parents = [a.src for a in parser.arcs if a.dst == var]
    states = _state_lists(parser, parents, span)
    shape = tuple(len(s) for s in states)
    values = np.zeros(shape)
    defined = np.zeros(shape, dtype=bool)
    seen = set()
    for config, cell, row_span in rows:
        _check_config(config, parents, states, row_span)
        if config in seen:
            raise _Syntax(f"duplicate row {', '.join(config) or '()'}", row_span,
                          "DuplicateDeclaration")
        seen.add(config)
        idx = tuple(s.index(c) for s, c in zip(states, config))
        if cell is not BOTTOM:
            values[idx] = cell
            defined[idx] = True
    return PartialTable(tuple(parents), tuple(states), values, defined, Kind.UTILITY)


def _build_restrict(parser, decision, domain, rows, span):
    states = _state_lists(parser, domain, span)
    table = {}
    for config, options, row_span in rows:
        _check_config(config, domain, states, row_span)
        if config in table:
            raise _Syntax(f"duplicate row {', '.join(config)}", row_span, "DuplicateDeclaration")
        table[config] = options
    return RestrictiveFunction(decision, tuple(domain), table)


def parse_with_diagnostics(text, file="<input>"):
    """Parse ``text``; returns ``(model or None, diagnostics)``."""
    model, diags, _ = _parse(text, file)
    return model, diags


def _parse(text, file):
    try:
        parser = _Parser(text, file)
    except LexError as exc:
        return None, [Diagnostic("SyntaxError", str(exc), span=exc.span)], None
    parser.parse()
    diags = parser.diags
    probabilities, utilities, restrictives = {}, {}, []
    table_spans = {}
    for var, parents, rows, span in parser.cpts:
        try:
            if var in probabilities:
                raise _Syntax(f"second cpt for {var!r}", span, "DuplicateDeclaration")
            probabilities[var] = _build_cpt(parser, var, parents, rows, span)
            table_spans[var] = span
        except _Syntax as exc:
            diags.append(Diagnostic(exc.code, str(exc), span=exc.span, element=var))
    for var, rows, span in parser.utils:
        try:
            if var in utilities:
                raise _Syntax(f"second utility for {var!r}", span, "DuplicateDeclaration")
            utilities[var] = _build_utility(parser, var, rows, span)
            table_spans[var] = span
        except _Syntax as exc:
            diags.append(Diagnostic(exc.code, str(exc), span=exc.span, element=var))
    for decision, domain, rows, span in parser.restricts:
        try:
            restrictives.append(_build_restrict(parser, decision, domain, rows, span))
            parser.spans[("node", f"restrict {decision}")] = span
        except _Syntax as exc:
            diags.append(Diagnostic(exc.code, str(exc), span=exc.span, element=decision))

    model = AidModel(tuple(parser.nodes), tuple(parser.arcs), tuple(restrictives),
                     probabilities, utilities)
    if diags and not parser.nodes:
        return None, diags, parser
    for d in validate(model):
        span = None
        if d.code in _TABLE_CODES:
            span = table_spans.get(d.element)
        if span is None:
            span = parser.spans.get(("node", d.element))
        if span is None and d.element is None:
            span = parser.tokens[-1].span
        diags.append(dataclasses.replace(d, span=span))
    if any(d.is_error for d in diags):
        return None, diags, parser
    return model, diags, parser


def diagnose(text, file="<input>"):
    """Parse diagnostics followed by the cycle check, all with spans.

    Returns ``(model or None, diagnostics)``; the model is None when any
    diagnostic is an error.
    """
    from .structure import validate_cycles
    model, diags, parser = _parse(text, file)
    if model is None:
        return None, diags
    for d in validate_cycles(model):
        span = parser.spans.get(("node", d.element), parser.tokens[0].span)
        related = tuple(parser.spans[("node", r)] for r in d.related if ("node", r) in parser.spans)
        diags.append(dataclasses.replace(d, span=span, related=related))
    if any(d.is_error for d in diags):
        return None, diags
    return model, diags


def parse(text, file="<input>"):
    """Parse a model; raises ModelError carrying every diagnostic on failure."""
    model, diags = parse_with_diagnostics(text, file)
    if model is None:
        raise ModelError(diags)
    return model


def load(path):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), str(path))


# -- serialization ------------------------------------------------------------

def _num(v):
    if v is BOTTOM:
        return "_"
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _names(seq):
    return ", ".join(quote_id(s) for s in seq)


def _label(expr):
    return "" if expr == L.TRUE else f" label {L.to_text(expr)}"


def serialize(model):
    """Canonical text; ``parse(serialize(m))`` is structurally equal to ``m``."""
    out = [f"format {FORMAT_VERSION}", ""]
    for n in model.nodes:
        if n.kind is NodeKind.VALUE:
            out.append(f"value {quote_id(n.id)}{_label(n.label)}")
        else:
            out.append(f"{n.kind.value} {quote_id(n.id)} {{ {_names(n.states)} }}{_label(n.label)}")
    if model.arcs:
        out.append("")
    for a in model.arcs:
        out.append(f"arc {quote_id(a.src)} -> {quote_id(a.dst)} kind {a.kind.value}{_label(a.label)}")
    for var in model.chance:
        t = model.probabilities.get(var)
        if t is None:
            continue
        parents = [v for v in t.domain if v != var]
        t_vals, t_def = t.aligned((var, *parents), tuple(model.states(v) for v in (var, *parents)))
        head = f"cpt {quote_id(var)}" + (f" | {_names(parents)}" if parents else "")
        out += ["", head + " {"]
        for combo in itertools.product(*(model.states(p) for p in parents)):
            idx = tuple(model.states(p).index(s) for p, s in zip(parents, combo))
            cells = [_num(float(t_vals[(k,) + idx])) if t_def[(k,) + idx] else "_"
                     for k in range(len(model.states(var)))]
            prefix = f"{_names(combo)} : " if parents else ""
            out.append(f"  {prefix}{', '.join(cells)} ;")
        out.append("}")
    for var in model.values:
        t = model.utilities.get(var)
        if t is None:
            continue
        parents = model.parents(var)
        states = tuple(model.states(p) for p in parents)
        vals, dfn = t.aligned(tuple(parents), states)
        out += ["", f"utility {quote_id(var)} {{"]
        for combo in itertools.product(*states):
            idx = tuple(s.index(c) for s, c in zip(states, combo))
            cell = _num(float(vals[idx])) if dfn[idx] else "_"
            prefix = f"{_names(combo)} : " if parents else ""
            out.append(f"  {prefix}{cell} ;")
        out.append("}")
    for r in model.restrictives:
        out += ["", f"restrict {quote_id(r.decision)} given {_names(r.domain)} {{"]
        for combo in itertools.product(*(model.states(v) for v in r.domain)):
            allowed = [o for o in model.states(r.decision) if o in r.table[combo]]
            out.append(f"  {_names(combo)} : {{ {_names(allowed)} }} ;")
        out.append("}")
    return "\n".join(out) + "\n"


def dump(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(model))

