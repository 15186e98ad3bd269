"""Partial probability and utility tables.

A cell is either a real number or undefined (``BOTTOM``, written ``_`` in
model files).  Undefined behaves as an additive identity and a
multiplicative zero, and is kept apart from 0.0 by a parallel boolean mask.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import KindMismatch, VariableNotInDomain


class _Bottom:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOTTOM"

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()

TIE_TOL = 1e-9
EQ_TOL = 1e-12


class Kind(enum.Enum):
    PROBABILITY = "probability"
    UTILITY = "utility"


class PartialTable:
    """Dense table over the joint state space of ``domain``.

    ``states[i]`` lists the states of ``domain[i]``; ``values`` and
    ``defined`` share the shape ``tuple(len(s) for s in states)``.
    """

    __slots__ = ("domain", "states", "values", "defined", "kind")

    def __init__(self, domain, states, values, defined=None, kind=Kind.PROBABILITY):
        self.domain = tuple(domain)
        self.states = tuple(tuple(s) for s in states)
        shape = tuple(len(s) for s in self.states)
        values = np.asarray(values, dtype=float).reshape(shape)
        if defined is None:
            defined = np.ones(shape, dtype=bool)
        self.defined = np.asarray(defined, dtype=bool).reshape(shape)
        self.values = np.where(self.defined, values, 0.0)
        self.kind = kind
        if len(set(self.domain)) != len(self.domain):
            raise ValueError(f"duplicate variable in domain {self.domain}")

    # -- construction -----------------------------------------------------

    @classmethod
    def scalar(cls, value, kind=Kind.PROBABILITY):
        if value is BOTTOM:
            return cls((), (), 0.0, False, kind)
        return cls((), (), float(value), True, kind)

    @classmethod
    def from_cells(cls, domain, states, cells, kind=Kind.PROBABILITY):
        """Build from a flat row-major sequence whose entries may be BOTTOM."""
        cells = list(cells)
        defined = np.array([c is not BOTTOM for c in cells], dtype=bool)
        values = np.array([0.0 if c is BOTTOM else float(c) for c in cells])
        return cls(domain, states, values, defined, kind)

    @classmethod
    def bottom(cls, domain, states, kind=Kind.UTILITY):
        shape = tuple(len(s) for s in states)
        return cls(domain, states, np.zeros(shape), np.zeros(shape, bool), kind)

    # -- inspection -------------------------------------------------------

    @property
    def shape(self):
        return self.values.shape

    def state_map(self):
        return dict(zip(self.domain, self.states))

    def cells(self):
        """Flat row-major cell list with BOTTOM for undefined entries."""
        return [v if d else BOTTOM
                for v, d in zip(self.values.ravel().tolist(), self.defined.ravel().tolist())]

    def configurations(self):
        return itertools.product(*self.states)

    def index_of(self, assignment):
        return tuple(self.states[i].index(assignment[v]) for i, v in enumerate(self.domain))

    def get(self, assignment):
        """Cell value at a (super-)assignment; BOTTOM if undefined."""
        idx = self.index_of(assignment)
        return float(self.values[idx]) if self.defined[idx] else BOTTOM

    def item(self):
        if self.domain:
            raise ValueError("table is not a scalar")
        return float(self.values) if bool(self.defined) else BOTTOM

    def __repr__(self):
        return f"PartialTable({self.kind.value}, {self.domain}, {self.cells()})"

    def with_kind(self, kind):
        return PartialTable(self.domain, self.states, self.values, self.defined, kind)

    # -- alignment --------------------------------------------------------

    def aligned(self, domain, states):
        """Values and mask broadcast onto a superset ``domain``."""
        perm = [self.domain.index(v) for v in domain if v in self.domain]
        vals = np.transpose(self.values, perm)
        mask = np.transpose(self.defined, perm)
        shape = []
        for v, s in zip(domain, states):
            shape.append(len(s) if v in self.domain else 1)
        vals = vals.reshape(shape)
        mask = mask.reshape(shape)
        full = tuple(len(s) for s in states)
        return np.broadcast_to(vals, full), np.broadcast_to(mask, full)


def _union(a, b):
    domain = list(a.domain)
    states = list(a.states)
    for v, s in zip(b.domain, b.states):
        if v in a.domain:
            if a.states[a.domain.index(v)] != s:
                raise ValueError(f"state spaces of {v!r} disagree")
        else:
            domain.append(v)
            states.append(s)
    return tuple(domain), tuple(states)


def multiply(a, b):
    """Cellwise product; undefined cells absorb (multiplicative zero)."""
    domain, states = _union(a, b)
    av, ad = a.aligned(domain, states)
    bv, bd = b.aligned(domain, states)
    defined = ad & bd
    kind = Kind.PROBABILITY if a.kind is b.kind is Kind.PROBABILITY else Kind.UTILITY
    return PartialTable(domain, states, np.where(defined, av * bv, 0.0), defined, kind)


def add(a, b):
    """Cellwise sum of utility tables; undefined is the additive identity."""
    if a.kind is not Kind.UTILITY or b.kind is not Kind.UTILITY:
        raise KindMismatch("add() is defined on utility tables only")
    domain, states = _union(a, b)
    av, ad = a.aligned(domain, states)
    bv, bd = b.aligned(domain, states)
    values = np.where(ad, av, 0.0) + np.where(bd, bv, 0.0)
    return PartialTable(domain, states, values, ad | bd, Kind.UTILITY)


def divide(a, b):
    """Cellwise quotient with 0/0 read as 0; undefined if either side is."""
    domain, states = _union(a, b)
    av, ad = a.aligned(domain, states)
    bv, bd = b.aligned(domain, states)
    defined = ad & bd
    safe = np.where(bv == 0.0, 1.0, bv)
    values = np.where(defined & (bv != 0.0), av / safe, 0.0)
    return PartialTable(domain, states, values, defined, a.kind)


def product(tables, kind=Kind.PROBABILITY):
    out = PartialTable.scalar(1.0, kind)
    for t in tables:
        out = multiply(out, t)
    return out


def total(tables):
    out = PartialTable.scalar(BOTTOM, Kind.UTILITY)
    for t in tables:
        out = add(out, t.with_kind(Kind.UTILITY))
    return out


def _axis(t, var):
    try:
        return t.domain.index(var)
    except ValueError:
        raise VariableNotInDomain(f"{var!r} not in {t.domain}") from None


def _drop(t, axis):
    return t.domain[:axis] + t.domain[axis + 1:], t.states[:axis] + t.states[axis + 1:]


def sum_out(t, var):
    """Sum ``var`` away over defined cells; an all-undefined fibre stays undefined."""
    axis = _axis(t, var)
    values = np.where(t.defined, t.values, 0.0).sum(axis=axis)
    defined = t.defined.any(axis=axis)
    domain, states = _drop(t, axis)
    return PartialTable(domain, states, values, defined, t.kind)


@dataclass
class ArgmaxTable:
    """Chosen option of ``decision`` per configuration of ``domain``; -1 = undefined."""

    decision: str
    options: tuple
    domain: tuple
    states: tuple
    index: np.ndarray

    def choice(self, assignment):
        idx = tuple(self.states[i].index(assignment[v]) for i, v in enumerate(self.domain))
        k = int(self.index[idx])
        return None if k < 0 else self.options[k]

    def rows(self):
        for combo in itertools.product(*self.states):
            yield dict(zip(self.domain, combo)), self.choice(dict(zip(self.domain, combo)))


def max_out(t, var, legal=None, tol=TIE_TOL):
    """Maximise ``var`` away over legal, defined cells.

    ``legal`` is a boolean mask over the states of ``var`` or a mask of the
    table's full shape.  Ties within ``tol`` (relative) go to the lowest
    state index.  Returns ``(table, ArgmaxTable)``.
    """
    axis = _axis(t, var)
    mask = t.defined.copy()
    if legal is not None:
        legal = np.asarray(legal, dtype=bool)
        if legal.ndim == 1:
            shape = [1] * t.values.ndim
            shape[axis] = legal.shape[0]
            legal = legal.reshape(shape)
        mask &= np.broadcast_to(legal, t.shape)
    vals = np.where(mask, t.values, -np.inf)
    best = vals.max(axis=axis)
    defined = mask.any(axis=axis)
    best = np.where(defined, best, 0.0)
    thresh = np.expand_dims(best - tol * (1.0 + np.abs(best)), axis)
    hit = mask & (vals >= thresh)
    index = np.where(defined, np.argmax(hit, axis=axis), -1)
    domain, states = _drop(t, axis)
    out = PartialTable(domain, states, best, defined, t.kind)
    return out, ArgmaxTable(var, t.states[axis], domain, states, np.asarray(index))


def instantiate(t, assignment):
    """Slice ``t`` at the assigned variables of its domain."""
    index = []
    domain, states = [], []
    for v, s in zip(t.domain, t.states):
        if v in assignment:
            index.append(s.index(assignment[v]))
        else:
            index.append(slice(None))
            domain.append(v)
            states.append(s)
    if len(domain) == len(t.domain):
        return t
    index = tuple(index)
    return PartialTable(domain, states, t.values[index], t.defined[index], t.kind)


def extend_with(branches, var, var_states, kind=None):
    """Stack per-state branch tables into one table carrying ``var``.

    ``branches`` maps a state of ``var`` to a table not mentioning ``var``;
    states without a branch, and cells a branch does not define, are
    undefined in the result.
    """
    tables = list(branches.values())
    if kind is None:
        kind = tables[0].kind if tables else Kind.UTILITY
    domain, states = (var,), (tuple(var_states),)
    for t in tables:
        if var in t.domain:
            raise ValueError(f"branch table already mentions {var!r}")
        domain, states = _union(PartialTable.bottom(domain, states), t)
    shape = tuple(len(s) for s in states)
    values = np.zeros(shape)
    defined = np.zeros(shape, dtype=bool)
    for s, t in branches.items():
        k = states[0].index(s)
        tv, td = t.aligned(domain[1:], states[1:])
        values[k] = tv
        defined[k] = td
    return PartialTable(domain, states, values, defined, kind)


def equal(a, b, tol=EQ_TOL):
    """Same variable set and cellwise agreement; undefined matches undefined."""
    if set(a.domain) != set(b.domain) or a.state_map() != b.state_map():
        return False
    bv, bd = b.aligned(a.domain, a.states)
    if not np.array_equal(a.defined, bd):
        return False
    return bool(np.all(np.abs(np.where(a.defined, a.values - bv, 0.0)) <= tol))
