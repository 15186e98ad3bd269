"""Asymmetric influence diagram: graph, labels, realization and validation."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import labels as L
from .errors import IncompleteAssignment, ModelError, NotAChanceVariable, UnknownNode
from .potentials import BOTTOM, Kind, PartialTable, equal

ROW_TOL = 1e-9


class NodeKind(enum.Enum):
    CHANCE = "chance"
    DECISION = "decision"
    TEST = "testdecision"
    VALUE = "value"

    @property
    def is_decision(self):
        return self in (NodeKind.DECISION, NodeKind.TEST)


class ArcKind(enum.Enum):
    DEPENDENCY = "dependency"
    INFORMATIONAL = "informational"
    RESTRICTION = "restriction"
    TEST = "test"
    FUNCTIONAL = "functional"


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    states: tuple = ()
    label: L.Expr = L.TRUE


@dataclass(frozen=True)
class Arc:
    src: str
    dst: str
    kind: ArcKind
    label: L.Expr = L.TRUE

    @property
    def key(self):
        return (self.src, self.dst)

    def __str__(self):
        return f"{self.src} -> {self.dst}"


@dataclass(frozen=True)
class RestrictiveFunction:
    """Legal options of ``decision`` for each configuration of ``domain``."""

    decision: str
    domain: tuple
    table: dict = field(hash=False, compare=True)

    def options(self, assignment):
        return self.table[tuple(assignment[v] for v in self.domain)]


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    severity: str = "error"
    element: str | None = None
    span: object = None
    related: tuple = ()

    def __str__(self):
        where = f"{self.span}: " if self.span is not None else ""
        return f"{where}{self.severity}[{self.code}]: {self.message}"

    @property
    def is_error(self):
        return self.severity == "error"


@dataclass(frozen=True, eq=False)
class AidModel:
    """Immutable model.  ``history`` lists the split variables instantiated
    so far (in order) when the model is the result of reductions."""

    nodes: tuple
    arcs: tuple
    restrictives: tuple = ()
    probabilities: dict = field(default_factory=dict)
    utilities: dict = field(default_factory=dict)
    history: tuple = ()
    removed: tuple = ()  # nodes dropped by reductions, kept for their state spaces

    # -- lookups ----------------------------------------------------------

    @cached_property
    def _by_id(self):
        return {n.id: n for n in self.nodes}

    @cached_property
    def rank(self):
        """Declaration index of each node."""
        return {n.id: i for i, n in enumerate(self.nodes)}

    @cached_property
    def assigned(self):
        return dict(self.history)

    def node(self, node_id) -> Node:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def __contains__(self, node_id):
        return node_id in self._by_id

    @property
    def node_ids(self):
        return [n.id for n in self.nodes]

    def kind(self, node_id):
        return self.node(node_id).kind

    def states(self, node_id):
        return self.node(node_id).states

    @cached_property
    def state_spaces(self):
        return {n.id: n.states for n in self.nodes if n.kind is not NodeKind.VALUE}

    @cached_property
    def known_state_spaces(self):
        """State spaces of present and removed variables."""
        out = {n.id: n.states for n in self.removed if n.kind is not NodeKind.VALUE}
        out.update(self.state_spaces)
        return out

    def of_kind(self, *kinds):
        return [n.id for n in self.nodes if n.kind in kinds]

    @property
    def chance(self):
        return self.of_kind(NodeKind.CHANCE)

    @property
    def decisions(self):
        return self.of_kind(NodeKind.DECISION, NodeKind.TEST)

    @property
    def values(self):
        return self.of_kind(NodeKind.VALUE)

    @property
    def variables(self):
        """Chance and decision variables in declaration order."""
        return self.of_kind(NodeKind.CHANCE, NodeKind.DECISION, NodeKind.TEST)

    @cached_property
    def _in_arcs(self):
        out = {n.id: [] for n in self.nodes}
        for a in self.arcs:
            if a.dst in out:
                out[a.dst].append(a)
        return out

    @cached_property
    def _out_arcs(self):
        out = {n.id: [] for n in self.nodes}
        for a in self.arcs:
            if a.src in out:
                out[a.src].append(a)
        return out

    def in_arcs(self, node_id):
        return self._in_arcs[node_id]

    def out_arcs(self, node_id):
        return self._out_arcs[node_id]

    def parents(self, node_id):
        return [a.src for a in self.in_arcs(node_id)]

    def children(self, node_id):
        return [a.dst for a in self.out_arcs(node_id)]

    def arc(self, src, dst):
        for a in self._out_arcs.get(src, ()):
            if a.dst == dst:
                return a
        return None

    def restricting(self, decision):
        """Variables with a restriction arc into ``decision``."""
        return [a.src for a in self.in_arcs(decision) if a.kind is ArcKind.RESTRICTION]

    @cached_property
    def restrictive_variables(self):
        out = []
        for a in self.arcs:
            if a.kind is ArcKind.RESTRICTION and a.src not in out:
                out.append(a.src)
        return sorted(out, key=self.rank.get)

    def restrictives_for(self, decision):
        return [r for r in self.restrictives if r.decision == decision]

    def legal_options(self, decision, assignment):
        """Legal options of ``decision`` given an assignment that fixes the
        domain of at most one applicable restrictive function."""
        options = self.states(decision)
        for r in self.restrictives_for(decision):
            if all(v in assignment for v in r.domain):
                allowed = r.options(assignment)
                return tuple(o for o in options if o in allowed)
        return options

    def labels(self):
        """Every attached label: ``(owner, expr)`` for nodes and arcs."""
        out = [(n.id, n.label) for n in self.nodes]
        out += [(a, a.label) for a in self.arcs]
        return out

    def replace(self, **changes):
        fields = dict(nodes=self.nodes, arcs=self.arcs, restrictives=self.restrictives,
                      probabilities=self.probabilities, utilities=self.utilities,
                      history=self.history, removed=self.removed)
        fields.update(changes)
        return AidModel(**fields)


def probability_domain(model, var):
    """``{X}`` plus the parents of X that are not test decisions."""
    if model.kind(var) is not NodeKind.CHANCE:
        raise NotAChanceVariable(var)
    return {var} | {a.src for a in model.in_arcs(var)
                    if a.kind is not ArcKind.TEST and model.kind(a.src) is not NodeKind.TEST}


def utility_domain(model, var):
    return set(model.parents(var))


# -- validation -------------------------------------------------------------

def _reaches_value(model):
    """Nodes with a directed path to some value node."""
    reach = set(model.values)
    changed = True
    while changed:
        changed = False
        for a in model.arcs:
            if a.dst in reach and a.src not in reach:
                reach.add(a.src)
                changed = True
    return reach


def validate(model):
    """All diagnostics for ``model`` in a deterministic order."""
    diags = []

    def err(code, message, element=None):
        diags.append(Diagnostic(code, message, "error", element))

    def warn(code, message, element=None):
        diags.append(Diagnostic(code, message, "warning", element))

    ids = set()
    for n in model.nodes:
        if n.id in ids:
            err("DuplicateDeclaration", f"node {n.id!r} declared twice", n.id)
        ids.add(n.id)
        if n.kind is NodeKind.VALUE and n.states:
            err("StatesOnValueNode", f"value node {n.id!r} cannot have states", n.id)
        if n.kind is not NodeKind.VALUE and not n.states:
            err("NoStates", f"variable {n.id!r} needs at least one state", n.id)
        if len(set(n.states)) != len(n.states):
            err("DuplicateState", f"variable {n.id!r} repeats a state", n.id)
    if not model.nodes:
        err("NoVariables", "no variables declared")
        return diags

    seen_arcs = set()
    for a in model.arcs:
        name = str(a)
        bad = [v for v in (a.src, a.dst) if v not in model]
        if bad:
            err("UnknownReference", f"arc {name} references undeclared {bad[0]!r}", name)
            continue
        if a.key in seen_arcs:
            err("DuplicateDeclaration", f"arc {name} declared twice", name)
        seen_arcs.add(a.key)
        sk, dk = model.kind(a.src), model.kind(a.dst)
        if sk is NodeKind.VALUE:
            err("ValueNodeWithSuccessor", f"value node {a.src!r} has successor {a.dst!r}", name)
            continue
        if a.kind is ArcKind.TEST:
            if sk is not NodeKind.TEST:
                err("TestArcFromNonTest", f"test arc {name} must leave a test decision", name)
            if dk is NodeKind.VALUE:
                err("ArcKindMismatch", f"test arc {name} cannot enter a value node", name)
        elif dk is NodeKind.VALUE and a.kind is not ArcKind.FUNCTIONAL:
            err("ArcKindMismatch", f"arc {name} into a value node must be functional", name)
        elif a.kind is ArcKind.FUNCTIONAL and dk is not NodeKind.VALUE:
            err("ArcKindMismatch", f"functional arc {name} must enter a value node", name)
        elif a.kind in (ArcKind.INFORMATIONAL, ArcKind.RESTRICTION) and not dk.is_decision:
            err("ArcKindMismatch", f"informational arc {name} must enter a decision", name)
        elif a.kind is ArcKind.DEPENDENCY and dk is not NodeKind.CHANCE:
            err("ArcKindMismatch", f"dependency arc {name} must enter a chance node", name)
        if a.label != L.TRUE and not (dk.is_decision and a.kind is not ArcKind.FUNCTIONAL):
            err("LabelOnNonInformationalArc", f"only informational arcs carry labels ({name})", name)

    # labels: atoms must resolve, and every mentioned variable needs an arc
    arc_keys = {a.key for a in model.arcs}
    for owner, expr in model.labels():
        target = owner.dst if isinstance(owner, Arc) else owner
        where = f"label of {owner}"
        for atom in L.atoms(expr):
            if atom.var not in model:
                err("UnknownReference", f"{where} mentions undeclared {atom.var!r}", str(owner))
            elif model.kind(atom.var) is NodeKind.VALUE:
                err("LabelOnValueVariable", f"{where} mentions value node {atom.var!r}", str(owner))
            elif atom.state not in model.states(atom.var):
                err("UnknownState", f"{where}: {atom.var!r} has no state {atom.state!r}", str(owner))
        for var in sorted(L.dom(expr)):
            if var in model and (var, target) not in arc_keys:
                err("LabelWithoutArc",
                    f"{where} mentions {var!r} but there is no arc {var} -> {target}", str(owner))

    # restrictive functions
    for r in model.restrictives:
        name = f"restrict {r.decision}"
        if r.decision not in model or not model.kind(r.decision).is_decision:
            err("UnknownReference", f"{name}: {r.decision!r} is not a decision", name)
            continue
        restricting = set(model.restricting(r.decision))
        for v in r.domain:
            if v not in model:
                err("UnknownReference", f"{name} references undeclared {v!r}", name)
            elif v not in restricting:
                err("RestrictionWithoutArc", f"{name}: no restriction arc {v} -> {r.decision}", name)
        if any(v not in model for v in r.domain):
            continue
        options = set(model.states(r.decision))
        for combo in itertools.product(*(model.states(v) for v in r.domain)):
            allowed = r.table.get(combo)
            if allowed is None:
                err("IncompleteRestriction",
                    f"{name}: no entry for configuration {', '.join(combo) or '()'}", name)
            elif not allowed:
                err("EmptyOptionSet", f"{name}: empty option set for {', '.join(combo)}", name)
            elif not set(allowed) <= options:
                err("UnknownState", f"{name}: unknown option in {sorted(allowed)}", name)

    # realization
    for n in model.nodes:
        if n.kind is NodeKind.CHANCE:
            table = model.probabilities.get(n.id)
            if table is None:
                err("MissingTable", f"chance variable {n.id!r} has no probability table", n.id)
                continue
            want = probability_domain(model, n.id) if all(p in model for p in model.parents(n.id)) else set()
            if set(table.domain) != want:
                err("TableDomainMismatch",
                    f"table of {n.id!r} is over {sorted(table.domain)}, expected {sorted(want)}", n.id)
                continue
            _check_probability(model, n.id, table, err, warn)
        elif n.kind is NodeKind.VALUE:
            table = model.utilities.get(n.id)
            if table is None:
                err("MissingTable", f"value node {n.id!r} has no utility table", n.id)
                continue
            if set(table.domain) != utility_domain(model, n.id):
                err("TableDomainMismatch",
                    f"utility of {n.id!r} is over {sorted(table.domain)}, "
                    f"expected {sorted(utility_domain(model, n.id))}", n.id)
                continue
            if np.any(table.defined & (table.values < 0)):
                err("NegativeUtility", f"utility of {n.id!r} has a negative cell", n.id)
    for var in model.probabilities:
        if var not in model or model.kind(var) is not NodeKind.CHANCE:
            err("UnknownReference", f"probability table for non-chance {var!r}", var)
    for var in model.utilities:
        if var not in model or model.kind(var) is not NodeKind.VALUE:
            err("UnknownReference", f"utility table for non-value {var!r}", var)

    if not any(e.is_error for e in diags):
        reach = _reaches_value(model)
        for v in model.variables:
            if v not in reach:
                err("BarrenNode", f"{v!r} does not precede any value node", v)
    return diags


def _check_probability(model, var, table, err, warn):
    for v, s in zip(table.domain, table.states):
        if tuple(s) != tuple(model.states(v)):
            err("TableDomainMismatch", f"table of {var!r} uses wrong states for {v!r}", var)
            return
    if np.any(table.defined & ((table.values < 0) | (table.values > 1 + ROW_TOL))):
        err("ProbabilityOutOfRange", f"table of {var!r} has a cell outside [0, 1]", var)
    axis = table.domain.index(var)
    defined = np.moveaxis(table.defined, axis, -1)
    values = np.moveaxis(table.values, axis, -1)
    sums = np.where(defined, values, 0.0).sum(axis=-1)
    any_defined = defined.any(axis=-1)
    bad = any_defined & (np.abs(sums - 1.0) > ROW_TOL)
    if np.any(bad):
        err("RowNotNormalized", f"a defined row of P({var}|...) does not sum to 1", var)
    if np.any(~any_defined):
        warn("UndefinedRow",
             f"P({var}|...) has an entirely undefined row; the label of {var!r} "
             "must exclude that parent configuration", var)


def build_model(nodes, arcs, restrictives=(), probabilities=None, utilities=None):
    """Assemble and validate a model; raise ModelError on any error."""
    model = AidModel(tuple(nodes), tuple(arcs), tuple(restrictives),
                     dict(probabilities or {}), dict(utilities or {}))
    diags = validate(model)
    if any(d.is_error for d in diags):
        raise ModelError(diags)
    return model


def structurally_equal(a, b):
    if a.nodes != b.nodes or a.arcs != b.arcs or a.history != b.history:
        return False
    if [(r.decision, r.domain, {k: frozenset(v) for k, v in r.table.items()}) for r in a.restrictives] != \
       [(r.decision, r.domain, {k: frozenset(v) for k, v in r.table.items()}) for r in b.restrictives]:
        return False
    for mine, theirs in ((a.probabilities, b.probabilities), (a.utilities, b.utilities)):
        if mine.keys() != theirs.keys():
            return False
        for k in mine:
            if not equal(mine[k], theirs[k], tol=0.0):
                return False
    return True


def table(var_domain, states, cells, kind=Kind.PROBABILITY):
    """Shorthand used by fixtures and tests."""
    return PartialTable.from_cells(var_domain, states, cells, kind)


def evidence_probability(model, assignment):
    """P(chance part of ``assignment``) with its decisions held fixed.

    Sums the product of the tables of the ancestral set of the assigned
    chance variables; undefined cells count as impossible.
    """
    evidence = [v for v in assignment if v in model and model.kind(v) is NodeKind.CHANCE]
    ancestral, stack = set(), list(evidence)
    while stack:
        v = stack.pop()
        if v in ancestral:
            continue
        ancestral.add(v)
        for p in probability_domain(model, v) - {v}:
            if model.kind(p) is NodeKind.CHANCE:
                stack.append(p)
            elif p not in assignment:
                raise IncompleteAssignment({p})
    hidden = sorted((v for v in ancestral if v not in assignment), key=model.rank.get)
    tables = [model.probabilities[v] for v in sorted(ancestral, key=model.rank.get)]
    total = 0.0
    full = dict(assignment)
    for combo in itertools.product(*(model.states(v) for v in hidden)):
        full.update(zip(hidden, combo))
        p = 1.0
        for t in tables:
            cell = t.get(full)
            if cell is BOTTOM or cell == 0.0:
                p = 0.0
                break
            p *= cell
        total += p
    return total
