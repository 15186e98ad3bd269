"""Decomposition solver.

The model is split recursively on its next split variable.  Each subproblem
eliminates its own variables (those preceding the split, then the split
itself, or everything left at a leaf) by variable elimination over
probability potentials Phi and utility potentials Psi, where every
eliminated utility is kept divided by the matching probability mass.
Results of the branches below a split are merged back into potentials that
carry the split variable whenever they differ between branches.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import structure as St
from .errors import IllDefined, InadmissibleOrder, OrderContradiction
from .model import NodeKind, evidence_probability
from .potentials import (Kind, PartialTable, divide, equal, extend_with,
                         instantiate, max_out, multiply, product, sum_out,
                         total)

MERGE_TOL = 1e-12


@dataclass
class DecisionFunction:
    """Chosen option of ``decision`` in ``context`` for each configuration
    of the observed variables ``domain``."""

    decision: str
    context: St.Context
    domain: tuple
    table: dict
    reachable: bool = True

    def choose(self, assignment):
        return self.table[tuple(assignment[v] for v in self.domain)]

    def matches(self, assignment):
        return all(assignment.get(v) == s for v, s in self.context.split + self.context.restrictive)

    def rows(self):
        for config, choice in self.table.items():
            yield dict(zip(self.domain, config)), choice


@dataclass
class DecompositionNode:
    model: object
    split: str | None
    free: list
    order: list
    children: dict = field(default_factory=dict)
    merged_phi: list = field(default_factory=list)
    merged_psi: list = field(default_factory=list)
    branch_psi: dict = field(default_factory=dict)

    @property
    def configuration(self):
        return self.model.history

    def walk(self):
        yield self
        for c in self.children.values():
            yield from c.walk()


@dataclass
class SolveResult:
    meu: float
    strategies: list
    trace: DecompositionNode
    warnings: list = field(default_factory=list)

    def strategy_for(self, decision, assignment):
        """The decision function of ``decision`` whose context agrees with
        ``assignment``; None if there is none."""
        for f in self.strategies:
            if f.decision == decision and f.matches(assignment):
                return f
        return None


# -- elimination --------------------------------------------------------------

def _legal_mask(model, decision):
    legal = model.legal_options(decision, model.assigned)
    return np.array([s in legal for s in model.states(decision)])


def eliminate(var, phis, psis, decision=False, legal=None):
    """Eliminate one variable.  Returns ``(phis, psis, argmax)`` where
    ``argmax`` is None for chance variables."""
    phi_x = [p for p in phis if var in p.domain]
    psi_x = [p for p in psis if var in p.domain]
    phis = [p for p in phis if var not in p.domain]
    psis = [p for p in psis if var not in p.domain]
    if not decision and not phi_x and not psi_x:
        return phis, psis, None
    prod = product(phi_x)
    if not decision:
        mass = sum_out(prod, var)
        phis.append(mass)
        if psi_x:
            psis.append(divide(sum_out(multiply(prod, total(psi_x)), var), mass))
        return phis, psis, None
    if var not in prod.domain and not psi_x:
        # vacuous decision: nothing depends on it, every legal option ties
        return phis, psis, None
    utility = total(psi_x) if psi_x else PartialTable.scalar(0.0, Kind.UTILITY)
    joint = multiply(prod, utility)
    mass, _ = max_out(prod, var, legal) if var in prod.domain else (prod, None)
    best, argmax = max_out(joint, var, legal)
    phis.append(mass)
    psis.append(divide(best, mass))
    return phis, psis, argmax


def eliminate_in_order(phis, psis, sequence, kinds, legal=None, order=None):
    """Eliminate ``sequence`` left to right.

    ``kinds`` maps each variable to True for decisions; ``legal`` maps a
    decision to its option mask.  With a PartialOrder ``order`` the sequence
    must never eliminate a variable before one it precedes.
    """
    if order is not None:
        for i, x in enumerate(sequence):
            for y in sequence[i + 1:]:
                if x in order.index and y in order.index and order.precedes(x, y):
                    raise InadmissibleOrder(f"{x} is eliminated before {y} although {x} precedes {y}")
    legal = legal or {}
    records = []
    phis, psis = list(phis), list(psis)
    for var in sequence:
        phis, psis, argmax = eliminate(var, phis, psis, kinds.get(var, False), legal.get(var))
        if argmax is not None:
            records.append(argmax)
    return phis, psis, records


# -- branch merging -------------------------------------------------------------

def _split_shared(tables_by_branch):
    """Separate tables present (up to MERGE_TOL) in every branch from the
    branch-specific rest, matching as multisets.

    Returns ``(shared, rest_by_branch)``.
    """
    keys = list(tables_by_branch)
    if not keys:
        return [], {}
    rest = {k: list(tables_by_branch[k]) for k in keys}
    shared = []
    for t in list(rest[keys[0]]):
        hits = []
        for k in keys[1:]:
            hit = next((i for i, u in enumerate(rest[k]) if u is t or equal(u, t, MERGE_TOL)), None)
            if hit is None:
                break
            hits.append((k, hit))
        else:
            shared.append(t)
            rest[keys[0]].remove(t)
            for k, i in hits:
                del rest[k][i]
    return shared, rest


def absorb(branches, split, split_states):
    """Merge branch results ``{state: (phis, psis)}`` into the parent.

    Potentials common to every branch are kept once.  The rest are combined
    per branch and stacked along ``split``; states without a branch are
    undefined.  Returns ``(phis, psis, branch_psi)`` with ``branch_psi`` the
    per-state utility before stacking (empty when no utility depends on
    the branch).
    """
    shared_phi, own_phi = _split_shared({s: b[0] for s, b in branches.items()})
    shared_psi, own_psi = _split_shared({s: b[1] for s, b in branches.items()})
    phis, psis = list(shared_phi), list(shared_psi)
    if any(own_phi.values()):
        phis.append(extend_with({s: product(t) for s, t in own_phi.items()}, split, split_states,
                                Kind.PROBABILITY))
    branch_psi = {}
    if any(own_psi.values()):
        branch_psi = {s: total(t) if t else PartialTable.scalar(0.0, Kind.UTILITY)
                      for s, t in own_psi.items()}
        psis.append(extend_with(branch_psi, split, split_states, Kind.UTILITY))
    elif len(branches) < len(split_states):
        # some states are impossible: keep that visible to the max over split
        psis.append(extend_with({s: PartialTable.scalar(0.0, Kind.UTILITY) for s in branches},
                                split, split_states, Kind.UTILITY))
    return phis, psis, branch_psi


# -- decomposition ----------------------------------------------------------------

class _Solver:
    def __init__(self, prefer):
        self.prefer = prefer
        self.strategies = []

    def extension(self, model, order, own):
        if callable(self.prefer):
            seq = list(self.prefer(model, order, own))
            if sorted(seq) != sorted(own):
                raise InadmissibleOrder(f"order {seq} does not cover {sorted(own)}")
            for i, x in enumerate(seq):
                for y in seq[:i]:
                    if order.precedes(x, y):
                        raise InadmissibleOrder(f"{y} is placed before {x} although {x} precedes {y}")
            return seq
        remaining = [v for v in model.variables if v not in model.assigned]
        try:
            ext = order.linear_extension(remaining, self.prefer)
        except OrderContradiction:
            ext = order.linear_extension(own, self.prefer)
        return [v for v in ext if v in own]

    def evaluate(self, node, pots, above):
        model = node.model
        order = St.induce_partial_order(model)
        own = St.own_variables(model, node.split, above, order)
        seq = self.extension(model, order, own)
        trace = DecompositionNode(model, node.split, own, seq)
        if node.split is not None:
            split = node.split
            branches = {}
            below = above | set(own)
            for s, child in node.children.items():
                child_pots = [(o, instantiate(t, {split: s})) for o, t in pots if o in child.model]
                phis_s, psis_s, sub = self.evaluate(child, child_pots, below)
                branches[s] = (phis_s, psis_s)
                trace.children[s] = sub
            phis, psis, branch_psi = absorb(branches, split, model.states(split))
            trace.branch_psi = branch_psi
        else:
            phis = [t for o, t in pots if t.kind is Kind.PROBABILITY]
            psis = [t for o, t in pots if t.kind is Kind.UTILITY]
        trace.merged_phi, trace.merged_psi = list(phis), list(psis)
        for var in reversed(seq):
            is_decision = model.kind(var).is_decision
            legal = _legal_mask(model, var) if is_decision else None
            phis, psis, argmax = eliminate(var, phis, psis, is_decision, legal)
            if is_decision:
                self.record(model, order, var, argmax)
        return phis, psis, trace

    def record(self, model, order, decision, argmax):
        observed = {v for v in model.variables
                    if v not in model.assigned and v != decision and order.precedes(v, decision)}
        if argmax is not None:
            observed |= set(argmax.domain)
        domain = tuple(sorted(observed, key=model.rank.get))
        legal = model.legal_options(decision, model.assigned)
        table = {}
        for combo in itertools.product(*(model.states(v) for v in domain)):
            choice = argmax.choice(dict(zip(domain, combo))) if argmax is not None else None
            table[combo] = choice if choice is not None else legal[0]
        context = St.make_context(model, decision, model.history)
        try:
            reachable = evidence_probability(model, dict(model.history)) > 0.0
        except Exception:
            reachable = True
        self.strategies.append(DecisionFunction(decision, context, domain, table, reachable))


def solve(model, force=False, prefer="low"):
    """Optimal strategy and maximum expected utility of ``model``.

    Raises IllDefined unless the model is well defined; ``force`` proceeds
    on a PossiblyIllDefined verdict and records a warning.  ``prefer``
    picks the tie-break of the linear extension ("low" or "high"
    declaration index) and so the elimination order.  It may also be a
    callable ``(model, order, own) -> sequence`` returning a linear
    extension of the subproblem's own variables; they are eliminated last
    to first.
    """
    warnings = []
    verdict = St.well_definedness(model)
    if verdict.status == "IllDefinedRestrictives" or (not verdict.well_defined and not force):
        raise IllDefined(verdict)
    if not verdict.well_defined:
        warnings.append(f"solved despite verdict {verdict}")
    root = St.enumerate_split_configurations(model)
    pots = [(v, instantiate(t, model.assigned)) for v, t in model.probabilities.items()]
    pots += [(v, instantiate(t, model.assigned)) for v, t in model.utilities.items()]
    solver = _Solver(prefer)
    phis, psis, trace = solver.evaluate(root, pots, frozenset())
    mass = product(phis)
    utility = total(psis) if psis else PartialTable.scalar(0.0, Kind.UTILITY)
    meu = multiply(mass, utility).item()
    if not isinstance(meu, float):
        meu = 0.0
    return SolveResult(meu, solver.strategies, trace, warnings)


def meu(model, **options):
    return solve(model, **options).meu


def kinds_of(model):
    return {v: model.kind(v) is not NodeKind.CHANCE for v in model.variables}
