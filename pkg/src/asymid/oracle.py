"""Brute-force reference: unfold a model into an explicit decision tree and
solve it by averaging out chance nodes and folding back decisions.

The tree branches on every chance and decision variable in turn, following
the same split-configuration tree the structure analysis produces, and
computes each chance branch probability from the joint of the present
tables given everything assigned on the path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import structure as St
from .errors import OrderContradiction, TreeTooLarge
from .generate import realize
from .model import evidence_probability
from .potentials import BOTTOM, TIE_TOL

DEFAULT_BUDGET = 10 ** 6


@dataclass
class TreeNode:
    kind: str  # chance | decision | terminal
    variable: str | None = None
    assignment: dict = field(default_factory=dict)
    reach: float = 1.0
    branches: dict = field(default_factory=dict)  # state -> (probability or None, TreeNode)
    utility: float = 0.0

    def walk(self):
        yield self
        for _, child in self.branches.values():
            yield from child.walk()

    def terminals(self):
        return [n for n in self.walk() if n.kind == "terminal"]


@dataclass
class Rollback:
    meu: float
    # (decision, frozenset(assignment.items())) -> chosen option
    choices: dict
    # same key -> {option: expected utility}
    values: dict
    reach: dict


# -- unfolding ---------------------------------------------------------------

def _constrained(order, before):
    if not before:
        return order
    a, b = before
    if a not in order.index or b not in order.index:
        return order
    m = order.matrix.copy()
    m[order.index[a], order.index[b]] = True
    m = St._closure(m)
    return St.PartialOrder(order.variables, m, order.rank)


def _sequence(model, split, above, prefer, before):
    order = St.induce_partial_order(model)
    own = St.own_variables(model, split, above, order)
    order = _constrained(order, before)
    remaining = [v for v in model.variables if v not in model.assigned]
    try:
        ext = order.linear_extension(remaining, prefer)
    except OrderContradiction:
        ext = order.linear_extension(own, prefer)
    return [v for v in ext if v in own], own


class _Unfolder:
    def __init__(self, budget, prefer, before):
        self.budget = budget
        self.prefer = prefer
        self.before = before
        self.count = 0

    def tick(self):
        self.count += 1
        if self.count > self.budget:
            raise TreeTooLarge(f"decision tree exceeds {self.budget} nodes")

    def split_node(self, node, above, assignment, mass, reach):
        seq, own = _sequence(node.model, node.split, above, self.prefer, self.before)
        return self.expand(node, above | set(own), seq, 0, assignment, mass, reach)

    def expand(self, node, below, seq, i, assignment, mass, reach):
        self.tick()
        model = node.model
        if i == len(seq):
            return self.terminal(model, assignment, reach)
        var = seq[i]

        def child(state, a, m, r):
            if var == node.split:
                return self.split_node(node.children[state], below, a, m, r)
            return self.expand(node, below, seq, i + 1, a, m, r)

        if model.kind(var).is_decision:
            tn = TreeNode("decision", var, dict(assignment), reach)
            for s in model.legal_options(var, assignment):
                if var == node.split and s not in node.children:
                    continue
                a = dict(assignment)
                a[var] = s
                tn.branches[s] = (None, child(s, a, mass, reach))
            return tn
        tn = TreeNode("chance", var, dict(assignment), reach)
        table = model.probabilities[var]
        for s in model.states(var):
            a = dict(assignment)
            a[var] = s
            if all(v in a for v in table.domain) and table.get(a) is BOTTOM:
                continue
            joint = evidence_probability(model, a)
            p = joint / mass if mass > 0.0 else 0.0
            tn.branches[s] = (p, child(s, a, joint, reach * p))
        return tn

    def terminal(self, model, assignment, reach):
        u = 0.0
        for v in model.values:
            cell = model.utilities[v].get(assignment)
            if cell is not BOTTOM:
                u += cell
        return TreeNode("terminal", None, dict(assignment), reach, utility=u)


def unfold(model, budget=DEFAULT_BUDGET, prefer="low", before=None):
    """Decision tree of ``model``.

    ``before=(a, b)`` additionally forces ``a`` to be branched on before
    ``b`` wherever both are still open.
    """
    root = St.enumerate_split_configurations(model)
    u = _Unfolder(budget, prefer, before)
    assignment = dict(model.history)
    mass = evidence_probability(model, assignment)
    return u.split_node(root, frozenset(), assignment, mass, 1.0)


def _argbest(values, tol=TIE_TOL):
    best = max(values.values())
    for option, v in values.items():
        if v >= best - tol * (1.0 + abs(best)):
            return option, best
    return None, best


def rollback(tree):
    """Average-out and fold-back.  Ties go to the earliest option."""
    choices, values, reach = {}, {}, {}

    def back(node):
        if node.kind == "terminal":
            return node.utility
        if node.kind == "chance":
            return sum(p * back(c) for p, c in node.branches.values() if p)
        option_values = {s: back(c) for s, (_, c) in node.branches.items()}
        if not option_values:
            return 0.0
        choice, best = _argbest(option_values)
        key = (node.variable, frozenset(node.assignment.items()))
        choices[key] = choice
        values[key] = option_values
        reach[key] = node.reach
        return best

    meu = back(tree)
    return Rollback(meu, choices, values, reach)


def scenario_count(tree):
    return len(tree.terminals())


def state_space_size(model):
    n = 1
    for v in model.variables:
        n *= len(model.states(v))
    return n


def solve(model, budget=DEFAULT_BUDGET, prefer="low"):
    tree = unfold(model, budget, prefer)
    return rollback(tree), tree


# -- comparison with the solver ----------------------------------------------

def compare(result, roll, tol=1e-9, strict=True):
    """Disagreements between a solver result and an oracle rollback.

    Only decision nodes reached with positive probability are compared.
    With ``strict`` the prescribed options must be identical; otherwise a
    differing choice only counts when it is worse than the oracle's by more
    than the tie tolerance.
    """
    problems = []
    if abs(result.meu - roll.meu) > tol:
        problems.append(f"meu {result.meu!r} != {roll.meu!r}")
    for (decision, items), choice in roll.choices.items():
        if roll.reach[(decision, items)] <= 0.0:
            continue
        a = dict(items)
        f = result.strategy_for(decision, a)
        if f is None:
            problems.append(f"no decision function for {decision} at {a}")
            continue
        try:
            mine = f.choose(a)
        except KeyError as exc:
            problems.append(f"{decision} at {a}: observed variable {exc} not on the path")
            continue
        if mine != choice:
            vals = roll.values[(decision, items)]
            best = vals[choice]
            if strict or mine not in vals or vals[mine] < best - TIE_TOL * (1.0 + abs(best)):
                problems.append(f"{decision} at {a}: solver chose {mine}, oracle {choice}")
    return problems


# -- significance -----------------------------------------------------------------

@dataclass
class ProbeResult:
    status: str  # Significant | NoEvidence
    trials: int
    realization: object = None
    detail: str = ""

    @property
    def significant(self):
        return self.status == "Significant"

    def __str__(self):
        if self.significant:
            return f"Significant after {self.trials} trial(s): {self.detail}"
        return f"NoEvidence over {self.trials} trial(s)"


def _strategy_difference(model, decision, chance, seen, blind, tol=TIE_TOL):
    """First history where observing ``chance`` changes the optimal choice
    for ``decision`` by more than a tie."""
    for (d, items), choice in blind.choices.items():
        if d != decision or blind.reach[(d, items)] <= 0.0:
            continue
        base = dict(items)
        for s in model.states(chance):
            key = (decision, frozenset({**base, chance: s}.items()))
            if key not in seen.choices or seen.reach[key] <= 0.0:
                continue
            vals = seen.values[key]
            best = vals[seen.choices[key]]
            if vals.get(choice, -np.inf) < best - tol * (1.0 + abs(best)):
                return f"{decision} picks {seen.choices[key]} when {chance}={s} is seen first, {choice} otherwise"
    return None


def significance_probe(model, decision, chance, trials=100, seed=0):
    """Look for a realization under which placing ``chance`` immediately
    before ``decision`` changes the optimal strategy for ``decision``.

    One-sided: NoEvidence is not a proof of insignificance.
    """
    rng = np.random.default_rng(seed)
    for k in range(1, trials + 1):
        r = realize(model, rng)
        seen = rollback(unfold(r, before=(chance, decision)))
        blind = rollback(unfold(r, before=(decision, chance)))
        detail = _strategy_difference(r, decision, chance, seen, blind)
        if detail:
            return ProbeResult("Significant", k, r, detail)
    return ProbeResult("NoEvidence", trials)


def probe_model(model, trials=100, seed=0):
    """Probe every witness of the conservative check.  Returns a list of
    ``(witness, ProbeResult)``; empty for a model without witnesses."""
    verdict = St.well_definedness(model)
    if verdict.status != "PossiblyIllDefined":
        return []
    out, done = [], set()
    for w in verdict.witnesses:
        key = (w.decision, w.other, w.configuration)
        if key in done:
            continue
        done.add(key)
        sub = St.reduce_sequence(model, w.configuration)
        out.append((w, significance_probe(sub, w.decision, w.other, trials, seed)))
    return out


def overall(results):
    """Combined status of ``probe_model`` output."""
    for _, r in results:
        if r.significant:
            return r
    return ProbeResult("NoEvidence", max((r.trials for _, r in results), default=0))

