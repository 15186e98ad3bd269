"""Qualitative analysis: inherited labels, the induced partial order,
split variables, reduction and split-configuration trees."""

from __future__ import annotations

import functools
import heapq
from dataclasses import dataclass, field

import numpy as np

from . import labels as L
from .errors import (ImpossibleState, NoUniqueInitialSplit, NotADecision,
                     NotInitialSplit, OrderContradiction)
from .model import ArcKind, Diagnostic, NodeKind

_IBAR = (ArcKind.DEPENDENCY, ArcKind.FUNCTIONAL)


# -- inherited labels --------------------------------------------------------

@functools.lru_cache(maxsize=4096)
def _dep_map(model):
    preds = {n.id: [] for n in model.nodes}
    for a in model.arcs:
        if a.kind in _IBAR and not model.kind(a.dst).is_decision:
            preds[a.dst].append(a.src)
    out = {}
    for v in preds:
        seen, stack = set(), list(preds[v])
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(preds[u])
        seen.discard(v)
        out[v] = frozenset(seen)
    return out


def dep(model, var):
    """Variables with a directed path to ``var`` once test and
    informational arcs are removed."""
    model.node(var)
    return set(_dep_map(model)[var])


def effective_label(model, var):
    """Own label conjoined with the labels inherited through ``dep``.

    Decision nodes inherit nothing.
    """
    node = model.node(var)
    if node.kind.is_decision:
        return L.fold(node.label)
    inherited = sorted(_dep_map(model)[var], key=model.rank.get)
    return L.conjoin([node.label] + [model.node(y).label for y in inherited])


def ibar_descendants(model, roots):
    succ = {n.id: [] for n in model.nodes}
    for a in model.arcs:
        if a.kind in _IBAR and not model.kind(a.dst).is_decision:
            succ[a.src].append(a.dst)
    seen, stack = set(), list(roots)
    while stack:
        u = stack.pop()
        for w in succ.get(u, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


# -- partial order -----------------------------------------------------------

def _closure(m):
    m = m.copy()
    for k in range(m.shape[0]):
        m |= np.outer(m[:, k], m[k, :])
    return m


class PartialOrder:
    """Strict precedence over the chance and decision variables of a model.

    The relation may contain cycles for models whose labelled arcs form
    cycles; ``linear_extension`` refuses those.
    """

    def __init__(self, variables, matrix, rank):
        self.variables = list(variables)
        self.index = {v: i for i, v in enumerate(self.variables)}
        self.matrix = matrix
        self.rank = rank

    def precedes(self, x, y):
        return bool(self.matrix[self.index[x], self.index[y]])

    def incompatible(self, x, y):
        return x != y and not self.precedes(x, y) and not self.precedes(y, x)

    def predecessors(self, y):
        j = self.index[y]
        return [v for v in self.variables if self.matrix[self.index[v], j] and v != y]

    def pairs(self):
        return [(x, y) for x in self.variables for y in self.variables
                if x != y and self.precedes(x, y)]

    def cyclic(self):
        return [v for v in self.variables if self.matrix[self.index[v], self.index[v]]]

    def cycle_witness(self, subset=None):
        nodes = [v for v in (subset or self.variables) if self.precedes(v, v)]
        if not nodes:
            return []
        start = nodes[0]
        return [start] + [v for v in nodes[1:]
                          if self.precedes(start, v) and self.precedes(v, start)] + [start]

    def linear_extension(self, subset=None, prefer="low"):
        """Topological order of ``subset`` (default: all variables).

        Among ready variables the lowest declaration index goes first, or
        the highest with ``prefer="high"``.
        """
        subset = list(self.variables if subset is None else subset)
        bad = [v for v in subset if self.precedes(v, v)]
        if bad:
            raise OrderContradiction(self.cycle_witness(bad))
        sign = 1 if prefer == "low" else -1
        members = set(subset)
        indeg = {v: sum(1 for u in members if u != v and self.precedes(u, v)) for v in subset}
        heap = [(sign * self.rank[v], v) for v in subset if indeg[v] == 0]
        heapq.heapify(heap)
        out = []
        while heap:
            _, v = heapq.heappop(heap)
            out.append(v)
            for w in members:
                if w != v and self.precedes(v, w):
                    indeg[w] -= 1
                    if indeg[w] == 0:
                        heapq.heappush(heap, (sign * self.rank[w], w))
        return out

    def linear_extensions(self, subset=None, limit=None):
        """Every topological order of ``subset``, lowest declaration index
        first; at most ``limit`` of them."""
        subset = sorted(self.variables if subset is None else subset, key=self.rank.get)
        if any(self.precedes(v, v) for v in subset):
            raise OrderContradiction(self.cycle_witness([v for v in subset if self.precedes(v, v)]))
        out, prefix, left = [], [], set(subset)

        def extend():
            if limit is not None and len(out) >= limit:
                return
            if not left:
                out.append(list(prefix))
                return
            for v in subset:
                if v in left and not any(u in left and u != v and self.precedes(u, v) for u in subset):
                    left.remove(v)
                    prefix.append(v)
                    extend()
                    prefix.pop()
                    left.add(v)

        extend()
        return out


@functools.lru_cache(maxsize=4096)
def induce_partial_order(model):
    variables = model.variables
    idx = {v: i for i, v in enumerate(variables)}
    n = len(variables)
    decisions = [v for v in variables if model.kind(v).is_decision]
    chance = [v for v in variables if model.kind(v) is NodeKind.CHANCE]
    m = np.zeros((n, n), dtype=bool)
    for a in model.arcs:
        if model.kind(a.dst).is_decision and a.src in idx:
            m[idx[a.src], idx[a.dst]] = True
    succ = {v: [a.dst for a in model.out_arcs(v)] for v in model.node_ids}
    for d in decisions:
        seen, stack = set(), list(succ[d])
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            stack.extend(succ[u])
        for y in seen:
            if y in idx:
                m[idx[d], idx[y]] = True
    m = _closure(m)
    while True:
        before = m.copy()
        for a in chance:
            ia = idx[a]
            if not any(m[ia, idx[dj]] for dj in decisions):
                for di in decisions:
                    m[idx[di], ia] = True
            for di in decisions:
                i = idx[di]
                if m[ia, i]:
                    continue
                if any(m[i, idx[dj]] and m[ia, idx[dj]] for dj in decisions):
                    m[i, ia] = True
        m = _closure(m)
        if np.array_equal(m, before):
            break
    refine = (split_variables(model, extended=True) | set(model.assigned)) & set(variables)
    extra = []
    for x in refine:
        for y in variables:
            if y in refine or x == y:
                continue
            i, j = idx[x], idx[y]
            if not m[i, j] and not m[j, i]:
                extra.append((i, j))
    for i, j in extra:
        m[i, j] = True
    if extra:
        m = _closure(m)
    return PartialOrder(variables, m, model.rank)


# -- split variables ---------------------------------------------------------

def split_variables(model, extended=False):
    """Variables mentioned by some label; with ``extended`` also every
    restrictive variable.  Already-instantiated variables are excluded."""
    out = set()
    for _, expr in model.labels():
        out |= L.dom(expr)
    if extended:
        out |= set(model.restrictive_variables)
    return {v for v in out if v in model and v not in model.assigned}


def initial_split_variable(model):
    splits = split_variables(model)
    if not splits:
        return None
    order = induce_partial_order(model)
    first = [s for s in splits if all(order.precedes(s, t) for t in splits if t != s)]
    if len(first) != 1:
        raise NoUniqueInitialSplit(splits, model.history)
    return first[0]


def split_candidates(model):
    """Variables that may be instantiated next: the initial split variable
    if nothing precedes it, otherwise the ready restrictive variables."""
    splits = split_variables(model)
    restrictive = [v for v in model.restrictive_variables
                   if v not in model.assigned and v not in splits]
    cands = sorted(splits | set(restrictive), key=model.rank.get)
    if not cands:
        return []
    order = induce_partial_order(model)
    ready = [c for c in cands if not any(order.precedes(o, c) for o in cands if o != c)]
    initial = [s for s in splits if all(order.precedes(s, t) for t in splits if t != s)]
    out = [s for s in initial if s in ready and len(initial) == 1]
    out += [r for r in ready if r in restrictive]
    if not out:
        raise NoUniqueInitialSplit(ready or cands, model.history)
    return out


def next_split(model):
    cands = split_candidates(model)
    return cands[0] if cands else None


def split_states(model, var):
    """Possible states of ``var`` at this point; decisions are narrowed by
    their restrictive functions."""
    if model.kind(var).is_decision:
        return model.legal_options(var, model.assigned)
    return model.states(var)


# -- reduction ---------------------------------------------------------------

def _resolution(expr, model):
    """True/False for a resolved label, None for an unresolved one."""
    return L.semantic_constant(expr, model.known_state_spaces)


def missing(model, var=None, state=None):
    """Nodes and arcs missing in ``model`` once ``var=state`` is substituted.

    Returns ``(nodes, arcs)`` computed in one myopic pass (no iteration).
    """
    if var is not None:
        model = _substitute(model, var, state)
    return _missing_pass(model)


def _missing_pass(model):
    order = induce_partial_order(model)
    gone = set()
    for n in model.nodes:
        if n.id in model.assigned:
            continue
        eff = effective_label(model, n.id)
        res = _resolution(eff, model)
        if res is False:
            gone.add(n.id)
        elif res is None and n.kind is not NodeKind.VALUE:
            dom = L.dom(eff)
            if all(s not in order.index or order.precedes(n.id, s) for s in dom):
                gone.add(n.id)
    gone |= ibar_descendants(model, gone)
    gone_arcs = set()
    for a in model.arcs:
        if a.src in gone or a.dst in gone:
            gone_arcs.add(a.key)
            continue
        if a.label == L.TRUE:
            continue
        res = _resolution(a.label, model)
        if res is False:
            gone_arcs.add(a.key)
        elif res is None and a.dst in order.index:
            if all(s not in order.index or order.precedes(a.dst, s) for s in L.dom(a.label)):
                gone_arcs.add(a.key)
    return gone, gone_arcs


def _substitute(model, var, state):
    sub = {var: state}
    nodes = tuple(n if var not in L.dom(n.label) else
                  type(n)(n.id, n.kind, n.states, L.restrict(n.label, sub)) for n in model.nodes)
    arcs = tuple(a if var not in L.dom(a.label) else
                 type(a)(a.src, a.dst, a.kind, L.restrict(a.label, sub)) for a in model.arcs)
    return model.replace(nodes=nodes, arcs=arcs, history=model.history + ((var, state),))


def _remove(model, gone, gone_arcs):
    nodes = tuple(n for n in model.nodes if n.id not in gone)
    arcs = tuple(a for a in model.arcs if a.key not in gone_arcs
                 and a.src not in gone and a.dst not in gone)
    keep = {n.id for n in nodes}
    restricting = {(a.src, a.dst) for a in arcs if a.kind is ArcKind.RESTRICTION}
    restrictives = tuple(r for r in model.restrictives if r.decision in keep
                         and all((v, r.decision) in restricting for v in r.domain))
    return model.replace(
        nodes=nodes, arcs=arcs, restrictives=restrictives,
        removed=model.removed + tuple(n for n in model.nodes if n.id in gone),
        probabilities={k: t for k, t in model.probabilities.items() if k in keep},
        utilities={k: t for k, t in model.utilities.items() if k in keep})


def assign(model, var, state):
    """Instantiate ``var`` and remove missing nodes and arcs to a fixpoint.

    No precondition on ``var``; ``reduce`` adds the initial-split checks.
    """
    current = _substitute(model, var, state)
    while True:
        gone, gone_arcs = _missing_pass(current)
        if not gone and not gone_arcs:
            return current
        current = _remove(current, gone, gone_arcs)


def reduce(model, var, state):
    """The model reduced by instantiating the next split variable ``var``."""
    cands = split_candidates(model)
    if var not in cands:
        raise NotInitialSplit(
            f"{var!r} is not the initial split variable here"
            + (f" (expected one of {', '.join(cands)})" if cands else " (no split variables remain)"))
    if state not in split_states(model, var):
        raise ImpossibleState(f"{var}={state} is not a possible state at this point")
    return assign(model, var, state)


def reduce_sequence(model, assignments):
    for var, state in assignments:
        model = reduce(model, var, state)
    return model


# -- split-configuration tree ------------------------------------------------

@dataclass
class SplitNode:
    model: object
    split: str | None
    children: dict = field(default_factory=dict)

    @property
    def configuration(self):
        return self.model.history

    @property
    def exhaustive(self):
        return self.split is None

    def walk(self):
        yield self
        for child in self.children.values():
            yield from child.walk()

    def leaves(self):
        return [n for n in self.walk() if n.exhaustive]


def enumerate_split_configurations(model):
    """Depth-first tree of split configurations rooted at ``model``."""
    split = next_split(model)
    node = SplitNode(model, split)
    if split is not None:
        for s in split_states(model, split):
            node.children[s] = enumerate_split_configurations(assign(model, split, s))
    return node


def configurations(model):
    """All split configurations as ``(tuple_of_pairs, exhaustive)``."""
    return [(n.configuration, n.exhaustive) for n in enumerate_split_configurations(model).walk()]


def own_variables(model, split, above, order=None):
    """Variables eliminated at a decomposition node: those preceding the
    node's split variable, plus the split variable itself (all remaining
    variables at a leaf)."""
    remaining = [v for v in model.variables if v not in model.assigned and v not in above]
    if split is None:
        return remaining
    order = order or induce_partial_order(model)
    return [v for v in remaining if v != split and order.precedes(v, split)] + [split]


def decomposition(model):
    """Yield ``(split_node, own_variables, above)`` for every node, parents
    before children."""
    root = enumerate_split_configurations(model)
    stack = [(root, frozenset())]
    while stack:
        node, above = stack.pop()
        own = own_variables(node.model, node.split, above)
        yield node, own, above
        below = above | set(own)
        for child in reversed(list(node.children.values())):
            stack.append((child, below))


def free_variables(model):
    """``(free, bound)`` for a reduced model: free variables succeed the
    last instantiated split variable and precede every remaining one."""
    remaining = [v for v in model.variables if v not in model.assigned]
    splits = split_variables(model)
    order = induce_partial_order(model)
    last = model.history[-1][0] if model.history else None
    free, bound = [], []
    for v in remaining:
        after = last is None or last not in order.index or order.precedes(last, v)
        before = all(order.precedes(v, s) for s in splits)
        (free if after and before else bound).append(v)
    return free, bound


# -- contexts ---------------------------------------------------------------

@dataclass(frozen=True)
class Context:
    decision: str
    split: tuple
    restrictive: tuple

    @property
    def assignment(self):
        return dict(self.split + self.restrictive)

    def __str__(self):
        text = ", ".join(f"{v}={s}" for v, s in self.split)
        if self.restrictive:
            text += " | " + ", ".join(f"{v}={s}" for v, s in self.restrictive)
        return "(" + text.strip() + ")"


def make_context(model, decision, history):
    restricting = set(model.restricting(decision)) if decision in model else set()
    split = tuple((v, s) for v, s in history if v not in restricting)
    restrictive = tuple((v, s) for v, s in history if v in restricting)
    return Context(decision, split, restrictive)


def contexts(model, decision):
    if not model.kind(decision).is_decision:
        raise NotADecision(decision)
    out = []
    for node, own, _ in decomposition(model):
        if decision in own and decision in node.model:
            out.append(make_context(node.model, decision, node.model.history))
    return out


# -- validity verdicts ----------------------------------------------------------

def _graph_cycle(model):
    succ = {n.id: [a.dst for a in model.out_arcs(n.id)] for n in model.nodes}
    color = {v: 0 for v in succ}
    path = []

    def visit(v):
        color[v] = 1
        path.append(v)
        for w in succ[v]:
            if color[w] == 1:
                return path[path.index(w):] + [w]
            if color[w] == 0:
                found = visit(w)
                if found:
                    return found
        color[v] = 2
        path.pop()
        return None

    for v in succ:
        if color[v] == 0:
            found = visit(v)
            if found:
                return found
    return None


def validate_cycles(model):
    """Diagnostics for cycles that survive some exhaustive split configuration."""
    try:
        root = enumerate_split_configurations(model)
    except NoUniqueInitialSplit as exc:
        return [Diagnostic("NoUniqueInitialSplit", str(exc))]
    diags = []
    for leaf in root.leaves():
        cycle = _graph_cycle(leaf.model)
        if cycle:
            where = ", ".join(f"{v}={s}" for v, s in leaf.configuration) or "root"
            diags.append(Diagnostic(
                "UnbrokenCycle",
                f"cycle {' -> '.join(cycle)} survives configuration ({where})",
                element=f"{cycle[0]} -> {cycle[1]}",
                related=tuple(f"{a} -> {b}" for a, b in zip(cycle[1:], cycle[2:]))))
    return diags


@dataclass
class Verdict:
    status: str  # WellDefined | PossiblyIllDefined | IllDefinedRestrictives
    witnesses: list = field(default_factory=list)

    @property
    def well_defined(self):
        return self.status == "WellDefined"

    def __str__(self):
        if not self.witnesses:
            return self.status
        return f"{self.status}: " + "; ".join(str(w) for w in self.witnesses)


@dataclass(frozen=True)
class Witness:
    decision: str
    other: str  # chance variable, or a second restrictive function's domain
    configuration: tuple

    def __str__(self):
        where = ", ".join(f"{v}={s}" for v, s in self.configuration) or "root"
        return f"{self.other} vs {self.decision} at ({where})"


def well_definedness(model):
    """Exact restrictive-function clash check plus a conservative
    significance check: any free chance variable not ordered against a
    free decision in the same subproblem is reported as a witness."""
    clashes, witnesses = [], []
    for node, own, _ in decomposition(model):
        m = node.model
        order = induce_partial_order(m)
        present = set(m.assigned)
        for d in own:
            if not m.kind(d).is_decision:
                continue
            active = [r for r in m.restrictives_for(d) if set(r.domain) <= present]
            if len(active) > 1:
                clashes.append(Witness(d, " / ".join(",".join(r.domain) for r in active),
                                       m.history))
            for a in own:
                if m.kind(a) is NodeKind.CHANCE and order.incompatible(a, d):
                    witnesses.append(Witness(d, a, m.history))
    if clashes:
        return Verdict("IllDefinedRestrictives", clashes)
    if witnesses:
        return Verdict("PossiblyIllDefined", witnesses)
    return Verdict("WellDefined")
