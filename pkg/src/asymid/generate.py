"""Random well-defined asymmetric models for property and acceptance tests.

Variables are laid out on a time line.  Every decision observes everything
before it, labels only mention earlier variables, and candidates are kept
only if they validate, decompose cleanly and pass the well-definedness
check.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import labels as L
from . import structure as St
from .errors import AidError
from .model import (AidModel, Arc, ArcKind, Node, NodeKind, RestrictiveFunction,
                    probability_domain, validate)
from .potentials import Kind, PartialTable


def _states(name, k):
    return tuple(f"{name.lower()}{i}" for i in range(k))


def _candidate(rng, max_vars, max_states, max_splits, restrict_p):
    n = int(rng.integers(3, max_vars + 1))
    kinds = [NodeKind.DECISION if rng.random() < 0.4 else NodeKind.CHANCE for _ in range(n)]
    if NodeKind.DECISION not in kinds:
        kinds[int(rng.integers(0, n))] = NodeKind.DECISION
    names = [("D" if k is NodeKind.DECISION else "X") + str(i) for i, k in enumerate(kinds)]
    states = {v: _states(v, int(rng.integers(2, max_states + 1))) for v in names}
    pos = {v: i for i, v in enumerate(names)}
    last_decision = max(i for i, k in enumerate(kinds) if k is NodeKind.DECISION)

    arcs = {}
    for j, d in enumerate(names):
        if kinds[j] is NodeKind.DECISION:
            for x in names[:j]:
                arcs[(x, d)] = ArcKind.INFORMATIONAL
    for i, x in enumerate(names):
        if kinds[i] is NodeKind.CHANCE and i:
            for p in rng.choice(names[:i], size=min(i, int(rng.integers(0, 3))), replace=False):
                arcs[(str(p), x)] = ArcKind.DEPENDENCY

    n_values = int(rng.integers(1, 3))
    values = [f"U{k}" for k in range(n_values)]
    for u in values:
        for p in rng.choice(names, size=min(n, int(rng.integers(1, 3))), replace=False):
            arcs[(str(p), u)] = ArcKind.FUNCTIONAL
    # every variable must lead to some utility
    reach = set(values)
    changed = True
    while changed:
        changed = False
        for (a, b) in arcs:
            if b in reach and a not in reach:
                reach.add(a)
                changed = True
    for v in names:
        if v not in reach:
            arcs[(v, values[int(rng.integers(0, n_values))])] = ArcKind.FUNCTIONAL

    # labels mention earlier, observed variables
    observable = [v for i, v in enumerate(names)
                  if i < n - 1 and (kinds[i] is NodeKind.DECISION or i < last_decision)]
    node_labels, arc_labels = {}, {}
    if observable:
        k = int(rng.integers(1, max_splits + 1))
        splits = list(rng.choice(observable, size=min(k, len(observable)), replace=False))
        for s in map(str, splits):
            later = [v for v in names if pos[v] > pos[s]] + values
            for target in rng.choice(later, size=min(len(later), int(rng.integers(1, 3))), replace=False):
                target = str(target)
                atom = L.Atom(s, states[s][int(rng.integers(0, len(states[s])))])
                expr = L.Not(atom) if rng.random() < 0.3 else atom
                if target in values:
                    arcs[(s, target)] = ArcKind.FUNCTIONAL
                elif kinds[pos[target]] is NodeKind.CHANCE:
                    arcs[(s, target)] = ArcKind.DEPENDENCY
                if rng.random() < 0.25 and kinds[pos.get(target, 0)] is NodeKind.DECISION \
                        and target not in values:
                    sources = [a for (a, b), kk in arcs.items()
                               if b == target and a != s and kk is ArcKind.INFORMATIONAL]
                    if sources:
                        arc_labels[(str(rng.choice(sources)), target)] = expr
                        continue
                prior = node_labels.get(target, L.TRUE)
                node_labels[target] = L.conjoin([prior, expr]) if rng.random() < 0.5 else \
                    L.fold(L.Or(prior, expr)) if prior != L.TRUE else expr

    restrictives = []
    if rng.random() < restrict_p:
        options = [(a, b) for (a, b), kk in arcs.items()
                   if kk is ArcKind.INFORMATIONAL and pos[a] < pos[b]]
        if options:
            a, b = options[int(rng.integers(0, len(options)))]
            arcs[(a, b)] = ArcKind.RESTRICTION
            table = {}
            for combo in itertools.product(states[a]):
                size = int(rng.integers(1, len(states[b]) + 1))
                table[combo] = frozenset(str(x) for x in rng.choice(states[b], size=size, replace=False))
            restrictives.append(RestrictiveFunction(b, (a,), table))

    nodes = [Node(v, kinds[i], states[v], node_labels.get(v, L.TRUE)) for i, v in enumerate(names)]
    nodes += [Node(u, NodeKind.VALUE, (), node_labels.get(u, L.TRUE)) for u in values]
    arc_list = [Arc(a, b, kk, arc_labels.get((a, b), L.TRUE)) for (a, b), kk in arcs.items()]
    model = AidModel(tuple(nodes), tuple(arc_list), tuple(restrictives))
    return model


def realize(model, rng):
    """Same structure with fully defined random tables: Dirichlet(1) rows and
    utilities uniform on [0, 10]."""
    probabilities = {}
    for v in model.chance:
        parents = sorted(probability_domain(model, v) - {v}, key=model.rank.get)
        domain = (v, *parents)
        st = tuple(model.states(x) for x in domain)
        rows = rng.dirichlet(np.ones(len(st[0])), size=int(np.prod([len(s) for s in st[1:]])))
        probabilities[v] = PartialTable(domain, st, rows.T.reshape(tuple(len(s) for s in st)))
    utilities = {}
    for u in model.values:
        parents = tuple(model.parents(u))
        st = tuple(model.states(x) for x in parents)
        utilities[u] = PartialTable(parents, st, rng.uniform(0, 10, size=tuple(len(s) for s in st)),
                                    kind=Kind.UTILITY)
    return model.replace(probabilities=probabilities, utilities=utilities)


def acceptable(model):
    """True when ``model`` validates, decomposes and is well defined."""
    if any(d.is_error for d in validate(model)):
        return False
    if not St.split_variables(model):
        return False
    try:
        if St.validate_cycles(model):
            return False
        return St.well_definedness(model).well_defined
    except AidError:
        return False


def random_model(rng, max_vars=6, max_states=3, max_splits=3, restrict_p=0.3, attempts=1000):
    for _ in range(attempts):
        model = realize(_candidate(rng, max_vars, max_states, max_splits, restrict_p), rng)
        if acceptable(model):
            return model
    raise RuntimeError("no acceptable model generated")


def random_models(count, seed=0, **options):
    rng = np.random.default_rng(seed)
    return [random_model(rng, **options) for _ in range(count)]
