import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymid.errors import KindMismatch, VariableNotInDomain
from asymid.potentials import (BOTTOM, Kind, PartialTable, add, divide, equal, extend_with,
                               instantiate, max_out, multiply, sum_out)

U = Kind.UTILITY


def t(domain, states, cells, kind=Kind.PROBABILITY):
    return PartialTable.from_cells(domain, states, cells, kind)


def test_bottom_is_additive_identity_and_multiplicative_zero():
    a = t(("X",), (("x", "y"),), [BOTTOM, 2.0], U)
    b = t(("X",), (("x", "y"),), [3.0, BOTTOM], U)
    assert add(a, b).cells() == [3.0, 2.0]
    assert multiply(a, b).cells() == [BOTTOM, BOTTOM]
    assert add(a, a).cells() == [BOTTOM, 4.0]


def test_bottom_differs_from_zero():
    a = t(("X",), (("x", "y"),), [0.0, BOTTOM])
    assert a.get({"X": "x"}) == 0.0
    assert a.get({"X": "y"}) is BOTTOM
    assert not equal(a, t(("X",), (("x", "y"),), [0.0, 0.0]))


def test_add_refuses_probabilities():
    with pytest.raises(KindMismatch):
        add(t((), (), [1.0]), t((), (), [1.0]))


def test_broadcast_over_union_domain():
    a = t(("X",), (("x", "y"),), [1.0, 2.0])
    b = t(("Y",), (("a", "b"),), [10.0, 20.0])
    p = multiply(a, b)
    assert p.domain == ("X", "Y")
    assert p.cells() == [10.0, 20.0, 20.0, 40.0]


def test_divide_zero_by_zero_is_zero():
    a = t(("X",), (("x", "y"),), [0.0, 3.0])
    b = t(("X",), (("x", "y"),), [0.0, 1.5])
    assert divide(a, b).cells() == [0.0, 2.0]


def test_sum_out_keeps_all_undefined_fibres_undefined():
    a = t(("X", "Y"), (("x", "y"), ("a", "b")), [0.25, BOTTOM, BOTTOM, BOTTOM])
    s = sum_out(a, "Y")
    assert s.cells() == [0.25, BOTTOM]
    with pytest.raises(VariableNotInDomain):
        sum_out(a, "Z")


def test_max_out_ties_go_to_first_legal_option():
    a = t(("D",), (("a", "b", "c"),), [5.0, 7.0, 7.0], U)
    best, arg = max_out(a, "D")
    assert best.item() == 7.0
    assert arg.choice({}) == "b"
    best, arg = max_out(a, "D", legal=[True, False, True])
    assert arg.choice({}) == "c"
    best, arg = max_out(a, "D", legal=[True, False, False])
    assert best.item() == 5.0


def test_max_out_undefined_row():
    a = t(("D", "X"), (("a", "b"), ("x", "y")), [1.0, BOTTOM, 2.0, BOTTOM], U)
    best, arg = max_out(a, "D")
    assert best.cells() == [2.0, BOTTOM]
    assert arg.choice({"X": "y"}) is None


def test_instantiate_and_extend_with_are_inverse():
    full = t(("S", "X"), (("s1", "s2"), ("x", "y")), [1.0, 2.0, 3.0, BOTTOM], U)
    parts = {s: instantiate(full, {"S": s}) for s in ("s1", "s2")}
    assert parts["s2"].cells() == [3.0, BOTTOM]
    back = extend_with(parts, "S", ("s1", "s2"), U)
    assert equal(back, full)
    partial = extend_with({"s1": parts["s1"]}, "S", ("s1", "s2"), U)
    assert partial.get({"S": "s2", "X": "x"}) is BOTTOM


# -- laws over random partial tables -------------------------------------------

CELL = st.one_of(st.just(BOTTOM), st.floats(0.0, 100.0, allow_nan=False))


def tables(kind):
    return st.lists(CELL, min_size=6, max_size=6).map(
        lambda cells: t(("X", "Y"), (("x0", "x1"), ("y0", "y1", "y2")), cells, kind))


@settings(max_examples=200, deadline=None)
@given(tables(U), tables(U), tables(U))
def test_addition_laws(a, b, c):
    assert equal(add(a, b), add(b, a))
    assert equal(add(add(a, b), c), add(a, add(b, c)), tol=1e-9)


@settings(max_examples=200, deadline=None)
@given(tables(Kind.PROBABILITY), tables(Kind.PROBABILITY), tables(Kind.PROBABILITY))
def test_multiplication_laws(a, b, c):
    assert equal(multiply(a, b), multiply(b, a))
    assert equal(multiply(multiply(a, b), c), multiply(a, multiply(b, c)), tol=1e-6)


def test_products_of_defined_conditionals_sum_to_one():
    rng = np.random.default_rng(3)
    for _ in range(50):
        px = PartialTable(("X",), (("a", "b", "c"),), rng.dirichlet(np.ones(3)))
        py = PartialTable(("Y", "X"), (("p", "q"), ("a", "b", "c")), rng.dirichlet(np.ones(2), 3).T)
        joint = multiply(px, py)
        assert abs(sum_out(sum_out(joint, "X"), "Y").item() - 1.0) < 1e-12
