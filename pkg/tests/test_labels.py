import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymid import labels as L
from asymid.errors import IncompleteAssignment

STATES = {"X": ("x", "y"), "Y": ("a", "b", "c"), "Night Club?": ("y", "n")}


def atoms_st():
    return st.sampled_from([L.Atom(v, s) for v, ss in STATES.items() for s in ss])


exprs = st.recursive(
    st.one_of(atoms_st(), st.sampled_from([L.TRUE, L.FALSE])),
    lambda kids: st.one_of(
        kids.map(L.Not),
        st.tuples(kids, kids).map(lambda p: L.And(*p)),
        st.tuples(kids, kids).map(lambda p: L.Or(*p)),
        st.tuples(kids, kids).map(lambda p: L.Implies(*p)),
        st.tuples(kids, kids).map(lambda p: L.Iff(*p)),
    ),
    max_leaves=12,
)


def test_parse_precedence():
    e = L.parse_label("A=a | B=b & !C=c")
    assert e == L.Or(L.Atom("A", "a"), L.And(L.Atom("B", "b"), L.Not(L.Atom("C", "c"))))
    e = L.parse_label("A=a => B=b => C=c")
    assert e == L.Implies(L.Atom("A", "a"), L.Implies(L.Atom("B", "b"), L.Atom("C", "c")))


def test_quoted_identifiers():
    e = L.parse_label('"Night Club?"=y & X=x')
    assert L.dom(e) == {"Night Club?", "X"}
    assert L.to_text(e) == '"Night Club?"=y & X=x'


def test_restrict_folds_to_constant():
    e = L.parse_label("X=x & Y=a")
    assert L.restrict(e, {"X": "y"}) == L.FALSE
    assert L.restrict(e, {"X": "x"}) == L.Atom("Y", "a")
    assert L.restrict(e, {"X": "x", "Y": "a"}) == L.TRUE


def test_evaluate_needs_full_assignment():
    with pytest.raises(IncompleteAssignment):
        L.evaluate(L.parse_label("X=x | Y=a"), {"X": "y"})
    assert L.evaluate(L.parse_label("X=x | Y=a"), {"X": "y", "Y": "a"})


def test_semantic_constant():
    assert L.semantic_constant(L.parse_label("X=x | X=y"), STATES) is True
    assert L.semantic_constant(L.parse_label("X=x & X=y"), STATES) is False
    assert L.semantic_constant(L.parse_label("X=x | Y=a"), STATES) is None


def test_syntax_errors_have_spans():
    with pytest.raises(L.LabelSyntaxError) as exc:
        L.parse_label("(X=x & Y=a")
    assert exc.value.span is not None
    with pytest.raises(L.LabelSyntaxError):
        L.parse_label("X x")


@settings(max_examples=300, deadline=None)
@given(exprs)
def test_text_round_trip(e):
    assert L.parse_label(L.to_text(e)) == e


@settings(max_examples=300, deadline=None)
@given(exprs, st.fixed_dictionaries({v: st.sampled_from(s) for v, s in STATES.items()}))
def test_restrict_agrees_with_evaluate(e, full):
    assert L.restrict(e, full) == L.Const(L.evaluate(e, full))
    # partial substitution then completion gives the same truth value
    part = {"X": full["X"]}
    assert L.evaluate(L.restrict(e, part), full) == L.evaluate(e, full)
