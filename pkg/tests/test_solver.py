import pytest

from asymid import oracle as O
from asymid import structure as St
from asymid.errors import IllDefined, InadmissibleOrder
from asymid.potentials import BOTTOM, Kind, PartialTable
from asymid.solver import absorb, eliminate, eliminate_in_order, solve

from conftest import corpus

U = Kind.UTILITY

# expected values worked out by hand from the fixture tables
HAND_MEU = {
    "minimal.aid": 3.0,
    "two_variable.aid": 2.0,
    "cycle.aid": 0.4 * 4 + 0.6 * 5,
    "order_a.aid": 0.3 * (0.9 * 10 + 0.1 * 6),
    "order_b.aid": 0.2 * 3 + 0.8 * 4 + 0.5 * 2,
    "conditioning.aid": 0.35 * (0.6 * 8 + 0.4 * 5 + 3) + 0.65 * (0.6 * 8),
    "conditioning_symmetric.aid": 0.6 * 8 + 0.4 * 5 + 3,
    "restriction.aid": 0.3 * 10 + 0.7 * 2 + 7,
    "oil_test.aid": 0.55 * (20 * 0.45 / 0.55) + 0.45 * 8,
}


@pytest.mark.parametrize("name", sorted(HAND_MEU))
def test_meu_matches_hand_value(name):
    assert solve(corpus(name)).meu == pytest.approx(HAND_MEU[name], abs=1e-9)


def test_strategies_oil():
    r = solve(corpus("oil_test.aid"))
    assert r.strategy_for("Test?", {}).choose({}) == "y"
    drill = r.strategy_for("Drill", {"Test?": "y"})
    assert drill.choose({"Result": "pos"}) == "y"
    assert drill.choose({"Result": "neg"}) == "n"
    assert r.strategy_for("Drill", {"Test?": "n"}).choose({}) == "y"


def test_strategies_follow_cycle_direction():
    r = solve(corpus("cycle.aid"))
    first = r.strategy_for("D2", {"X": "x"})
    assert first.choose({}) == "a"
    assert r.strategy_for("D1", {"X": "x"}).choose({"D2": "a"}) == "a"
    assert r.strategy_for("D1", {"X": "y"}).choose({}) == "b"
    assert r.strategy_for("D2", {"X": "y"}).choose({"D1": "b"}) == "a"


def test_restricted_decision_only_picks_legal_options():
    r = solve(corpus("restriction.aid"))
    assert r.strategy_for("To do?", {}).choose({}) == "restaurant"
    for f in r.strategies:
        if f.decision == "Movie":
            legal = {"movie": {"comedy", "thriller"}, "restaurant": {"no-decision"}}[
                dict(f.context.restrictive)["To do?"]]
            assert {c for _, c in f.rows()} <= legal


def test_dating_contexts_and_oracle(dating):
    r = solve(dating)
    roll, _ = O.solve(dating)
    assert r.meu == pytest.approx(roll.meu, abs=1e-9)
    assert O.compare(r, roll) == []
    club = {str(f.context) for f in r.strategies if f.decision == "Club?"}
    assert club == {"(Date?=y, Accept?=n)", "(Date?=n)"}
    # Club? observes Watch TV in every context
    assert all(f.domain == ("Watch TV",) for f in r.strategies if f.decision == "Club?")


def test_ill_defined_needs_force():
    m = corpus("significant.aid")
    with pytest.raises(IllDefined):
        solve(m)
    r = solve(m, force=True)
    assert r.warnings and "PossiblyIllDefined" in r.warnings[0]


def test_restrictive_clash_is_refused_even_with_force():
    from asymid.modelio import parse
    import asymid
    m = parse(asymid.corpus_path("invalid/restrict_clash.aid").read_text())
    with pytest.raises(IllDefined):
        solve(m, force=True)


# -- elimination and absorption ----------------------------------------------------

def test_eliminate_chance_keeps_utility_conditional():
    phi = PartialTable(("A",), (("h", "t"),), [0.25, 0.75])
    psi = PartialTable(("A",), (("h", "t"),), [4.0, 8.0], kind=U)
    phis, psis, arg = eliminate("A", [phi], [psi])
    assert arg is None
    assert phis[0].item() == pytest.approx(1.0)
    assert psis[0].item() == pytest.approx(7.0)


def test_eliminate_decision_records_argmax():
    psi = PartialTable(("A", "D"), (("h", "t"), ("h", "t")), [2, 0, 0, 2], kind=U)
    phis, psis, arg = eliminate("D", [], [psi], decision=True)
    assert psis[0].cells() == [2.0, 2.0]
    assert arg.choice({"A": "h"}) == "h" and arg.choice({"A": "t"}) == "t"


def test_inadmissible_order_is_rejected():
    o = St.induce_partial_order(corpus("two_variable.aid"))
    with pytest.raises(InadmissibleOrder):
        eliminate_in_order([], [], ["A", "D"], {"D": True}, order=o)
    eliminate_in_order([], [], ["D", "A"], {"D": True}, order=o)


def test_custom_order_must_be_admissible():
    with pytest.raises(InadmissibleOrder):
        solve(corpus("two_variable.aid"), prefer=lambda m, o, own: list(reversed(own)))


def test_absorb_separates_shared_and_branch_tables():
    shared = PartialTable(("X",), (("x", "y"),), [0.5, 0.5])
    u1 = PartialTable.scalar(3.0, U)
    u2 = PartialTable.scalar(5.0, U)
    phis, psis, branch = absorb({"s1": ([shared], [u1]), "s2": ([shared], [u2])}, "S", ("s1", "s2"))
    assert phis == [shared]
    assert psis[0].domain == ("S",) and psis[0].cells() == [3.0, 5.0]
    assert branch["s1"].item() == 3.0
    phis, psis, branch = absorb({"s1": ([], [u1]), "s2": ([], [PartialTable.scalar(3.0, U)])},
                                "S", ("s1", "s2"))
    assert branch == {} and psis[0].domain == ()


def test_absorb_marks_missing_branch_undefined():
    u = PartialTable.scalar(1.0, U)
    _, psis, _ = absorb({"a": ([], [u])}, "D", ("a", "b"))
    assert psis[0] is u
    assert psis[-1].domain == ("D",) and psis[-1].cells() == [0.0, BOTTOM]
