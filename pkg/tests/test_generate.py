import numpy as np

from asymid import generate
from asymid import structure as St
from asymid.modelio import parse, serialize
from asymid.model import structurally_equal


def test_generated_models_respect_bounds():
    for m in generate.random_models(60, seed=21):
        assert len(m.variables) <= 6
        assert all(len(m.states(v)) <= 3 for v in m.variables)
        assert 1 <= len(St.split_variables(m)) <= 3
        assert generate.acceptable(m)
        for t in m.probabilities.values():
            assert t.defined.all()


def test_generation_is_deterministic():
    a = generate.random_models(5, seed=4)
    b = generate.random_models(5, seed=4)
    assert all(structurally_equal(x, y) for x, y in zip(a, b))


def test_generated_models_round_trip():
    for m in generate.random_models(20, seed=8):
        assert structurally_equal(parse(serialize(m)), m)


def test_realize_keeps_structure():
    m = generate.random_models(1, seed=2)[0]
    r = generate.realize(m, np.random.default_rng(9))
    assert r.nodes == m.nodes and r.arcs == m.arcs
    assert not structurally_equal(r, m)
