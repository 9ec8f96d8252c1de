from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paradox_lab.gpt import (
    GBIT,
    BipartiteMeasurement,
    BipartiteTransformation,
    Mixture,
    Relabeling,
    SystemSignature,
    WiringError,
    apply,
    apply_deterministic,
    compile_wiring,
    gbit_relabelings,
    make_gbit,
    make_pr_box,
    simulate_wiring,
    tensor,
)
from paradox_lab.gpt.polytope import enumerate_ns_vertices, random_polytope_point
from strategies import probabilities

TWO = SystemSignature.gbits(2)


def test_eight_distinct_relabelings():
    rels = gbit_relabelings()
    assert len(rels) == 8
    outputs = {apply_deterministic(compile_wiring(r, GBIT), make_gbit(Fraction(1, 3), Fraction(1, 5))) for r in rels}
    assert len(outputs) == 8


@given(probabilities, probabilities, st.sampled_from(gbit_relabelings()))
def test_relabeling_matrix_matches_simulation(p, q, rel):
    g = make_gbit(p, q)
    assert apply_deterministic(compile_wiring(rel, GBIT), g) == simulate_wiring(rel, g)


def test_pr_box_measurement_with_constant_second_setting():
    # read Alice at 1, Bob at 1, report a xor b: always 1 for the PR box
    m = BipartiteMeasurement(1, lambda a: 1, lambda a, b: a ^ b)
    dist = simulate_wiring(m, make_pr_box())
    assert dist == {0: Fraction(0), 1: Fraction(1)}
    branches = apply(compile_wiring(m, TWO), make_pr_box())
    probs = {b.label: b.probability for b in branches}
    assert probs == {0: 0, 1: 1}


def test_adaptive_measurement_reports_first_outcome():
    # second setting chosen by the first outcome; output is that outcome
    m = BipartiteMeasurement(0, lambda a: a, lambda a, b: a)
    state = tensor(make_gbit(Fraction(1, 4), 0), make_gbit(1, 1))
    assert simulate_wiring(m, state) == {0: Fraction(1, 4), 1: Fraction(3, 4)}


def test_constant_setting_wiring_on_every_vertex():
    # adaptive second setting with a parity output: compiled matrix agrees with the circuit
    m = BipartiteMeasurement(0, lambda a: a, lambda a, b: a ^ b)
    t = compile_wiring(m, TWO)
    for v in enumerate_ns_vertices(TWO):
        got = {b.label: b.probability for b in apply(t, v)}
        assert got == simulate_wiring(m, v)


@settings(max_examples=25, deadline=None)
@given(st.randoms(use_true_random=False))
def test_transformation_matches_simulation_on_polytope_points(rng):
    w = BipartiteTransformation(
        lambda X, Y: X, lambda X, Y, a1: Y ^ a1, lambda X, Y, a1, a2: (a1, a2 ^ a1)
    )
    state = random_polytope_point(enumerate_ns_vertices(TWO), rng)
    t = compile_wiring(w, TWO, superglued=True)
    assert apply_deterministic(t, state) == simulate_wiring(w, state)


def test_mixture_weights_must_sum_to_one():
    with pytest.raises(WiringError):
        Mixture(((Fraction(1, 2), gbit_relabelings()[0]),))


def test_mixture_of_relabelings():
    rels = gbit_relabelings()
    mix = Mixture(((Fraction(1, 2), rels[0]), (Fraction(1, 2), rels[3])))
    g = make_gbit(1, 0)
    assert apply_deterministic(compile_wiring(mix, GBIT), g) == simulate_wiring(mix, g)
