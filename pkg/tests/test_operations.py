from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paradox_lab.gpt import (
    GBIT,
    DomainError,
    SignallingError,
    StateVector,
    SystemSignature,
    Transformation,
    apply,
    apply_local,
    conditional_box,
    is_no_signalling,
    make_gbit,
    make_pr_box,
    marginal,
    pure_gbit,
    tensor,
    validate_operation,
)
from paradox_lab.gpt.polytope import enumerate_ns_vertices
from paradox_lab.gpt.wiring import Relabeling, compile_wiring
from strategies import probabilities

TWO = SystemSignature.gbits(2)


def signalling_box() -> StateVector:
    # Bob outputs Alice's setting: b = X
    return StateVector.from_function(TWO, lambda x, a: Fraction(1, 2) if a[1] == x[0] else Fraction(0))


def test_pr_marginals_are_uniform():
    pr = make_pr_box()
    assert marginal(pr, (0,)) == make_gbit(Fraction(1, 2), Fraction(1, 2))
    assert marginal(pr, (1,)) == make_gbit(Fraction(1, 2), Fraction(1, 2))


def test_marginal_refuses_signalling_state():
    with pytest.raises(SignallingError):
        marginal(signalling_box(), (1,))


def test_signalling_witness_names_the_sender():
    result = is_no_signalling(signalling_box())
    assert not result
    assert result.witness.subsystem == 0
    assert "signals" in result.witness.describe()


def test_marginal_reorders_to_requested_order():
    box = tensor(pure_gbit("01"), pure_gbit("10"))
    assert marginal(box, (1, 0)) == tensor(pure_gbit("10"), pure_gbit("01"))


def test_conditional_box_of_pr():
    prob, rest = conditional_box(make_pr_box(), 0, 1, 1)
    assert prob == Fraction(1, 2)
    # X=1, a=1: b = 1 xor Y
    assert rest == pure_gbit("10")


def test_conditioning_on_impossible_outcome_fails():
    with pytest.raises(DomainError):
        conditional_box(tensor(pure_gbit("00"), pure_gbit("00")), 0, 0, 1)


def test_identity_transformation_is_valid():
    ident = Transformation.identity(GBIT)
    assert validate_operation(ident, enumerate_ns_vertices(GBIT))


def test_signalling_map_fails_op3():
    # copies Alice's setting into Bob's outcome; well-formed as a matrix but not as a box-world map
    size = TWO.length
    m = np.zeros((size, size), dtype=object)
    out = signalling_box()
    for col in range(size):
        for row in range(size):
            m[row, col] = out.entries[row] if col % TWO.block_size == 0 else 0
    t = Transformation.single(TWO, TWO, m)
    result = validate_operation(t, enumerate_ns_vertices(TWO)[:1])
    assert not result
    assert result.condition in ("op1", "op3")


def test_apply_local_acts_on_the_right_subsystem():
    flip = compile_wiring(Relabeling((0, 1), ((1, 0), (1, 0))), GBIT)
    state = tensor(pure_gbit("00"), pure_gbit("00"))
    (branch,) = apply_local(flip, state, (1,))
    assert branch.state == tensor(pure_gbit("00"), pure_gbit("11"))


@settings(max_examples=40, deadline=None)
@given(probabilities, probabilities, probabilities, probabilities)
def test_product_states_never_signal(p1, q1, p2, q2):
    assert is_no_signalling(tensor(make_gbit(p1, q1), make_gbit(p2, q2)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 1), st.integers(0, 1))
def test_conditional_boxes_average_back_to_the_marginal(x, which):
    pr = make_pr_box()
    parts = [conditional_box(pr, which, x, a) for a in (0, 1)]
    mixed = [sum(p * s.entries[i] for p, s in parts) for i in range(parts[0][1].signature.length)]
    assert tuple(mixed) == marginal(pr, (1 - which,)).entries


def test_apply_returns_branches_with_probabilities():
    ident = Transformation.identity(GBIT)
    (branch,) = apply(ident, make_gbit(Fraction(1, 3), 1))
    assert branch.probability == 1
