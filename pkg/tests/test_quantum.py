from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from paradox_lab import quantum as q


def test_hardy_state_is_normalised():
    assert q.hardy_state().is_normalised()


def test_fr_final_state_support():
    assert set(q.fr_final_state().terms()) == {"0000", "1010", "1111"}


def test_ok_and_fail_are_orthogonal_outcomes():
    outcomes = q.okfail_measure(q.fr_final_state(), (2, 0))
    total = sum(o.probability for o in outcomes.values())
    assert q.is_zero(total - 1)


def test_joint_ok_ok_probability():
    assert q.is_zero(q.fr_pair_table("u", "w")[("ok", "ok")] - sympy.Rational(1, 12))


@pytest.mark.parametrize(
    "first,second,key",
    [("b", "u", (0, "ok")), ("a", "b", (0, 1)), ("a", "w", (1, "ok"))],
)
def test_support_zeros_behind_the_chain(first, second, key):
    table = q.fr_pair_table(first, second)
    assert q.support_table(table)[key] is False
    assert q.is_zero(sum(table.values()) - 1)


def test_table_to_box_is_a_normalised_single_setting_box():
    box = q.table_to_box(q.fr_pair_table("a", "b"), ((0, 1), (0, 1)))
    assert box.pretty() == "1/3 0 1/3 1/3"


def test_cnot_memory_requires_cleared_memory():
    ket = q.Ket.basis("01")
    with pytest.raises(q.QuantumError):
        q.cnot_memory(ket, 0, 1)


def test_too_many_qubits_refused():
    with pytest.raises(q.QuantumError):
        q.Ket.basis("0" * (q.MAX_QUBITS + 1))


def test_plus_state_fiducials():
    plus = q.apply_gate(q.Ket.basis("0"), q.HADAMARD, (0,))
    fid = q.qubit_to_fiducial(plus)
    assert fid.to_state_vector().pretty() == "1 0 | 1/2 1/2 | 1/2 1/2"


def test_z_and_x_records_are_distinguishable():
    demo = q.zx_postmeasurement_demo("1/r2", "1/r2")
    assert demo.distinguishable


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["a", "b", "u", "w"]), st.sampled_from(["a", "b", "u", "w"]))
def test_pair_tables_are_normalised(first, second):
    if {first, second} in ({"a", "u"}, {"b", "w"}) or first == second:
        return
    table = q.fr_pair_table(first, second)
    assert q.is_zero(sum(table.values()) - 1)
    assert all(q.to_fraction(v) >= 0 for v in table.values())


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 12))
def test_gates_preserve_the_norm(k):
    theta = sympy.pi * k / 6
    ket = q.Ket(1, (sympy.cos(theta), sympy.sin(theta)))
    assert q.apply_gate(ket, q.HADAMARD, (0,)).is_normalised()
