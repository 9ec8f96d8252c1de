from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paradox_lab.gpt import (
    DomainError,
    SystemSignature,
    enumerate_ns_vertices,
    make_gbit,
    make_pr_box,
    pure_gbit,
    validate_operation,
)
from paradox_lab.memory import (
    CN,
    POLICIES,
    bipartite_preservation_check,
    bipartite_updated_state,
    build_memory_update,
    check_information_preserving,
    compress,
    compress_pairs,
    corrupt_update,
    detect_superglue,
    update_system,
)
from strategies import probabilities

TWO = SystemSignature.gbits(2)


def test_copy_update_final_state():
    p, q = Fraction(1, 3), Fraction(4, 5)
    final = update_system(make_gbit(p, q))
    # setting-major over (system, memory): matched settings copy the outcome
    assert final.pretty() == " | ".join([
        f"{p} 0 0 {1 - p}", f"{p} 0 0 {1 - p}", f"{q} 0 0 {1 - q}", f"{q} 0 0 {1 - q}",
    ])


def test_update_is_block_diagonal_with_cnot_blocks():
    update = build_memory_update()
    assert update.is_block_diagonal()
    for block in update.matched_blocks():
        assert np.array_equal(block, CN)


@pytest.mark.parametrize("policy", POLICIES)
@pytest.mark.parametrize("initial", ["00", "01", "10", "11"])
def test_every_policy_and_initial_memory_is_valid_and_compresses(policy, initial):
    update = build_memory_update(initial, policy)
    assert validate_operation(update.base, enumerate_ns_vertices(TWO))
    for label in ("00", "01", "10", "11"):
        assert compress(update_system(pure_gbit(label), update)).compressed == pure_gbit(label)


def test_literal_variant_agrees_on_memory_initialised_inputs():
    default = build_memory_update()
    literal = build_memory_update(literal=True)
    g = make_gbit(Fraction(2, 7), Fraction(5, 9))
    assert compress(update_system(g, literal)).compressed == compress(update_system(g, default)).compressed


def test_literal_variant_is_not_block_diagonal():
    assert not build_memory_update(literal=True).is_block_diagonal()


def test_unknown_policy_rejected():
    with pytest.raises(DomainError):
        build_memory_update(policy="teleport")


@settings(max_examples=60, deadline=None)
@given(probabilities, probabilities)
def test_compress_inverts_the_update(p, q):
    g = make_gbit(p, q)
    assert compress(update_system(g)).compressed == g


@settings(max_examples=40, deadline=None)
@given(probabilities, probabilities)
def test_superglued_exactly_when_p_differs_from_q(p, q):
    report = detect_superglue(update_system(make_gbit(p, q)), ((0,), (1,)))
    assert report.superglued == (p != q)


def test_superglue_witness_description():
    report = detect_superglue(update_system(make_gbit(1, 0)), ((0,), (1,)))
    assert "1 0 | 1 0" in report.witness.describe()


def test_information_preserving_for_all_policies():
    for policy in POLICIES:
        assert check_information_preserving(build_memory_update(policy=policy))


@pytest.mark.parametrize("block", [0, 1])
def test_corrupted_update_is_caught(block):
    result = check_information_preserving(corrupt_update(build_memory_update(), block))
    assert not result and result.relabeling and result.detail


def test_bipartite_update_order_does_not_matter_for_pr():
    a = bipartite_updated_state(make_pr_box(), order="bob-first")
    b = bipartite_updated_state(make_pr_box(), order="alice-first")
    assert a == b
    assert compress_pairs(a, [(0, 2), (1, 3)]) == make_pr_box()


def test_bipartite_check_on_pr_box():
    assert bipartite_preservation_check(make_pr_box())


@settings(max_examples=15, deadline=None)
@given(st.randoms(use_true_random=False))
def test_bipartite_check_on_random_polytope_points(rng):
    from paradox_lab.gpt import random_polytope_point

    point = random_polytope_point(enumerate_ns_vertices(TWO), rng)
    assert bipartite_preservation_check(point)
