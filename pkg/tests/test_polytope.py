import random
from fractions import Fraction

import pytest

from paradox_lab.gpt import (
    CHSH_LOCAL_BOUND,
    GBIT,
    SystemSignature,
    chsh_value,
    enumerate_ns_vertices,
    in_convex_hull,
    is_no_signalling,
    make_pr_box,
    max_chsh,
    random_polytope_point,
    uniform_state,
    violates_chsh,
)
from paradox_lab.gpt.polytope import local_deterministic_vertices, pr_vertices

TWO = SystemSignature.gbits(2)


def test_pr_box_reaches_algebraic_maximum():
    assert chsh_value(make_pr_box()) == 4
    assert max_chsh(make_pr_box()) == 4


def test_local_vertices_respect_the_bound():
    assert len(local_deterministic_vertices()) == 16
    assert all(max_chsh(v) <= CHSH_LOCAL_BOUND for v in local_deterministic_vertices())


def test_vertex_split_is_sixteen_local_plus_eight_pr():
    verts = set(enumerate_ns_vertices(TWO))
    assert verts == set(local_deterministic_vertices()) | set(pr_vertices())


def test_vertices_are_exact_fractions():
    for v in enumerate_ns_vertices(TWO):
        assert all(isinstance(e, Fraction) for e in v.entries)


def test_random_points_lie_in_the_hull_and_do_not_signal():
    rng = random.Random(7)
    verts = enumerate_ns_vertices(TWO)
    for _ in range(5):
        point = random_polytope_point(verts, rng)
        assert is_no_signalling(point)
        assert in_convex_hull(point, verts)


def test_local_hull_excludes_pr_box():
    assert not in_convex_hull(make_pr_box(), local_deterministic_vertices())
    assert in_convex_hull(uniform_state(TWO), local_deterministic_vertices())


def test_uniform_state_does_not_violate_chsh():
    assert not violates_chsh(uniform_state(TWO))


def test_large_signatures_are_refused():
    with pytest.raises(NotImplementedError):
        enumerate_ns_vertices(SystemSignature.gbits(3))


def test_single_gbit_vertices():
    assert len(enumerate_ns_vertices(GBIT)) == 4
