import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paradox_lab import harness
from paradox_lab.gpt import make_pr_box
from paradox_lab.logic import (
    AgentId,
    Atom,
    BoundExhausted,
    Implies,
    IntrospectionRefused,
    KnowledgeBase,
    Knows,
    Not,
    Or,
    TrustRelation,
    derive_closure,
    find_contradiction,
    implications_from_support,
    measurement_facts,
    replay,
    replay_certificate,
    replay_kb,
    rule_common_knowledge,
    rule_distribution,
    rule_introspection,
    rule_trust,
    split_prefix,
    wrap,
)

A, B, U, W = AgentId("A", 1), AgentId("B", 2), AgentId("U", 3), AgentId("W", 4)
AGENTS = [A, B, U, W]
x0, x1, y1 = Atom("x", "0"), Atom("x", "1"), Atom("y", "1")


def closed(exp, **kwargs):
    setup = harness.build_setup(exp, **kwargs)
    derive_closure(setup.kb)
    return setup.kb


def test_pretty_forms():
    f = Knows(W, Knows(U, Implies(Atom("a~", "1"), Atom("b", "1"))))
    assert f.pretty() == "K_W K_U (a~=1 => b=1)"
    assert split_prefix(f) == ((W, U), Implies(Atom("a~", "1"), Atom("b", "1")))
    assert wrap((W, U), Implies(Atom("a~", "1"), Atom("b", "1"))) == f


def test_trust_chain_direction():
    trust = TrustRelation.chain([A, B, U, W], cyclic=True)
    assert trust.trusts(B, A) and trust.trusts(A, W)
    assert not trust.trusts(A, B)
    assert TrustRelation.label(B, A) == "A~>B"


def test_common_knowledge_respects_holders_and_bound():
    kb = KnowledgeBase(AGENTS, depth_bound=2)
    kb.add_theory(Implies(x0, y1), holders=[A], source="box")
    assert rule_common_knowledge(kb, (W, A), Implies(x0, y1)) == Knows(W, Knows(A, Implies(x0, y1)))
    assert rule_common_knowledge(kb, (A, W), Implies(x0, y1)) is None
    with pytest.raises(BoundExhausted):
        rule_common_knowledge(kb, (W, U, A), Implies(x0, y1))


def test_distribution_and_trust_rules():
    kb = KnowledgeBase(AGENTS, TrustRelation(frozenset({(B, A)})))
    kb.assert_fact(Knows(B, x0))
    kb.assert_fact(Knows(B, Implies(x0, y1)))
    assert rule_distribution(kb, B, x0, Implies(x0, y1)) == Knows(B, y1)
    kb.assert_fact(Knows(B, Knows(A, x1)))
    assert rule_trust(kb, B, A, Knows(B, Knows(A, x1))) == Knows(B, x1)
    assert rule_trust(kb, A, B, Knows(B, Knows(A, x1))) is None
    assert replay_kb(kb)


def test_introspection_modes():
    kb = KnowledgeBase(AGENTS)
    kb.assert_fact(Knows(A, x0))
    assert rule_introspection(kb, A, x0) == Knows(A, Knows(A, x0))
    with pytest.raises(IntrospectionRefused):
        rule_introspection(kb, A, y1, mode="negative")
    kb.closed_world = True
    assert rule_introspection(kb, A, y1, mode="negative") == Knows(A, Not(Knows(A, y1)))
    assert replay_kb(kb)


def test_atoms_contradiction_is_found():
    kb = KnowledgeBase(AGENTS)
    kb.assert_fact(Knows(A, x0))
    kb.assert_fact(Knows(A, Implies(x0, x1)))
    derive_closure(kb)
    (cert,) = find_contradiction(kb)
    assert cert.kind == "atoms" and cert.agent == A
    assert replay_certificate(cert, kb)


def test_measurement_facts_shape():
    facts = measurement_facts(A, W, "a", ("0", "1"))
    assert facts[0] == Knows(W, Or((Knows(A, Atom("a", "0")), Knows(A, Atom("a", "1")))))
    assert len(facts) == 3


def test_pr_implications_are_symmetric():
    pr = make_pr_box()
    forward = implications_from_support(pr, (0, 1, 0), (1, 1), names=("a~", "b~"))
    assert Implies(Atom("a~", "0"), Atom("b~", "1")) in forward
    back = implications_from_support(pr, (1, 1, 1), (0, 1), names=("b~", "a~"))
    assert Implies(Atom("b~", "1"), Atom("a~", "0")) in back


def test_uniform_correlations_give_no_implication():
    from paradox_lab.gpt import SystemSignature, uniform_state

    assert implications_from_support(uniform_state(SystemSignature.gbits(2)), (0, 0, 0), (1, 0)) == []


def test_pr_chain_implications_hold_both_ways(pr_experiment):
    exp, _ = pr_experiment
    kb = closed(exp)
    for lhs, rhs in [(("a~", "0"), ("b", "0")), (("b", "1"), ("a", "1")), (("a", "1"), ("b~", "1"))]:
        fwd = Knows(W, Implies(Atom(*lhs), Atom(*rhs)))
        rev = Knows(W, Implies(Atom(*rhs), Atom(*lhs)))
        assert fwd in kb.facts and rev in kb.facts


def test_depth_three_is_not_enough(pr_experiment):
    exp, _ = pr_experiment
    setup = harness.build_setup(exp, depth=3)
    goal = Knows(W, Implies(Atom("b~", "0"), Atom("b~", "1")))
    with pytest.raises(BoundExhausted):
        derive_closure(setup.kb, goal=goal)


def test_removing_a_to_b_halts_wigner_at_step_four(pr_experiment):
    exp, _ = pr_experiment
    base = harness.build_setup(exp).kb.trust
    kb = closed(exp, trust_override=base.without(B, A))
    step4 = Knows(W, Knows(U, Knows(B, Knows(A, Implies(Atom("a", "1"), Atom("b~", "1"))))))
    collapsed = Knows(W, Knows(U, Knows(B, Implies(Atom("a", "1"), Atom("b~", "1")))))
    assert step4 in kb.facts and collapsed not in kb.facts
    assert "W" not in {c.agent.name for c in find_contradiction(kb)}


def test_removing_w_to_a_removes_the_certificates_that_use_it(pr_experiment):
    exp, _ = pr_experiment
    base = harness.build_setup(exp).kb.trust
    kb = closed(exp, trust_override=base.without(A, W))
    assert {c.agent.name for c in find_contradiction(kb)} == {"U", "W"}


def test_no_trust_no_paradox(pr_experiment):
    exp, _ = pr_experiment
    assert find_contradiction(closed(exp, trust_override=TrustRelation())) == []


def test_tampered_log_fails_replay(pr_experiment):
    exp, _ = pr_experiment
    kb = closed(exp)
    cert = next(c for c in find_contradiction(kb) if c.agent == W)
    entries = list(cert.derivation)
    k = next(i for i, e in enumerate(entries) if e.rule == "trust")
    entries[k] = dataclasses.replace(entries[k], edge=(W, A))
    result = replay(entries, kb.theory, kb.trust, kb.depth_bound, dict(kb.given))
    assert not result and result.failed_entry == entries[k].index


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_replay_rejects_any_dropped_premise(pr_experiment, seed):
    exp, _ = pr_experiment
    kb = closed(exp)
    cert = next(c for c in find_contradiction(kb) if c.agent == W)
    derived = [i for i, e in enumerate(cert.derivation) if e.premises]
    victim = derived[seed % len(derived)]
    premise = cert.derivation[victim].premises[0]
    entries = [e for e in cert.derivation if e.index != premise]
    assert not replay(entries, kb.theory, kb.trust, kb.depth_bound, dict(kb.given))
