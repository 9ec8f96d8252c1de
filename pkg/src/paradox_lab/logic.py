"""Knowledge formulas and a forward-chaining engine with trust.

Facts are formulas ``K_i1 ... K_in body``.  The engine instantiates shared
theory statements under knowledge prefixes, applies modus ponens and
implication chaining inside an agent's knowledge, collapses trusted nesting
from the inside out, and records every step so derivations can be replayed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .gpt.operations import conditional_box, marginal
from .gpt.states import DomainError, StateVector


# -- formulas -------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class AgentId:
    name: str
    time: int = 0

    def __str__(self) -> str:
        return self.name

    def full(self) -> str:
        return f"{self.name}@{self.time}"


class Formula:
    __slots__ = ()

    def pretty(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.pretty()


@dataclass(frozen=True)
class Atom(Formula):
    var: str
    value: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", str(self.value))

    def pretty(self) -> str:
        return f"{self.var}={self.value}"


@dataclass(frozen=True)
class Not(Formula):
    body: Formula

    def pretty(self) -> str:
        return f"not {_wrap(self.body)}"


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]

    def pretty(self) -> str:
        return " & ".join(_wrap(p) for p in self.parts)


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]

    def pretty(self) -> str:
        return " | ".join(_wrap(p) for p in self.parts)


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula

    def pretty(self) -> str:
        return f"{self.lhs.pretty()} => {self.rhs.pretty()}"


@dataclass(frozen=True)
class Knows(Formula):
    agent: AgentId
    body: Formula

    def pretty(self) -> str:
        prefix, body = split_prefix(self)
        return " ".join(f"K_{a}" for a in prefix) + f" ({body.pretty()})"


def _wrap(f: Formula) -> str:
    return f.pretty() if isinstance(f, (Atom, Knows)) else f"({f.pretty()})"


def split_prefix(f: Formula) -> tuple[tuple[AgentId, ...], Formula]:
    prefix = []
    while isinstance(f, Knows):
        prefix.append(f.agent)
        f = f.body
    return tuple(prefix), f


def wrap(prefix: Sequence[AgentId], body: Formula) -> Formula:
    for agent in reversed(prefix):
        body = Knows(agent, body)
    return body


def knows_all(prefix: Sequence[AgentId], body: Formula) -> Formula:
    return wrap(prefix, body)


# -- trust --------------------------------------------------------------------------

@dataclass(frozen=True)
class TrustRelation:
    """Directed edges ``(truster, trusted)``: ``K_truster K_trusted phi`` licenses ``K_truster phi``."""

    edges: frozenset[tuple[AgentId, AgentId]] = frozenset()

    @classmethod
    def chain(cls, agents: Sequence[AgentId], cyclic: bool = False) -> "TrustRelation":
        """``agents[0] ~> agents[1] ~> ...``: each agent trusts the one before it."""
        pairs = list(zip(agents, agents[1:]))
        if cyclic:
            pairs.append((agents[-1], agents[0]))
        return cls(frozenset((later, earlier) for earlier, later in pairs))

    def trusts(self, truster: AgentId, trusted: AgentId) -> bool:
        return (truster, trusted) in self.edges

    def without(self, truster: AgentId, trusted: AgentId) -> "TrustRelation":
        return TrustRelation(self.edges - {(truster, trusted)})

    @staticmethod
    def label(truster: AgentId, trusted: AgentId) -> str:
        return f"{trusted}~>{truster}"


# -- knowledge base -------------------------------------------------------------------

class BoundExhausted(RuntimeError):
    """The goal needs deeper knowledge nesting than the configured bound allows."""


class IntrospectionRefused(RuntimeError):
    pass


@dataclass(frozen=True)
class TheoryStatement:
    formula: Formula
    holders: frozenset[AgentId] | None = None
    source: str = ""


@dataclass(frozen=True)
class LogEntry:
    index: int
    rule: str
    premises: tuple[int, ...]
    conclusion: Formula
    edge: tuple[AgentId, AgentId] | None = None
    note: str = ""

    def line(self) -> str:
        premises = ",".join(f"#{p}" for p in self.premises) or "-"
        edge = TrustRelation.label(*self.edge) if self.edge else "-"
        note = f" [{self.note}]" if self.note else ""
        return f"#{self.index} {self.rule}{note} | {premises} | {self.conclusion.pretty()} | {edge}"

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "rule": self.rule,
            "premises": list(self.premises),
            "conclusion": self.conclusion.pretty(),
            "trust_edge": TrustRelation.label(*self.edge) if self.edge else None,
            "note": self.note,
        }


GIVEN_RULES = ("measurement", "post-selection", "assumption")


@dataclass
class KnowledgeBase:
    agents: list[AgentId]
    trust: TrustRelation = field(default_factory=TrustRelation)
    theory: list[TheoryStatement] = field(default_factory=list)
    depth_bound: int = 4
    closed_world: bool = False
    nested_distribution: bool = False
    positive_introspection: bool = False
    facts: dict[Formula, int] = field(default_factory=dict)
    log: list[LogEntry] = field(default_factory=list)
    given: dict[Formula, str] = field(default_factory=dict)
    variable_owner: dict[str, AgentId] = field(default_factory=dict)
    variable_time: dict[str, int] = field(default_factory=dict)

    # -- registration ----------------------------------------------------------
    def add_theory(self, formula: Formula, holders: Iterable[AgentId] | None = None, source: str = "") -> None:
        holders = frozenset(holders) if holders is not None else None
        stmt = TheoryStatement(formula, holders, source)
        if stmt not in self.theory:
            self.theory.append(stmt)

    def assert_fact(self, formula: Formula, rule: str = "assumption", note: str = "") -> int:
        if rule not in GIVEN_RULES:
            raise ValueError(f"given facts use one of {GIVEN_RULES}")
        self.given[formula] = rule
        return self._add(formula, rule, (), None, note)

    def _add(self, formula: Formula, rule: str, premises: tuple[int, ...], edge=None, note: str = "") -> int:
        if formula in self.facts:
            return -1
        entry = LogEntry(len(self.log), rule, premises, formula, edge, note)
        self.log.append(entry)
        self.facts[formula] = entry.index
        return entry.index

    def knows(self, formula: Formula) -> bool:
        return formula in self.facts

    def snapshot(self) -> "KnowledgeSnapshot":
        return KnowledgeSnapshot(tuple(self.log), tuple(self.theory), self.trust, self.depth_bound, dict(self.given))

    def copy_setup(self, depth_bound: int | None = None) -> "KnowledgeBase":
        kb = KnowledgeBase(
            list(self.agents), self.trust, list(self.theory),
            self.depth_bound if depth_bound is None else depth_bound,
            self.closed_world, self.nested_distribution, self.positive_introspection,
            variable_owner=dict(self.variable_owner), variable_time=dict(self.variable_time),
        )
        for formula, rule in self.given.items():
            kb.assert_fact(formula, rule)
        return kb


@dataclass(frozen=True)
class KnowledgeSnapshot:
    log: tuple[LogEntry, ...]
    theory: tuple[TheoryStatement, ...]
    trust: TrustRelation
    depth_bound: int
    given: dict


# -- rules ----------------------------------------------------------------------------

def _prefix_ok(prefix: Sequence[AgentId]) -> bool:
    return all(a != b for a, b in zip(prefix, prefix[1:]))


def _holder_ok(stmt: TheoryStatement, prefix: Sequence[AgentId]) -> bool:
    return stmt.holders is None or not prefix or prefix[-1] in stmt.holders


def rule_common_knowledge(kb: KnowledgeBase, prefix: Sequence[AgentId], formula: Formula) -> Formula | None:
    """``K_i1 ... K_in phi`` for a registered statement whose viewpoint the innermost agent holds."""
    if len(prefix) > kb.depth_bound:
        raise BoundExhausted(f"prefix of length {len(prefix)} exceeds the depth bound {kb.depth_bound}")
    stmt = next((s for s in kb.theory if s.formula == formula), None)
    if stmt is None:
        raise ValueError(f"{formula.pretty()} is not a registered theory statement")
    if not _prefix_ok(prefix) or not _holder_ok(stmt, prefix):
        return None
    result = wrap(prefix, formula)
    kb._add(result, "common-knowledge", (), None, stmt.source)
    return result


def rule_distribution(kb: KnowledgeBase, agent: AgentId | Sequence[AgentId], premise: Formula, implication: Formula) -> Formula | None:
    """From ``K(phi)`` and ``K(phi => psi)`` derive ``K(psi)``; returns None when a premise is absent."""
    prefix = (agent,) if isinstance(agent, AgentId) else tuple(agent)
    if not isinstance(implication, Implies) or implication.lhs != premise:
        return None
    p1, p2 = wrap(prefix, premise), wrap(prefix, implication)
    if p1 not in kb.facts or p2 not in kb.facts:
        return None
    result = wrap(prefix, implication.rhs)
    kb._add(result, "distribution", (kb.facts[p1], kb.facts[p2]))
    return result


def rule_chain(kb: KnowledgeBase, prefix: Sequence[AgentId], first: Implies, second: Implies) -> Formula | None:
    """From ``K(phi => psi)`` and ``K(psi => chi)`` derive ``K(phi => chi)``."""
    if first.rhs != second.lhs or first.lhs == second.rhs:
        return None
    p1, p2 = wrap(prefix, first), wrap(prefix, second)
    if p1 not in kb.facts or p2 not in kb.facts:
        return None
    result = wrap(prefix, Implies(first.lhs, second.rhs))
    kb._add(result, "distribution", (kb.facts[p1], kb.facts[p2]))
    return result


def rule_trust(kb: KnowledgeBase, truster: AgentId, trusted: AgentId, formula: Formula) -> Formula | None:
    """Collapse the innermost ``K_truster K_trusted`` pair of ``formula`` if the edge exists."""
    if formula not in kb.facts or not kb.trust.trusts(truster, trusted):
        return None
    prefix, body = split_prefix(formula)
    if len(prefix) < 2 or prefix[-2:] != (truster, trusted):
        return None
    result = wrap(prefix[:-1], body)
    kb._add(result, "trust", (kb.facts[formula],), (truster, trusted))
    return result


def rule_introspection(kb: KnowledgeBase, agent: AgentId, formula: Formula, mode: str = "positive") -> Formula:
    if mode == "positive":
        premise = Knows(agent, formula)
        if premise not in kb.facts:
            raise ValueError(f"{premise.pretty()} is not known")
        result = Knows(agent, premise)
        kb._add(result, "introspection", (kb.facts[premise],))
        return result
    if mode == "negative":
        if not kb.closed_world:
            raise IntrospectionRefused("negative introspection needs the closed-world flag")
        if Knows(agent, formula) in kb.facts:
            raise ValueError(f"K_{agent} ({formula.pretty()}) is known")
        result = Knows(agent, Not(Knows(agent, formula)))
        kb._add(result, "negative-introspection", (), None, "closed world")
        return result
    raise ValueError(f"unknown introspection mode {mode!r}")


# -- closure ------------------------------------------------------------------------------

def _all_prefixes(agents: Sequence[AgentId], bound: int) -> list[tuple[AgentId, ...]]:
    result = []
    for length in range(1, bound + 1):
        for prefix in itertools.product(agents, repeat=length):
            if _prefix_ok(prefix):
                result.append(prefix)
    return result


def _step_common_knowledge(kb: KnowledgeBase) -> int:
    before = len(kb.log)
    prefixes = _all_prefixes(kb.agents, kb.depth_bound)
    for prefix in prefixes:
        for stmt in kb.theory:
            if _holder_ok(stmt, prefix) and wrap(prefix, stmt.formula) not in kb.facts:
                kb._add(wrap(prefix, stmt.formula), "common-knowledge", (), None, stmt.source)
    return len(kb.log) - before


def _contexts(kb: KnowledgeBase) -> dict[tuple[AgentId, ...], list[Formula]]:
    contexts: dict[tuple[AgentId, ...], list[Formula]] = {}
    for formula in list(kb.facts):
        prefix, body = split_prefix(formula)
        if not prefix:
            continue
        if len(prefix) > 1 and not kb.nested_distribution:
            continue
        contexts.setdefault(prefix, []).append(body)
    return contexts


def _step_distribution(kb: KnowledgeBase) -> int:
    before = len(kb.log)
    for prefix, bodies in _contexts(kb).items():
        known = set(bodies)
        implications = [b for b in bodies if isinstance(b, Implies)]
        for imp in implications:
            if imp.lhs in known:
                rule_distribution(kb, prefix, imp.lhs, imp)
        # chaining until no new implication appears in this context
        while True:
            current = [split_prefix(f)[1] for f in kb.facts if split_prefix(f)[0] == prefix]
            imps = [b for b in current if isinstance(b, Implies)]
            by_lhs: dict[Formula, list[Implies]] = {}
            for imp in imps:
                by_lhs.setdefault(imp.lhs, []).append(imp)
            added = 0
            for first in imps:
                for second in by_lhs.get(first.rhs, []):
                    if first.lhs == second.rhs:
                        continue
                    if wrap(prefix, Implies(first.lhs, second.rhs)) not in kb.facts:
                        rule_chain(kb, prefix, first, second)
                        added += 1
            current_set = set(current)
            for imp in imps:
                if imp.lhs in current_set and wrap(prefix, imp.rhs) not in kb.facts:
                    rule_distribution(kb, prefix, imp.lhs, imp)
                    added += 1
            if not added:
                break
    return len(kb.log) - before


def _step_trust(kb: KnowledgeBase) -> int:
    before = len(kb.log)
    for formula in list(kb.facts):
        prefix, _ = split_prefix(formula)
        if len(prefix) >= 2:
            rule_trust(kb, prefix[-2], prefix[-1], formula)
    return len(kb.log) - before


def _step_introspection(kb: KnowledgeBase) -> int:
    if not kb.positive_introspection:
        return 0
    before = len(kb.log)
    for formula in list(kb.facts):
        prefix, body = split_prefix(formula)
        if len(prefix) == 1 and len(prefix) + 1 <= kb.depth_bound:
            if Knows(prefix[0], formula) not in kb.facts:
                rule_introspection(kb, prefix[0], body)
    return len(kb.log) - before


@dataclass(frozen=True)
class ClosureReport:
    rounds: int
    size: int
    depth_bound: int
    goal_reached: bool | None = None


def derive_closure(kb: KnowledgeBase, depth_bound: int | None = None, goal: Formula | None = None) -> ClosureReport:
    """Round-robin common knowledge, distribution, trust, introspection until nothing changes."""
    if depth_bound is not None:
        kb.depth_bound = depth_bound
    rounds = 0
    while True:
        rounds += 1
        added = _step_common_knowledge(kb)
        added += _step_distribution(kb)
        added += _step_trust(kb)
        added += _step_introspection(kb)
        if not added:
            break
    report = ClosureReport(rounds, len(kb.facts), kb.depth_bound)
    if goal is None:
        return report
    if goal in kb.facts:
        return ClosureReport(rounds, len(kb.facts), kb.depth_bound, True)
    deeper = kb.copy_setup(kb.depth_bound + 1)
    derive_closure(deeper)
    if goal in deeper.facts:
        raise BoundExhausted(
            f"bound exhausted: {goal.pretty()} needs knowledge nesting deeper than {kb.depth_bound}"
        )
    return ClosureReport(rounds, len(kb.facts), kb.depth_bound, False)


# -- contradictions ---------------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    agent: AgentId
    kind: str
    variable: str
    formulas: tuple[Formula, Formula]
    derivation: tuple[LogEntry, ...]

    def statement(self) -> str:
        inner = " & ".join(f"({f.pretty()})" for f in self.formulas)
        return f"K_{self.agent}[{inner}]"

    def trust_edges(self) -> list[str]:
        return [TrustRelation.label(*e.edge) for e in self.derivation if e.edge]

    def to_dict(self) -> dict:
        return {
            "agent": self.agent.name,
            "time": self.agent.time,
            "kind": self.kind,
            "variable": self.variable,
            "statement": self.statement(),
            "derivation": [e.to_dict() for e in self.derivation],
        }


def derivation_slice(kb_log: Sequence[LogEntry], roots: Iterable[int]) -> tuple[LogEntry, ...]:
    needed: set[int] = set()
    stack = list(roots)
    while stack:
        i = stack.pop()
        if i in needed:
            continue
        needed.add(i)
        stack.extend(kb_log[i].premises)
    return tuple(kb_log[i] for i in sorted(needed))


def _candidates(kb: KnowledgeBase, agent: AgentId) -> list[tuple[str, str, Formula, Formula]]:
    found = []
    bodies = [split_prefix(f)[1] for f in kb.facts if split_prefix(f)[0] == (agent,)]
    body_set = set(bodies)
    for body in bodies:
        if isinstance(body, Implies) and isinstance(body.lhs, Atom) and isinstance(body.rhs, Atom):
            lhs, rhs = body.lhs, body.rhs
            if lhs.var == rhs.var and lhs.value != rhs.value:
                back = Implies(rhs, lhs)
                if back in body_set and lhs.value < rhs.value:
                    found.append(("cycle", lhs.var, body, back))
        if isinstance(body, Atom):
            for other in bodies:
                if isinstance(other, Atom) and other.var == body.var and body.value < other.value:
                    found.append(("atoms", body.var, body, other))
    return found


def find_contradiction(kb: KnowledgeBase) -> list[Certificate]:
    """One certificate per agent whose knowledge contains ``x=v => x=v'`` both ways,
    or two different values of one variable.  Agents are reported in declaration order."""
    result = []
    for agent in kb.agents:
        cands = _candidates(kb, agent)
        if not cands:
            continue

        def rank(c):
            kind, var, f1, f2 = c
            own = kb.variable_owner.get(var) == agent
            time = kb.variable_time.get(var, -1)
            return (not own, -time, kind != "cycle", var, f1.pretty())

        kind, var, f1, f2 = sorted(cands, key=rank)[0]
        roots = [kb.facts[Knows(agent, f1)], kb.facts[Knows(agent, f2)]]
        result.append(Certificate(agent, kind, var, (f1, f2), derivation_slice(kb.log, roots)))
    return result


# -- replay -----------------------------------------------------------------------------

def _check_entry(entry: LogEntry, derived: dict[int, Formula], theory: Sequence[TheoryStatement],
                 trust: TrustRelation, bound: int, given: dict) -> str | None:
    if any(p not in derived for p in entry.premises):
        return "premise not derived earlier"
    prem = [derived[p] for p in entry.premises]
    c = entry.conclusion
    if entry.rule == "common-knowledge":
        prefix, body = split_prefix(c)
        for stmt in theory:
            # the body may itself start with K if the statement does; try every split point
            for cut in range(len(prefix) + 1):
                if wrap(prefix[cut:], body) == stmt.formula:
                    pre = prefix[:cut]
                    if len(pre) <= bound and _prefix_ok(pre) and _holder_ok(stmt, pre):
                        return None
        return "not an instance of a theory statement"
    if entry.rule in GIVEN_RULES:
        return None if given.get(c) == entry.rule else "not a given fact"
    if entry.rule == "distribution":
        if len(prem) != 2:
            return "distribution needs two premises"
        p_a, b_a = split_prefix(prem[0])
        p_b, b_b = split_prefix(prem[1])
        p_c, b_c = split_prefix(c)
        if not (p_a == p_b == p_c) or not p_a:
            return "premises and conclusion must share a knowledge prefix"
        if isinstance(b_b, Implies) and b_b.lhs == b_a and b_b.rhs == b_c:
            return None
        if (isinstance(b_a, Implies) and isinstance(b_b, Implies) and b_a.rhs == b_b.lhs
                and b_c == Implies(b_a.lhs, b_b.rhs)):
            return None
        return "conclusion does not follow"
    if entry.rule == "trust":
        if len(prem) != 1 or entry.edge is None:
            return "trust needs one premise and an edge"
        truster, trusted = entry.edge
        if not trust.trusts(truster, trusted):
            return "edge not in the trust relation"
        p, body = split_prefix(prem[0])
        if len(p) < 2 or p[-2:] != (truster, trusted) or wrap(p[:-1], body) != c:
            return "not an innermost collapse along the edge"
        return None
    if entry.rule == "introspection":
        if len(prem) == 1 and isinstance(prem[0], Knows) and c == Knows(prem[0].agent, prem[0]):
            return None
        return "not a positive introspection step"
    if entry.rule == "negative-introspection":
        return None if given.get("__closed_world__") else "negative introspection outside closed world"
    return f"unknown rule {entry.rule!r}"


@dataclass(frozen=True)
class ReplayResult:
    ok: bool
    failed_entry: int | None = None
    reason: str = ""
    derived: frozenset = frozenset()

    def __bool__(self) -> bool:
        return self.ok


def replay(entries: Sequence[LogEntry], theory: Sequence[TheoryStatement], trust: TrustRelation,
           depth_bound: int, given: dict) -> ReplayResult:
    """Re-derive every entry in order from axioms, given facts and earlier entries."""
    derived: dict[int, Formula] = {}
    for entry in entries:
        problem = _check_entry(entry, derived, theory, trust, depth_bound, given)
        if problem:
            return ReplayResult(False, entry.index, problem)
        derived[entry.index] = entry.conclusion
    return ReplayResult(True, derived=frozenset(derived.values()))


def replay_kb(kb: KnowledgeBase) -> ReplayResult:
    given = dict(kb.given)
    if kb.closed_world:
        given["__closed_world__"] = True
    result = replay(kb.log, kb.theory, kb.trust, kb.depth_bound, given)
    if result and result.derived != frozenset(kb.facts):
        return ReplayResult(False, None, "replayed set differs from the derived facts", result.derived)
    return result


def replay_certificate(cert: Certificate, kb: KnowledgeBase) -> ReplayResult:
    given = dict(kb.given)
    result = replay(cert.derivation, kb.theory, kb.trust, kb.depth_bound, given)
    if result and not all(Knows(cert.agent, f) in result.derived for f in cert.formulas):
        return ReplayResult(False, None, "certificate formulas not reached", result.derived)
    return result


# -- physics to logic -----------------------------------------------------------------------

def implications_from_support(
    state: StateVector,
    measured: tuple[int, int, int],
    other: tuple[int, int],
    names: tuple[str, str] = ("a", "b"),
    labels: tuple[Sequence, Sequence] | None = None,
) -> list[Formula]:
    """Possibilistic consequences of seeing ``measured = (subsystem, setting, outcome)`` for
    ``other = (subsystem, setting)``: certain outcomes give ``x=v => y=w``, impossible
    ones give ``x=v => not y=w``."""
    i, x, a = measured
    j, y = other
    pair = marginal(state, (i, j)) if len(state.signature) > 2 else (
        state if (i, j) == (0, 1) else marginal(state, (i, j))
    )
    _, box = conditional_box(pair, 0, x, a)
    num_out = box.signature.outcomes[0]
    lab_i = labels[0] if labels else list(range(pair.signature.outcomes[0]))
    lab_j = labels[1] if labels else list(range(num_out))
    lhs = Atom(names[0], lab_i[a])
    result: list[Formula] = []
    probs = [box[(y,), (b,)] for b in range(num_out)]
    if all(p != 0 and p != 1 for p in probs):
        return []
    for b, p in enumerate(probs):
        if p == 1:
            result.append(Implies(lhs, Atom(names[1], lab_j[b])))
    for b, p in enumerate(probs):
        if p == 0:
            result.append(Implies(lhs, Not(Atom(names[1], lab_j[b]))))
    return result


def measurement_facts(observer: AgentId, witness: AgentId, variable: str, values: Sequence) -> list[Formula]:
    """Branch structure of a measurement seen from outside: the witness knows the observer
    knows one outcome, and knowing one outcome excludes the others."""
    atoms = [Atom(variable, v) for v in values]
    facts: list[Formula] = [Knows(witness, Or(tuple(Knows(observer, at) for at in atoms)))]
    for at, other in itertools.permutations(atoms, 2):
        facts.append(Knows(witness, Implies(Knows(observer, at), Knows(observer, Not(other)))))
    return facts
