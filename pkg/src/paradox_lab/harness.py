"""Run an experiment end to end: physics, shared theory, closure, certificates.

Box-world runs follow the outsiders' model: each measured subsystem gets a
fresh memory and the chosen update, the (system, memory) pairs are compressed
back to effective systems, and every pair of agents on different sides reads
its possibilistic correlations off the effective state.  Quantum runs take the
same correlations from exact support tables of the statevector.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib.resources import files
from pathlib import Path
from typing import Iterable, Sequence

from . import dsl
from .gpt.operations import apply_local, conditional_box, marginal, marginal_at, is_no_signalling, tensor
from .gpt.serialize import dump_state
from .gpt.states import DomainError, SignallingError, StateVector, SystemSignature, make_pr_box
from .logic import (
    AgentId,
    Atom,
    Certificate,
    Implies,
    KnowledgeBase,
    Knows,
    TrustRelation,
    derive_closure,
    find_contradiction,
    implications_from_support,
    measurement_facts,
    replay_certificate,
)
from .memory import build_memory_update, compress_pairs, detect_superglue, fresh_memory

REPORT_SCHEMA = "paradox-lab/report/1"

EXIT_CONSISTENT = 0
EXIT_USAGE = 1
EXIT_PHYSICS = 2
EXIT_CONTRADICTION = 10


class PhysicsError(RuntimeError):
    def __init__(self, code: str, message: str, line: int = 0):
        self.code = code
        self.line = line
        super().__init__(f"{code}: {message}" + (f" (line {line})" if line else ""))


def bundled_path(name: str) -> Path:
    return Path(str(files("paradox_lab") / "data" / name))


def resolve_path(path: str | Path) -> Path:
    """Existing path, or the bundled experiment of that file name."""
    p = Path(path)
    if p.exists():
        return p
    candidate = bundled_path(p.name)
    if candidate.exists():
        return candidate
    raise FileNotFoundError(str(path))


# -- roles ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Role:
    """What one agent does: which variable it writes, on which side, at which setting."""

    agent: AgentId
    variable: str
    side: int
    setting: object
    values: tuple[str, ...]
    event: dsl.Event


def _roles(exp: dsl.Experiment) -> list[Role]:
    subsystems = list(exp.state.subsystems) if exp.state else []
    settings = exp.setting_values()
    side_of: dict[str, int] = {}
    roles = []
    for e in exp.events:
        decl = exp.agent(e.agent)
        side = side_of[e.target] if e.target_is_lab else subsystems.index(e.target)
        side_of[e.agent] = side
        if exp.theory == "quantum":
            setting = e.setting.basis
            values = dsl.QUANTUM_VALUES[setting]
        else:
            setting = settings[e.setting.variable]
            values = ("0", "1")
        roles.append(Role(AgentId(decl.name, decl.time), e.outcome, side, setting, values, e))
    return roles


def holds_box(holder: Role, other: Role, events: Sequence[dsl.Event]) -> bool:
    """Whether ``holder`` may reason with the box it shares with ``other``.

    The box is stale for the holder when ``other`` acted first and ``other``'s lab
    was measured from outside before the holder acted.
    """
    t_h, t_o = holder.event.time, other.event.time
    if t_o >= t_h:
        return True
    return not any(e.target_is_lab and e.target == other.agent.name and t_o < e.time < t_h for e in events)


# -- physics -----------------------------------------------------------------------------

@dataclass
class PhysicsSummary:
    theory: str
    initial: str
    steps: list[dict] = field(default_factory=list)
    assertions: list[dict] = field(default_factory=list)
    superglue: list[dict] = field(default_factory=list)
    boxes: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "theory": self.theory,
            "initial": self.initial,
            "steps": self.steps,
            "assertions": self.assertions,
            "superglue": self.superglue,
            "boxes": self.boxes,
        }


def initial_box_state(exp: dsl.Experiment) -> StateVector:
    st = exp.state
    if st.kind == "builtin":
        return make_pr_box()
    return StateVector(SystemSignature(st.signature), st.entries)


def boxworld_physics(exp: dsl.Experiment, dump_states: bool = False) -> tuple[StateVector, PhysicsSummary]:
    """Apply the outsiders' memory updates and return the effective state with a summary."""
    try:
        initial = initial_box_state(exp)
    except DomainError as exc:
        raise PhysicsError("E_STATE", str(exc), exp.state.line)
    summary = PhysicsSummary("boxworld", dump_state(initial))
    if initial.block_sums() and any(s != 1 for s in initial.block_sums()):
        raise PhysicsError("E_STATE", "initial state is not normalised", exp.state.line)
    if not initial.in_unit_range():
        raise PhysicsError("E_STATE", "initial state has entries outside [0, 1]", exp.state.line)
    ns = is_no_signalling(initial)
    if not ns:
        raise PhysicsError("E_SIGNALLING", ns.witness.describe(), exp.state.line)

    models = {m.target: m for m in exp.models}
    subsystems = list(exp.state.subsystems)
    state = initial
    pairs = []
    for e in exp.events:
        if e.target_is_lab:
            step = {"time": e.time, "agent": e.agent, "action": f"measures lab({e.target})"}
            summary.steps.append(step)
            continue
        model = models.get(e.agent)
        step = {"time": e.time, "agent": e.agent, "action": f"measures {e.target}"}
        if model is not None:
            update = build_memory_update(policy=model.policy)
            memory_pos = len(state.signature)
            state = tensor(state, fresh_memory(update.memory_initial))
            sys_pos = subsystems.index(e.target)
            (branch,) = apply_local(update.base, state, (sys_pos, memory_pos))
            state = branch.state
            pairs.append((sys_pos, memory_pos, e.agent))
            step["update"] = f"{model.outsider} models memory {e.agent} <- {e.target} ({model.policy})"
            pair_state = marginal_at(state, (sys_pos, memory_pos), None, check=False)
            try:
                marginal(state, (sys_pos, memory_pos))
                report = detect_superglue(pair_state, ((0,), (1,)))
                flag = {"pair": f"{e.target}|{e.agent}", "verdict": report.verdict}
                if report.witness:
                    flag["witness"] = report.witness.describe()
            except SignallingError as exc:
                flag = {"pair": f"{e.target}|{e.agent}", "verdict": "superglued", "witness": str(exc)}
            summary.superglue.append(flag)
        if dump_states:
            step["state"] = dump_state(state)
        summary.steps.append(step)

    effective = compress_pairs(state, [(s, m) for s, m, _ in pairs]) if pairs else state
    summary.assertions.append({
        "check": "effective state equals initial state",
        "pairs": [f"{subsystems[s]}+{agent}" for s, _, agent in pairs],
        "ok": effective == initial,
    })
    if effective != initial:
        raise PhysicsError("E_EFFECTIVE", "memory updates did not preserve the shared correlations")
    return effective, summary


def quantum_tables(exp: dsl.Experiment):
    """Final ket and the per-role measurement specs on its qubits."""
    from . import quantum as q

    st = exp.state
    if st.kind == "builtin":
        ket = q.hardy_state()
    else:
        ket = q.Ket.from_terms(dict(st.ket_terms))
        if not ket.is_normalised():
            raise PhysicsError("E_STATE", "initial ket is not normalised", st.line)
    n_sys = len(st.subsystems)
    memories: dict[str, int] = {}
    models = {m.target: m for m in exp.models}
    specs: dict[str, tuple] = {}
    for e in exp.events:
        if e.target_is_lab:
            continue
        sys_q = st.subsystems.index(e.target)
        if e.setting.basis == "X":
            ket = q.apply_gate(ket, q.HADAMARD, (sys_q,))
        if e.agent in models:
            mem_q = n_sys + len(memories)
            ket = ket.tensor(q.Ket.basis("0"))
            ket = q.cnot_memory(ket, sys_q, mem_q)
            memories[e.agent] = mem_q
            specs[e.outcome] = ("Z", mem_q)
        else:
            specs[e.outcome] = ("Z", sys_q)
    for e in exp.events:
        if e.target_is_lab:
            inner = exp.event_of(e.target)
            sys_q = st.subsystems.index(inner.target)
            if e.setting.basis == "okfail":
                specs[e.outcome] = ("okfail", (memories[e.target], sys_q))
            else:
                specs[e.outcome] = ("Z", memories[e.target])
    return ket, specs


def quantum_physics(exp: dsl.Experiment):
    ket, specs = quantum_tables(exp)
    summary = PhysicsSummary("quantum", _initial_ket_text(exp))
    summary.steps.append({"time": 0, "agent": "-", "action": "final state", "state": ket.pretty()})
    return ket, specs, summary


def _initial_ket_text(exp: dsl.Experiment) -> str:
    from . import quantum as q

    st = exp.state
    ket = q.hardy_state() if st.kind == "builtin" else q.Ket.from_terms(dict(st.ket_terms))
    return ket.pretty()


# -- theory construction -----------------------------------------------------------------------

@dataclass
class Setup:
    experiment: dsl.Experiment
    roles: list[Role]
    kb: KnowledgeBase
    physics: PhysicsSummary
    effective: StateVector | None = None


def _box_statements(pair_box: StateVector, ri: Role, rj: Role, labels) -> list:
    stmts = []
    for first, second, fi, fj in ((ri, rj, 0, 1), (rj, ri, 1, 0)):
        x_first = first.setting if isinstance(first.setting, int) else 0
        x_second = second.setting if isinstance(second.setting, int) else 0
        local = marginal(pair_box, (fi,))
        for v in range(len(first.values)):
            if local[(x_first,), (v,)] == 0:
                continue
            stmts.extend(
                implications_from_support(
                    pair_box, (fi, x_first, v), (fj, x_second),
                    names=(first.variable, second.variable),
                    labels=(labels[fi], labels[fj]),
                )
            )
    return [s for s in stmts if isinstance(s.rhs, Atom)]


def build_setup(
    exp: dsl.Experiment,
    depth: int = 4,
    use_select: bool = True,
    observed: dict[str, str] | None = None,
    trust_override: TrustRelation | None = None,
    dump_states: bool = False,
) -> Setup:
    roles = _roles(exp)
    agents = [r.agent for r in roles]
    declared = [AgentId(a.name, a.time) for a in exp.agents]
    for a in declared:
        if a not in agents:
            agents.append(a)
    trust = trust_override or TrustRelation(frozenset(
        (AgentId(*t.truster), AgentId(*t.trusted)) for t in exp.trust
    ))
    kb = KnowledgeBase(agents, trust, depth_bound=depth)
    for r in roles:
        kb.variable_owner[r.variable] = r.agent
        kb.variable_time[r.variable] = r.event.time

    effective = None
    if exp.theory == "boxworld":
        effective, physics = boxworld_physics(exp, dump_states) if exp.events else (None, PhysicsSummary("boxworld", dump_state(initial_box_state(exp)) if exp.state else ""))
    else:
        ket, specs, physics = quantum_physics(exp) if exp.events else (None, {}, PhysicsSummary("quantum", _initial_ket_text(exp) if exp.state else ""))

    # effective boxes between agents on different sides, in the order the roles act
    for ri, rj in itertools.combinations(roles, 2):
        if ri.side == rj.side:
            continue
        if exp.theory == "boxworld":
            keep = (ri.side, rj.side)
            pair_box = marginal(effective, keep)
            labels = (("0", "1"), ("0", "1"))
            settings = f"{_setting_name(ri)}={ri.setting}, {_setting_name(rj)}={rj.setting}"
            box_text = _restrict(pair_box, ri.setting, rj.setting)
        else:
            from . import quantum as q

            table = q.joint_distribution(ket, [specs[ri.variable], specs[rj.variable]])
            labels = (tuple(_q_labels(specs[ri.variable])), tuple(_q_labels(specs[rj.variable])))
            pair_box = _table_box(table, labels)
            settings = f"{ri.setting}, {rj.setting}"
            box_text = pair_box.pretty()
        holders = [r.agent for r, o in ((ri, rj), (rj, ri)) if holds_box(r, o, exp.events)]
        source = f"box {ri.agent}-{rj.agent}"
        stmts = _box_statements(pair_box, ri, rj, labels)
        for stmt in stmts:
            kb.add_theory(stmt, holders, source)
        physics.boxes.append({
            "agents": [ri.agent.name, rj.agent.name],
            "settings": settings,
            "box": box_text,
            "holders": [h.name for h in holders],
            "statements": [s.pretty() for s in stmts],
        })

    for r in roles:
        for w in agents:
            if w != r.agent:
                for fact in measurement_facts(r.agent, w, r.variable, r.values):
                    kb.assert_fact(fact, "measurement")

    selected = list(exp.select) if use_select else []
    if selected:
        _check_branch_possible(exp, [(s.variable, s.value) for s in selected], effective, roles,
                               ket if exp.theory == "quantum" else None, specs if exp.theory == "quantum" else None)
        by_var = {r.variable: r for r in roles}
        latest = max(by_var[s.variable].event.time for s in selected)
        for a in agents:
            role = next((r for r in roles if r.agent == a), None)
            if role is not None and role.event.time >= latest:
                for s in selected:
                    kb.assert_fact(Knows(a, Atom(s.variable, s.value)), "post-selection")
    if observed:
        _check_branch_possible(exp, list(observed.items()), effective, roles,
                               ket if exp.theory == "quantum" else None, specs if exp.theory == "quantum" else None,
                               pairwise=True)
        for r in roles:
            if r.variable in observed:
                kb.assert_fact(Knows(r.agent, Atom(r.variable, observed[r.variable])), "assumption", "own outcome")
    return Setup(exp, roles, kb, physics, effective)


def _setting_name(role: Role) -> str:
    return role.event.setting.variable or role.event.setting.basis


def _restrict(pair_box: StateVector, x: int, y: int) -> str:
    return " ".join(str(pair_box[(x, y), (a, b)]) for a in (0, 1) for b in (0, 1))


def _q_labels(spec: tuple) -> list[str]:
    return ["0", "1"] if spec[0] == "Z" else ["ok", "fail"]


def _table_box(table: dict, labels) -> StateVector:
    from . import quantum as q

    def key(lab):
        return int(lab) if lab in ("0", "1") else lab

    raw = {k: v for k, v in table.items()}
    try:
        probs = {k: q.to_fraction(v) for k, v in raw.items()}
    except q.QuantumError:
        # irrational probabilities: keep the support, weight it uniformly
        support = [k for k, v in raw.items() if not q.is_zero(v)]
        probs = {k: (Fraction(1, len(support)) if k in support else Fraction(0)) for k in raw}
    sig = SystemSignature(((1, len(labels[0])), (1, len(labels[1]))))
    return StateVector.from_function(
        sig, lambda x, a: probs[(key(labels[0][a[0]]), key(labels[1][a[1]]))]
    )


def _check_branch_possible(exp, atoms, effective, roles, ket, specs, pairwise: bool = False) -> None:
    by_var = {r.variable: r for r in roles}
    if exp.theory == "quantum":
        from . import quantum as q

        table = q.joint_distribution(ket, [specs[v] for v, _ in atoms])
        key = tuple(int(val) if val in ("0", "1") else val for _, val in atoms)
        if q.is_zero(table[key]):
            raise PhysicsError("E_IMPOSSIBLE_BRANCH", f"selected outcomes {dict(atoms)} have probability 0")
        return
    groups = itertools.combinations(atoms, 2) if pairwise else [atoms]
    for group in groups:
        sides = [by_var[v].side for v, _ in group]
        if len(set(sides)) != len(sides):
            continue
        sub = marginal(effective, tuple(sides))
        settings = tuple(by_var[v].setting for v, _ in group)
        outcomes = tuple(int(val) for _, val in group)
        if sub[settings, outcomes] == 0 and not pairwise:
            raise PhysicsError("E_IMPOSSIBLE_BRANCH", f"selected outcomes {dict(group)} have probability 0")


# -- reports ---------------------------------------------------------------------------------

@dataclass
class RunReport:
    experiment: str
    digest: str
    flags: dict
    physics: PhysicsSummary
    closure_size: int
    closure_rounds: int
    certificates: list[Certificate]
    replay_ok: bool
    exit_status: int
    closure_dump: list[str] | None = None
    log_lines: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "experiment": self.experiment,
            "digest": self.digest,
            "flags": self.flags,
            "physics": self.physics.to_dict(),
            "logic": {
                "closure_size": self.closure_size,
                "closure_rounds": self.closure_rounds,
                "replay_ok": self.replay_ok,
                "certificates": [c.to_dict() for c in self.certificates],
                "closure": self.closure_dump,
            },
            "exit_status": self.exit_status,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        lines = [f"experiment {self.experiment}", f"digest {self.digest}", f"theory {self.physics.theory}"]
        lines.append(f"initial {self.physics.initial}")
        for step in self.physics.steps:
            extra = f"; {step['update']}" if "update" in step else ""
            lines.append(f"t={step['time']} {step['agent']} {step['action']}{extra}")
            if "state" in step:
                lines.append(f"  state {step['state']}")
        for a in self.physics.assertions:
            lines.append(f"assert {a['check']} [{', '.join(a['pairs'])}]: {'ok' if a['ok'] else 'FAILED'}")
        for s in self.physics.superglue:
            lines.append(f"superglue {s['pair']}: {s['verdict']}" + (f" ({s['witness']})" if "witness" in s else ""))
        for b in self.physics.boxes:
            lines.append(
                f"box {'-'.join(b['agents'])} at {b['settings']}: {b['box']}; held by {', '.join(b['holders']) or 'nobody'}"
            )
        lines.append(f"closure {self.closure_size} facts in {self.closure_rounds} rounds; replay {'ok' if self.replay_ok else 'FAILED'}")
        if self.closure_dump is not None:
            lines.extend(f"  {f}" for f in self.closure_dump)
        if not self.certificates:
            lines.append("consistent: no contradiction certificate")
        for c in self.certificates:
            lines.append(f"certificate {c.agent.full()} ({c.kind}): {c.statement()}")
            edges = c.trust_edges()
            if edges:
                lines.append(f"  trust edges used: {', '.join(edges)}")
        lines.append(f"exit {self.exit_status}")
        return "\n".join(lines) + "\n"

    def trace_text(self) -> str:
        """Full derivation log followed by each certificate's derivation."""
        out = ["# rule | premises | conclusion | trust-edge"]
        out.extend(self.log_lines)
        for c in self.certificates:
            out.append(f"# certificate {c.agent.full()}: {c.statement()}")
            out.extend(e.line() for e in c.derivation)
        return "\n".join(out) + "\n"


def certificate_trace(cert: Certificate) -> str:
    return "\n".join(e.line() for e in cert.derivation) + "\n"


def run_experiment(
    exp: dsl.Experiment,
    source: str,
    depth: int = 4,
    use_select: bool = True,
    observed: dict[str, str] | None = None,
    trust_override: TrustRelation | None = None,
    dump_states: bool = False,
) -> RunReport:
    flags = {"depth": depth, "use_select": use_select, "observed": dict(sorted((observed or {}).items())),
             "dump_states": dump_states}
    digest = hashlib.sha256((source + json.dumps(flags, sort_keys=True)).encode("utf-8")).hexdigest()
    setup = build_setup(exp, depth, use_select, observed, trust_override, dump_states)
    report = derive_closure(setup.kb)
    certificates = find_contradiction(setup.kb)
    replay_ok = all(replay_certificate(c, setup.kb) for c in certificates)
    dump = sorted(f.pretty() for f in setup.kb.facts) if exp.query == "closure-dump" else None
    status = EXIT_CONTRADICTION if certificates else EXIT_CONSISTENT
    return RunReport(
        exp.source_name, digest, flags, setup.physics, report.size, report.rounds,
        certificates, replay_ok, status, dump, [e.line() for e in setup.kb.log],
    )


def run(path: str | Path, **kwargs) -> RunReport:
    p = resolve_path(path)
    source = p.read_text(encoding="utf-8")
    exp = dsl.load(source, p.name)
    if kwargs.pop("ignore_select", False):
        kwargs["use_select"] = False
    return run_experiment(exp, source, **kwargs)


# -- viewpoints ------------------------------------------------------------------------------

def explain(path: str | Path, at: int, agent: str | None = None) -> str:
    """What each agent would write down about the boxes around it at time ``at``."""
    p = resolve_path(path)
    exp = dsl.load(p.read_text(encoding="utf-8"), p.name)
    last = max((e.time for e in exp.events), default=0)
    if at < 0 or at > last:
        raise ValueError(f"time {at} outside 0..{last}")
    names = [a.name for a in exp.agents]
    if agent is not None and agent not in names:
        raise ValueError(f"unknown agent {agent}")
    lines = [f"viewpoints at t={at}"]
    if at == 0:
        initial = dump_state(initial_box_state(exp)) if exp.theory == "boxworld" else _initial_ket_text(exp)
        lines.append(f"initial {initial}")
        for a in exp.agents:
            if agent is None or a.name == agent:
                lines.append(f"{a.name}@{a.time}: shared initial {initial}")
        return "\n".join(lines) + "\n"
    setup = build_setup(exp)
    roles = {r.agent.name: r for r in setup.roles}
    for a in exp.agents:
        if agent is not None and a.name != agent:
            continue
        role = roles.get(a.name)
        if role is None:
            lines.append(f"{a.name}@{a.time}: takes no part in the events")
            continue
        head = f"{a.name}@{a.time}"
        if role.event.time > at:
            lines.append(f"{head}: has not acted yet")
            continue
        others = [r for r in setup.roles if r.side != role.side]
        if role.event.target_is_lab:
            lines.append(f"{head}: measured lab({role.event.target}) as one effective system")
            for o in others:
                if holds_box(role, o, exp.events):
                    lines.append(f"  effective box with {o.agent.name}: {_pair_text(setup, role, o)}")
        else:
            lines.append(f"{head}: measured {role.event.target}; boxes prepared for the other side")
            for o in others:
                for v in role.values:
                    text = _conditional_text(setup, role, o, v)
                    if text is not None:
                        lines.append(f"  if {role.variable}={v}: {o.agent.name} sees {text}")
    return "\n".join(lines) + "\n"


def _pair_text(setup: Setup, ri: Role, rj: Role) -> str:
    for b in setup.physics.boxes:
        if set(b["agents"]) == {ri.agent.name, rj.agent.name}:
            order = b["agents"]
            rel = _relation_text(setup, ri, rj)
            return f"[{b['box']}] over ({order[0]}, {order[1]}) at {b['settings']}{rel}"
    return "none"


def _relation_text(setup: Setup, ri: Role, rj: Role) -> str:
    if setup.effective is None:
        return ""
    if setup.effective == make_pr_box() and len(setup.effective.signature) == 2:
        xs = _setting_name(ri) if ri.side == 0 else _setting_name(rj)
        ys = _setting_name(rj) if rj.side == 1 else _setting_name(ri)
        va = ri.variable if ri.side == 0 else rj.variable
        vb = rj.variable if rj.side == 1 else ri.variable
        return f"; PR box {xs}{ys} = {va} xor {vb}"
    return ""


def _conditional_text(setup: Setup, role: Role, other: Role, value: str) -> str | None:
    exp = setup.experiment
    if exp.theory == "boxworld":
        try:
            _, box = conditional_box(setup.effective, role.side, role.setting, int(value))
        except DomainError:
            return None
        return f"[{box.pretty()}] ({other.variable} by setting)"
    from . import quantum as q

    ket, specs = quantum_tables(exp)
    table = q.joint_distribution(ket, [specs[role.variable], specs[other.variable]])
    key_v = int(value) if value in ("0", "1") else value
    total = sum((p for (x, _), p in table.items() if x == key_v), 0)
    if q.is_zero(total):
        return None
    parts = []
    for (x, y), p in sorted(table.items(), key=lambda kv: str(kv[0])):
        if x == key_v:
            parts.append(f"P({other.variable}={y})={q.to_fraction(p / total) if not q.is_zero(p) else 0}")
    return "[" + ", ".join(parts) + "]"


# -- self test --------------------------------------------------------------------------------

def selftest(scopes: Iterable[str]) -> tuple[bool, list[str]]:
    scopes = set(scopes)
    if "all" in scopes:
        scopes = {"theorems", "quantum", "logic"}
    lines: list[str] = []
    ok_all = True

    def check(name: str, ok: bool) -> None:
        nonlocal ok_all
        ok_all &= bool(ok)
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}")

    if "theorems" in scopes:
        from fractions import Fraction as F

        from .gpt.operations import validate_operation
        from .gpt.polytope import enumerate_ns_vertices, violates_chsh
        from .gpt.states import GBIT, make_gbit
        from .memory import bipartite_preservation_check, compress, update_system

        v1 = enumerate_ns_vertices(GBIT)
        v2 = enumerate_ns_vertices(SystemSignature.gbits(2))
        check("1-gbit polytope has 4 vertices", len(v1) == 4)
        check("2-gbit polytope has 24 vertices, 8 violating CHSH",
              len(v2) == 24 and sum(violates_chsh(v) for v in v2) == 8)
        update = build_memory_update()
        check("memory update valid on all 2-gbit vertices", bool(validate_operation(update.base, v2)))
        check("memory update compresses back to the input gbit",
              all(compress(update_system(make_gbit(p, q))).compressed == make_gbit(p, q)
                  for p in (F(0), F(1, 3), F(1)) for q in (F(0), F(2, 5), F(1))))
        check("bipartite preservation on all 24 vertices", all(bipartite_preservation_check(v).ok for v in v2))
        check("bipartite preservation on the PR box", bipartite_preservation_check(make_pr_box()).ok)
        check("supergluing at p=1, q=0", detect_superglue(update_system(make_gbit(1, 0)), ((0,), (1,))).superglued)
        check("no supergluing at p=q=1/2",
              not detect_superglue(update_system(make_gbit(F(1, 2), F(1, 2))), ((0,), (1,))).superglued)
    if "quantum" in scopes:
        from . import quantum as q

        table = q.fr_pair_table("u", "w")
        check("P(u=ok, w=ok) = 1/12", q.is_zero(table[("ok", "ok")] - q.sympy.Rational(1, 12)))
        check("P(b=0, u=ok) = 0", q.is_zero(q.fr_pair_table("b", "u")[(0, "ok")]))
        check("P(a=0, b=1) = 0", q.is_zero(q.fr_pair_table("a", "b")[(0, 1)]))
        check("P(a=1, w=ok) = 0", q.is_zero(q.fr_pair_table("a", "w")[(1, "ok")]))
    if "logic" in scopes:
        report = run(bundled_path("pr_box.exp"))
        golden = bundled_path("pr_box_wigner.trace").read_text(encoding="utf-8")
        wigner = next((c for c in report.certificates if c.agent.name == "W"), None)
        check("PR experiment: certificates for A, B, U, W",
              sorted(c.agent.name for c in report.certificates) == ["A", "B", "U", "W"])
        check("Wigner's derivation matches the golden trace", wigner is not None and certificate_trace(wigner) == golden)
        check("certificates replay", report.replay_ok)
    return ok_all, lines
