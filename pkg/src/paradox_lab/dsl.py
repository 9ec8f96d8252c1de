"""Plain-text experiment descriptions (``.exp`` files).

The format is line oriented.  A keyword line opens a block and the following
lines belong to it until the next keyword::

    THEORY boxworld
    AGENTS
      A @1 memory gbit
    STATE
      P, R = pr_box
    EVENTS
      t=1 A measures P setting X = 0 outcome a
      t=3 U measures lab(A) setting X~ = X + 1 outcome a~
    MODEL
      U models A update copy
    TRUST
      A@1 ~> B@2
    SELECT u=ok w=ok
    QUERY find-contradiction

``#`` starts a comment.  ``j@t ~> i@s`` means agent i trusts agent j.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

SECTIONS = ("THEORY", "AGENTS", "STATE", "EVENTS", "MODEL", "TRUST", "SELECT", "QUERY")
THEORIES = ("boxworld", "quantum")
BUILTIN_STATES = {"pr_box": ("boxworld", 2), "hardy": ("quantum", 2)}
MEMORY_KINDS = ("gbit", "qubit", "bit")
POLICIES = ("copy", "swap-flip", "cnot")
QUERIES = ("find-contradiction", "closure-dump")
QUANTUM_BASES = ("Z", "X", "okfail")
QUANTUM_VALUES = {"Z": ("0", "1"), "X": ("0", "1"), "okfail": ("ok", "fail")}
SURDS = ("r2", "r3", "r6", "i")


# -- errors -------------------------------------------------------------------------

class DSLError(Exception):
    kind = "error"

    def __init__(self, message: str, line: int, col: int = 0, expected: Sequence[str] = ()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"line {line}, col {col}: {self.kind} error: {message}{detail}")


class LexError(DSLError):
    kind = "lexical"


class ParseError(DSLError):
    kind = "syntax"


class ResolveError(DSLError):
    """A name that does not refer to anything usable at that point."""

    kind = "reference"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int

    def __str__(self) -> str:
        return f"line {self.line}: {self.code}: {self.message}"


class ValidationError(DSLError):
    kind = "validation"

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = tuple(diagnostics)
        first = self.diagnostics[0]
        super().__init__(f"{first.code}: {first.message}", first.line)


# -- lexer --------------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # NAME, INT, SYM
    text: str
    line: int
    col: int


_TOKEN = re.compile(
    r"(?P<ws>[ \t]+)"
    r"|(?P<NAME>[A-Za-z_][A-Za-z0-9_\-]*~?)"
    r"|(?P<INT>\d+)"
    r"|(?P<SYM>~>|⊕|[=,@()+^:/*|\-])"
)


def tokenize_line(text: str, line: int) -> list[Token]:
    text = text.split("#", 1)[0].rstrip()
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise LexError(f"unexpected character {text[pos]!r}", line, pos + 1)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), line, pos + 1))
        pos = m.end()
    return tokens


def tokenize(source: str) -> list[list[Token]]:
    return [tokenize_line(text, n) for n, text in enumerate(source.splitlines(), start=1)]


# -- syntax tree -------------------------------------------------------------------------

@dataclass(frozen=True)
class AgentDecl:
    name: str
    time: int
    memory: str | None = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class StateDecl:
    subsystems: tuple[str, ...]
    kind: str  # builtin | state | ket
    builtin: str | None = None
    signature: tuple[tuple[int, int], ...] = ()
    entries: tuple[Fraction, ...] = ()
    ket_terms: tuple[tuple[str, str], ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SettingExpr:
    """``const`` alone, or ``ref op const`` (op is xor, written ``+``, ``^`` or ``⊕``)."""

    const: int | None = None
    ref: str | None = None

    def pretty(self) -> str:
        if self.ref is None:
            return str(self.const)
        if not self.const:
            return self.ref
        return f"{self.ref} + {self.const}"


@dataclass(frozen=True)
class Setting:
    variable: str | None
    expr: SettingExpr | None = None
    basis: str | None = None

    def pretty(self) -> str:
        if self.basis:
            return self.basis
        return f"{self.variable} = {self.expr.pretty()}"


@dataclass(frozen=True)
class Event:
    time: int
    agent: str
    target: str
    target_is_lab: bool
    setting: Setting
    outcome: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ModelDecl:
    outsider: str
    target: str
    policy: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class TrustDecl:
    trusted: tuple[str, int]
    truster: tuple[str, int]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SelectAtom:
    variable: str
    value: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Experiment:
    theory: str
    agents: tuple[AgentDecl, ...] = ()
    state: StateDecl | None = None
    events: tuple[Event, ...] = ()
    models: tuple[ModelDecl, ...] = ()
    trust: tuple[TrustDecl, ...] = ()
    select: tuple[SelectAtom, ...] = ()
    query: str = "find-contradiction"
    source_name: str = field(default="<string>", compare=False)

    def agent(self, name: str) -> AgentDecl:
        for a in self.agents:
            if a.name == name:
                return a
        raise KeyError(name)

    def event_of(self, agent: str) -> Event | None:
        return next((e for e in self.events if e.agent == agent), None)

    def setting_values(self) -> dict[str, int]:
        """Concrete value of every declared setting variable, evaluated in event order."""
        values: dict[str, int] = {}
        for e in self.events:
            s = e.setting
            if s.variable is None:
                continue
            if s.expr.ref is None:
                values[s.variable] = s.expr.const
            else:
                values[s.variable] = (values[s.expr.ref] + s.expr.const) % 2
        return values


# -- parser ---------------------------------------------------------------------------------

class _Cursor:
    def __init__(self, tokens: list[Token], line: int):
        self.tokens = tokens
        self.pos = 0
        self.line = line

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _fail(self, expected: Sequence[str], what: str = "") -> None:
        tok = self.peek()
        if tok is None:
            col = (self.tokens[-1].col + len(self.tokens[-1].text)) if self.tokens else 1
            raise ParseError(what or "unexpected end of line", self.line, col, expected)
        raise ParseError(what or f"unexpected {tok.text!r}", self.line, tok.col, expected)

    def name(self, expected: str = "identifier", choices: Sequence[str] | None = None) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != "NAME" or (choices is not None and tok.text not in choices):
            self._fail(choices or [expected])
        self.pos += 1
        return tok

    def keyword(self, word: str) -> Token:
        return self.name(word, [word])

    def int(self, expected: str = "integer") -> int:
        tok = self.peek()
        if tok is None or tok.kind != "INT":
            self._fail([expected])
        self.pos += 1
        return int(tok.text)

    def sym(self, text: str | Sequence[str]) -> Token:
        options = [text] if isinstance(text, str) else list(text)
        tok = self.peek()
        if tok is None or tok.kind != "SYM" or tok.text not in options:
            self._fail([f"'{o}'" for o in options])
        self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == kind and (text is None or tok.text == text)

    def end(self) -> None:
        if self.peek() is not None:
            self._fail(["end of line"])


def _parse_rational(cur: _Cursor) -> Fraction:
    num = cur.int("numerator")
    if not cur.at("SYM", "/"):
        return Fraction(num)
    cur.sym("/")
    den = cur.int("denominator")
    if den == 0:
        raise ParseError("zero denominator", cur.line, cur.tokens[cur.pos - 1].col)
    return Fraction(num, den)


def _parse_amplitude(cur: _Cursor) -> str:
    """Arithmetic over integers and the surds r2, r3, r6, i; returned as text."""
    start = cur.pos

    def factor():
        if cur.at("SYM", "-"):
            cur.sym("-")
            factor()
        elif cur.at("SYM", "("):
            cur.sym("(")
            expr()
            cur.sym(")")
        elif cur.at("INT"):
            cur.int()
        else:
            cur.name("surd", SURDS)

    def term():
        factor()
        while cur.at("SYM", "*") or cur.at("SYM", "/"):
            cur.sym(["*", "/"])
            factor()

    def expr():
        term()
        while cur.at("SYM", "+") or cur.at("SYM", "-"):
            cur.sym(["+", "-"])
            term()

    expr()
    parts = [t.text for t in cur.tokens[start : cur.pos]]
    return "".join(parts)


def _parse_state_line(cur: _Cursor, theory: str | None) -> StateDecl:
    names = [cur.name("subsystem name").text]
    while cur.at("SYM", ","):
        cur.sym(",")
        names.append(cur.name("subsystem name").text)
    cur.sym("=")
    head = cur.name("state", list(BUILTIN_STATES) + ["state", "ket"])
    if head.text in BUILTIN_STATES:
        cur.end()
        return StateDecl(tuple(names), "builtin", builtin=head.text, line=cur.line)
    if head.text == "state":
        sig = []
        while cur.at("SYM", "("):
            cur.sym("(")
            s = cur.int("number of settings")
            cur.sym(",")
            o = cur.int("number of outcomes")
            cur.sym(")")
            sig.append((s, o))
        if not sig:
            cur._fail(["'('"])
        cur.sym(":")
        entries = [_parse_rational(cur)]
        while cur.peek() is not None:
            if cur.at("SYM", "|"):
                cur.sym("|")
            entries.append(_parse_rational(cur))
        return StateDecl(tuple(names), "state", signature=tuple(sig), entries=tuple(entries), line=cur.line)
    terms = []
    while True:
        tok = cur.peek()
        if tok is None or tok.kind != "INT" or set(tok.text) - {"0", "1"}:
            cur._fail(["basis label of 0s and 1s"])
        cur.pos += 1
        cur.sym(":")
        terms.append((tok.text, _parse_amplitude(cur)))
        if cur.peek() is None:
            break
        cur.sym(",")
    return StateDecl(tuple(names), "ket", ket_terms=tuple(terms), line=cur.line)


def _parse_setting(cur: _Cursor, theory: str | None, known: dict[str, int]) -> Setting:
    if theory == "quantum":
        tok = cur.name("measurement basis", QUANTUM_BASES)
        return Setting(None, basis=tok.text)
    var = cur.name("setting variable").text
    cur.sym("=")
    if cur.at("INT"):
        return Setting(var, SettingExpr(const=cur.int()))
    ref_tok = cur.name("integer or setting variable")
    if ref_tok.text not in known:
        raise ResolveError(f"setting variable {ref_tok.text!r} is not defined by an earlier event",
                              cur.line, ref_tok.col)
    const = 0
    if cur.at("SYM"):
        cur.sym(["+", "^", "⊕"])
        const = cur.int()
    return Setting(var, SettingExpr(const=const, ref=ref_tok.text))


def parse(source: str, source_name: str = "<string>") -> Experiment:
    """Parse an experiment; raises :class:`LexError`, :class:`ParseError` or a reference error."""
    lines = tokenize(source)
    theory: str | None = None
    agents: list[AgentDecl] = []
    state: StateDecl | None = None
    events: list[Event] = []
    models: list[ModelDecl] = []
    trust: list[TrustDecl] = []
    select: list[SelectAtom] = []
    query = "find-contradiction"
    section: str | None = None
    seen: set[str] = set()
    settings_known: dict[str, int] = {}

    for number, tokens in enumerate(lines, start=1):
        if not tokens:
            continue
        cur = _Cursor(tokens, number)
        first = tokens[0]
        if first.kind == "NAME" and first.text in SECTIONS:
            cur.pos = 1
            if first.text in seen:
                raise ParseError(f"duplicate {first.text} block", number, first.col)
            seen.add(first.text)
            section = first.text
            if section == "THEORY":
                theory = cur.name("theory", THEORIES).text
                cur.end()
                section = None
            elif section == "QUERY":
                query = cur.name("query", QUERIES).text
                cur.end()
                section = None
            elif section == "SELECT":
                while cur.peek() is not None:
                    select.append(_parse_select(cur))
            else:
                cur.end()
            continue
        if section is None:
            raise ParseError(f"unexpected {first.text!r} outside a block", number, first.col, SECTIONS)
        if section == "AGENTS":
            name = cur.name("agent name").text
            cur.sym("@")
            time = cur.int("time index")
            memory = None
            if cur.peek() is not None:
                cur.keyword("memory")
                memory = cur.name("memory kind", MEMORY_KINDS).text
            cur.end()
            agents.append(AgentDecl(name, time, memory, number))
        elif section == "STATE":
            if state is not None:
                raise ParseError("only one initial state line is allowed", number, first.col)
            state = _parse_state_line(cur, theory)
        elif section == "EVENTS":
            t_tok = cur.keyword("t")
            cur.sym("=")
            time = cur.int("time")
            agent = cur.name("agent name").text
            cur.keyword("measures")
            if cur.at("NAME", "lab"):
                cur.keyword("lab")
                cur.sym("(")
                target = cur.name("agent name").text
                cur.sym(")")
                is_lab = True
            else:
                target = cur.name("subsystem name or lab(...)").text
                is_lab = False
            cur.keyword("setting")
            setting = _parse_setting(cur, theory, settings_known)
            cur.keyword("outcome")
            outcome = cur.name("outcome variable").text
            cur.end()
            if setting.variable:
                settings_known[setting.variable] = time
            events.append(Event(time, agent, target, is_lab, setting, outcome, number))
        elif section == "MODEL":
            outsider = cur.name("agent name").text
            cur.keyword("models")
            target = cur.name("agent name").text
            cur.keyword("update")
            policy = cur.name("policy", POLICIES).text
            cur.end()
            models.append(ModelDecl(outsider, target, policy, number))
        elif section == "TRUST":
            trusted = _parse_agent_ref(cur)
            cur.sym("~>")
            truster = _parse_agent_ref(cur)
            cur.end()
            trust.append(TrustDecl(trusted, truster, number))
        elif section == "SELECT":
            while cur.peek() is not None:
                select.append(_parse_select(cur))

    if theory is None:
        raise ParseError("missing THEORY line", max(len(lines), 1), 1, ["THEORY"])
    exp = Experiment(theory, tuple(agents), state, tuple(events), tuple(models), tuple(trust),
                     tuple(select), query, source_name)
    _resolve(exp)
    return exp


def _parse_agent_ref(cur: _Cursor) -> tuple[str, int]:
    name = cur.name("agent name").text
    cur.sym("@")
    return name, cur.int("time index")


def _parse_select(cur: _Cursor) -> SelectAtom:
    var = cur.name("outcome variable").text
    cur.sym("=")
    if cur.at("INT"):
        value = str(cur.int())
    else:
        value = cur.name("outcome value").text
    return SelectAtom(var, value, cur.line)


def _resolve(exp: Experiment) -> None:
    """Names that must refer to builtins of the declared theory."""
    st = exp.state
    if st is None:
        return
    if st.kind == "builtin":
        theory, arity = BUILTIN_STATES[st.builtin]
        if theory != exp.theory:
            raise ResolveError(f"builtin state {st.builtin!r} belongs to theory {theory}", st.line, 1)
        if arity != len(st.subsystems):
            raise ResolveError(f"builtin state {st.builtin!r} has {arity} subsystems", st.line, 1)
    elif st.kind == "ket" and exp.theory != "quantum":
        raise ResolveError("ket states need THEORY quantum", st.line, 1)
    elif st.kind == "state" and exp.theory != "boxworld":
        raise ResolveError("box-world state vectors need THEORY boxworld", st.line, 1)


# -- validation ---------------------------------------------------------------------------------

def validate(exp: Experiment) -> list[Diagnostic]:
    """Cross-checks; an empty list means the experiment is well formed."""
    diags: list[Diagnostic] = []

    def add(code, msg, line):
        diags.append(Diagnostic(code, msg, line))

    names: dict[str, AgentDecl] = {}
    for a in exp.agents:
        if a.name in names:
            add("E_DUP_AGENT", f"agent {a.name} declared twice", a.line)
        names[a.name] = a
        if a.memory == "qubit" and exp.theory != "quantum":
            add("E_MEMORY_KIND", "qubit memories need THEORY quantum", a.line)
        if a.memory in ("gbit", "bit") and exp.theory == "quantum":
            add("E_MEMORY_KIND", f"{a.memory} memories need THEORY boxworld", a.line)
    subsystems = list(exp.state.subsystems) if exp.state else []
    if exp.state is not None:
        st = exp.state
        if len(set(st.subsystems)) != len(st.subsystems):
            add("E_DUP_SUBSYSTEM", "subsystem names must be distinct", st.line)
        if st.kind == "state":
            if len(st.signature) != len(st.subsystems):
                add("E_STATE_SHAPE", "one (settings,outcomes) pair per subsystem", st.line)
            else:
                length = 1
                for s, o in st.signature:
                    length *= s * o
                if length != len(st.entries):
                    add("E_STATE_SHAPE", f"signature needs {length} entries, got {len(st.entries)}", st.line)
        if st.kind == "ket":
            for label, _ in st.ket_terms:
                if len(label) != len(st.subsystems):
                    add("E_STATE_SHAPE", f"basis label {label} needs {len(st.subsystems)} digits", st.line)

    last_time = None
    writers: dict[str, int] = {}
    measured: dict[str, int] = {}
    outcome_vars: dict[str, Event] = {}
    setting_vars: set[str] = set()
    for e in exp.events:
        if last_time is not None and e.time <= last_time:
            add("E_TIME_ORDER", f"event time {e.time} does not follow {last_time}", e.line)
        last_time = e.time
        agent = names.get(e.agent)
        if agent is None:
            add("E_UNDECLARED_AGENT", f"agent {e.agent} is not declared", e.line)
        elif agent.time != e.time:
            add("E_AGENT_TIME", f"agent {e.agent} is declared at time {agent.time}, acts at {e.time}", e.line)
        if e.agent in writers:
            add("E_MEM_REUSE", f"memory of {e.agent} already written at line {writers[e.agent]}", e.line)
        writers.setdefault(e.agent, e.line)
        if e.target_is_lab:
            target_agent = names.get(e.target)
            if target_agent is None:
                add("E_UNDECLARED_AGENT", f"lab({e.target}) refers to an undeclared agent", e.line)
            elif exp.event_of(e.target) is None or exp.event_of(e.target).time >= e.time:
                add("E_LAB_ORDER", f"lab({e.target}) is measured before {e.target} measured anything", e.line)
            elif target_agent.memory is None:
                add("E_NO_MEMORY", f"{e.target} has no memory to measure", e.line)
            key = f"lab({e.target})"
        else:
            if e.target not in subsystems:
                add("E_UNDECLARED_SUBSYSTEM", f"subsystem {e.target} is not declared in STATE", e.line)
            key = e.target
        if key in measured:
            add("E_BOX_REUSE", f"{key} was already measured at line {measured[key]}", e.line)
        measured.setdefault(key, e.line)
        if e.outcome in outcome_vars:
            add("E_DUP_VAR", f"outcome variable {e.outcome} reused", e.line)
        outcome_vars[e.outcome] = e
        s = e.setting
        if exp.theory == "boxworld":
            if s.basis is not None:
                add("E_THEORY_MISMATCH", "measurement bases need THEORY quantum", e.line)
            else:
                if s.variable in setting_vars:
                    add("E_DUP_VAR", f"setting variable {s.variable} reused", e.line)
                setting_vars.add(s.variable)
                if s.expr.ref is None and s.expr.const not in (0, 1):
                    add("E_SETTING_RANGE", f"setting {s.expr.const} outside 0..1", e.line)
                if s.expr.ref is not None and s.expr.const not in (0, 1):
                    add("E_SETTING_RANGE", f"offset {s.expr.const} outside 0..1", e.line)
            if exp.state is not None and exp.state.kind == "state" and not e.target_is_lab and e.target in subsystems:
                idx = subsystems.index(e.target)
                if idx < len(exp.state.signature) and s.expr is not None and s.expr.ref is None:
                    if s.expr.const >= exp.state.signature[idx][0]:
                        add("E_SETTING_RANGE", f"setting {s.expr.const} outside the subsystem's range", e.line)
        elif s.basis is None:
            add("E_THEORY_MISMATCH", "quantum events name a basis (Z, X or okfail)", e.line)
        elif s.basis == "okfail" and not e.target_is_lab:
            add("E_THEORY_MISMATCH", "okfail measurements act on a lab", e.line)

    modelled: set[str] = set()
    for m in exp.models:
        if m.outsider not in names or m.target not in names:
            add("E_UNDECLARED_AGENT", "MODEL refers to an undeclared agent", m.line)
            continue
        ev = exp.event_of(m.target)
        if ev is None or ev.target_is_lab:
            add("E_MODEL_TARGET", f"{m.target} does not measure a shared subsystem", m.line)
        outsider_ev = exp.event_of(m.outsider)
        if outsider_ev is None or not outsider_ev.target_is_lab or outsider_ev.target != m.target:
            add("E_MODEL_TARGET", f"{m.outsider} does not measure lab({m.target})", m.line)
        if (m.policy == "cnot") != (exp.theory == "quantum"):
            add("E_MODEL_POLICY", f"policy {m.policy} does not fit THEORY {exp.theory}", m.line)
        modelled.add(m.target)
    for e in exp.events:
        if e.target_is_lab and e.target in names and e.target not in modelled:
            add("E_MODEL_MISSING", f"no MODEL line says how lab({e.target}) is updated", e.line)

    for t in exp.trust:
        for name, time in (t.trusted, t.truster):
            decl = names.get(name)
            if decl is None or decl.time != time:
                add("E_TRUST_REF", f"{name}@{time} is not a declared agent", t.line)
        if t.trusted == t.truster:
            add("E_TRUST_REF", "an agent trusting itself is implicit", t.line)

    for sel in exp.select:
        ev = outcome_vars.get(sel.variable)
        if ev is None:
            add("E_SELECT_VAR", f"{sel.variable} is not an outcome variable", sel.line)
            continue
        if exp.theory == "quantum" and ev.setting.basis:
            allowed = QUANTUM_VALUES[ev.setting.basis]
        else:
            allowed = ("0", "1")
        if sel.value not in allowed:
            add("E_SELECT_VALUE", f"{sel.variable} takes values {', '.join(allowed)}", sel.line)

    if exp.events and exp.state is None:
        add("E_NO_STATE", "events need a STATE block", exp.events[0].line)
    return sorted(diags, key=lambda d: d.line)


def load(source: str, source_name: str = "<string>") -> Experiment:
    """Parse and validate; raises the first problem as a :class:`DSLError`."""
    exp = parse(source, source_name)
    diags = validate(exp)
    if diags:
        raise ValidationError(diags)
    return exp


def load_file(path) -> Experiment:
    from pathlib import Path

    p = Path(path)
    return load(p.read_text(encoding="utf-8"), str(p))


# -- pretty printer -------------------------------------------------------------------------------

def _fmt_fraction(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def pretty(exp: Experiment) -> str:
    """Canonical text; parsing it gives back an equal experiment."""
    out = [f"THEORY {exp.theory}"]
    if exp.agents:
        out.append("AGENTS")
        for a in exp.agents:
            mem = f" memory {a.memory}" if a.memory else ""
            out.append(f"  {a.name} @{a.time}{mem}")
    if exp.state is not None:
        st = exp.state
        out.append("STATE")
        lhs = ", ".join(st.subsystems)
        if st.kind == "builtin":
            rhs = st.builtin
        elif st.kind == "state":
            sig = "".join(f"({s},{o})" for s, o in st.signature)
            rhs = f"state {sig}: " + " ".join(_fmt_fraction(e) for e in st.entries)
        else:
            rhs = "ket " + ", ".join(f"{label}: {amp}" for label, amp in st.ket_terms)
        out.append(f"  {lhs} = {rhs}")
    out.append("EVENTS")
    for e in exp.events:
        target = f"lab({e.target})" if e.target_is_lab else e.target
        out.append(f"  t={e.time} {e.agent} measures {target} setting {e.setting.pretty()} outcome {e.outcome}")
    if exp.models:
        out.append("MODEL")
        for m in exp.models:
            out.append(f"  {m.outsider} models {m.target} update {m.policy}")
    if exp.trust:
        out.append("TRUST")
        for t in exp.trust:
            out.append(f"  {t.trusted[0]}@{t.trusted[1]} ~> {t.truster[0]}@{t.truster[1]}")
    if exp.select:
        out.append("SELECT " + " ".join(f"{s.variable}={s.value}" for s in exp.select))
    out.append(f"QUERY {exp.query}")
    return "\n".join(out) + "\n"


# -- fuzzing helpers ---------------------------------------------------------------------------------

def first_error_line(source: str) -> int | None:
    """Line of the first lexical, syntax, reference or validation problem, or None."""
    try:
        load(source)
    except DSLError as exc:
        return exc.line
    return None


def token_positions(source: str) -> Iterator[Token]:
    for tokens in tokenize(source):
        yield from tokens


def corrupt(source: str, token: Token, replacement: str) -> str:
    lines = source.splitlines()
    text = lines[token.line - 1]
    start = token.col - 1
    lines[token.line - 1] = text[:start] + replacement + text[start + len(token.text) :]
    return "\n".join(lines) + "\n"
