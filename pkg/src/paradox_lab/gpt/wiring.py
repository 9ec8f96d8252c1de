"""Classical wirings and their compilation to exact transformation matrices.

A wiring is a classical circuit that picks fiducial settings on input boxes
(possibly depending on earlier outcomes) and post-processes the outcomes.
Compilation traces the circuit over every (setting, outcome) pair; because
inputs are no-signalling, querying subsystems one after another gives the same
statistics as reading the joint entry, which is what the matrix does.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Sequence

import numpy as np

from .operations import Transformation, marginal_at
from .states import GBIT, DomainError, StateVector, SystemSignature


class WiringError(ValueError):
    """Structurally malformed wiring."""


@dataclass(frozen=True)
class Relabeling:
    """Single-system relabeling: external setting ``x`` reads fiducial ``setting_map[x]``
    and reports ``outcome_maps[x][a]``."""

    setting_map: tuple[int, ...]
    outcome_maps: tuple[tuple[int, ...], ...]
    name: str = ""

    def describe(self) -> str:
        return self.name or f"relabel(settings={list(self.setting_map)}, outcomes={[list(m) for m in self.outcome_maps]})"


@dataclass(frozen=True)
class BipartiteMeasurement:
    """Measure the first subsystem at ``first_setting``, the second at ``f(a')``, report ``g(a', b')``."""

    first_setting: int
    f: Callable[[int], int]
    g: Callable[[int, int], int]
    num_outcomes: int = 2
    name: str = ""


@dataclass(frozen=True)
class BipartiteTransformation:
    """Two-system to two-system circuit.

    The first input is read at ``f1(X, Y)``, the second at ``f2(X, Y, a')``, and
    the output pair is ``f3(X, Y, a', b')``; ``(X, Y)`` are the settings asked
    of the output systems.
    """

    f1: Callable[[int, int], int]
    f2: Callable[[int, int, int], int]
    f3: Callable[[int, int, int, int], tuple[int, int]]
    name: str = ""


@dataclass(frozen=True)
class Mixture:
    parts: tuple[tuple[Fraction, object], ...]
    name: str = ""

    def __post_init__(self) -> None:
        weights = [Fraction(w) for w, _ in self.parts]
        if any(w < 0 for w in weights) or sum(weights) != 1:
            raise WiringError("mixture weights must be nonnegative and sum to 1")


Wiring = Relabeling | BipartiteMeasurement | BipartiteTransformation | Mixture


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise WiringError(msg)


def _compile_relabeling(w: Relabeling, sig: SystemSignature) -> Transformation:
    _check(len(sig) == 1, "a relabeling acts on a single system")
    (s, o), = sig.subsystems
    _check(len(w.setting_map) == s and len(w.outcome_maps) == s, "relabeling needs one entry per setting")
    m = np.full((sig.length, sig.length), Fraction(0), dtype=object)
    for x in range(s):
        y = w.setting_map[x]
        _check(0 <= y < s, f"setting {y} out of range")
        _check(len(w.outcome_maps[x]) == o, "outcome map needs one entry per outcome")
        for a in range(o):
            out = w.outcome_maps[x][a]
            _check(0 <= out < o, f"outcome {out} out of range")
            m[sig.index((x,), (out,)), sig.index((y,), (a,))] += 1
    return Transformation.single(sig, sig, m)


def _compile_measurement(w: BipartiteMeasurement, sig: SystemSignature) -> Transformation:
    _check(len(sig) == 2, "a bipartite measurement acts on two systems")
    (s1, o1), (s2, o2) = sig.subsystems
    _check(0 <= w.first_setting < s1, "first setting out of range")
    out_sig = SystemSignature(((1, 1),))
    mats = {k: np.full((1, sig.length), Fraction(0), dtype=object) for k in range(w.num_outcomes)}
    for a1 in range(o1):
        y = w.f(a1)
        _check(0 <= y < s2, f"second setting {y} out of range")
        for a2 in range(o2):
            k = w.g(a1, a2)
            _check(k in mats, f"final outcome {k} out of range")
            mats[k][0, sig.index((w.first_setting, y), (a1, a2))] += 1
    return Transformation(sig, out_sig, tuple(mats.items()))


def _compile_bipartite(w: BipartiteTransformation, sig: SystemSignature) -> Transformation:
    _check(len(sig) == 2, "a bipartite transformation acts on two systems")
    (s1, o1), (s2, o2) = sig.subsystems
    m = np.full((sig.length, sig.length), Fraction(0), dtype=object)
    for X, Y in itertools.product(range(s1), range(s2)):
        x1 = w.f1(X, Y)
        _check(0 <= x1 < s1, f"first setting {x1} out of range")
        for a1 in range(o1):
            x2 = w.f2(X, Y, a1)
            _check(0 <= x2 < s2, f"second setting {x2} out of range")
            for a2 in range(o2):
                out = tuple(w.f3(X, Y, a1, a2))
                _check(0 <= out[0] < o1 and 0 <= out[1] < o2, f"output {out} out of range")
                m[sig.index((X, Y), out), sig.index((x1, x2), (a1, a2))] += 1
    return Transformation.single(sig, sig, m)


def compile_wiring(wiring: Wiring, signature: SystemSignature, superglued: bool = False) -> Transformation:
    """Matrix form of ``wiring`` on ``signature``."""
    if isinstance(wiring, Relabeling):
        t = _compile_relabeling(wiring, signature)
    elif isinstance(wiring, BipartiteMeasurement):
        t = _compile_measurement(wiring, signature)
    elif isinstance(wiring, BipartiteTransformation):
        t = _compile_bipartite(wiring, signature)
    elif isinstance(wiring, Mixture):
        compiled = [(Fraction(w), compile_wiring(part, signature)) for w, part in wiring.parts]
        first = compiled[0][1]
        labels = [label for label, _ in first.branches]
        for _, t in compiled:
            _check(t.output_signature == first.output_signature, "mixture parts disagree on output")
            _check([label for label, _ in t.branches] == labels, "mixture parts disagree on branches")
        branches = []
        for i, label in enumerate(labels):
            total = sum((w * t.branches[i][1] for w, t in compiled[1:]), compiled[0][0] * compiled[0][1].branches[i][1])
            branches.append((label, total))
        t = Transformation(signature, first.output_signature, tuple(branches))
    else:
        raise WiringError(f"unknown wiring {wiring!r}")
    if superglued:
        t = Transformation(t.input_signature, t.output_signature, t.branches, True)
    return t


# -- direct circuit simulation (independent oracle) ------------------------

def _sequential(state: StateVector, x1: int, choose_second, emit) -> dict:
    """Query subsystem 0 then subsystem 1 using marginal and conditional probabilities."""
    first = marginal_at(state, (0,), (0,), check=True)
    out: dict = {}
    (s1, o1), (s2, o2) = state.signature.subsystems
    for a1 in range(o1):
        p1 = first[(x1,), (a1,)]
        if p1 == 0:
            continue
        x2 = choose_second(a1)
        for a2 in range(o2):
            joint = state[(x1, x2), (a1, a2)]
            if joint == 0:
                continue
            # conditional P(a2 | a1) times P(a1) is the joint entry
            key = emit(a1, a2)
            out[key] = out.get(key, Fraction(0)) + p1 * (joint / p1)
    return out


def simulate_wiring(wiring: Wiring, state: StateVector) -> StateVector | dict:
    """Run ``wiring`` on ``state`` by stepping through the circuit.

    Returns the output state for transformations and ``{outcome: probability}``
    for measurements.
    """
    sig = state.signature
    if isinstance(wiring, Relabeling):
        def entry(x, a):
            y = wiring.setting_map[x[0]]
            return sum(
                (state[(y,), (b,)] for b in range(sig.outcomes[0]) if wiring.outcome_maps[x[0]][b] == a[0]),
                Fraction(0),
            )
        return StateVector.from_function(sig, entry)
    if isinstance(wiring, BipartiteMeasurement):
        dist = _sequential(state, wiring.first_setting, wiring.f, wiring.g)
        return {k: dist.get(k, Fraction(0)) for k in range(wiring.num_outcomes)}
    if isinstance(wiring, BipartiteTransformation):
        table = {}
        for X, Y in sig.setting_tuples():
            table[(X, Y)] = _sequential(
                state, wiring.f1(X, Y), lambda a1, X=X, Y=Y: wiring.f2(X, Y, a1),
                lambda a1, a2, X=X, Y=Y: tuple(wiring.f3(X, Y, a1, a2)),
            )
        return StateVector.from_function(sig, lambda x, a: table[tuple(x)].get(tuple(a), Fraction(0)))
    if isinstance(wiring, Mixture):
        results = [(Fraction(w), simulate_wiring(part, state)) for w, part in wiring.parts]
        if isinstance(results[0][1], dict):
            keys = results[0][1].keys()
            return {k: sum(w * r[k] for w, r in results) for k in keys}
        entries = [sum(w * r.entries[i] for w, r in results) for i in range(sig.length)]
        return StateVector(sig, tuple(entries))
    raise WiringError(f"unknown wiring {wiring!r}")


# -- catalogue ----------------------------------------------------------------

def gbit_relabelings() -> list[Relabeling]:
    """The 8 deterministic single-gbit relabelings: optional setting swap, then
    an optional outcome flip per setting."""
    result = []
    for swap in (0, 1):
        for f0 in (0, 1):
            for f1 in (0, 1):
                smap = (1, 0) if swap else (0, 1)
                omap = ((f0, 1 - f0), (f1, 1 - f1))
                name = f"{'swap' if swap else 'keep'}-flip{f0}{f1}"
                result.append(Relabeling(smap, omap, name))
    return result


def identity_relabeling(num_settings: int = 2, num_outcomes: int = 2) -> Relabeling:
    return Relabeling(tuple(range(num_settings)), tuple(tuple(range(num_outcomes)) for _ in range(num_settings)), "identity")


def setting_swap() -> Relabeling:
    return Relabeling((1, 0), ((0, 1), (0, 1)), "swap")
