"""Memory updates as seen by an outside agent, effective boxes and supergluing.

An outsider describes a measurement as a transformation that correlates the
measured system with a fresh memory.  For gbits the transformation is
block-diagonal with a controlled-not block on matched settings, so the pair
(system, memory) compresses back to a single effective gbit carrying the same
statistics as the system had before.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .gpt.operations import (
    InvalidOperation,
    Transformation,
    apply,
    apply_deterministic,
    apply_local,
    marginal_at,
    tensor,
)
from .gpt.polytope import enumerate_ns_vertices, spanning_set
from .gpt.states import GBIT, DomainError, StateVector, SystemSignature, pure_gbit
from .gpt.wiring import BipartiteTransformation, Relabeling, compile_wiring, gbit_relabelings

POLICIES = ("copy", "swap-flip")

CN = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    dtype=object,
)


class NotMeasurementUpdated(DomainError):
    """A matched-setting entry with differing system and memory outcomes is nonzero."""


def _combine(a1: int, a2: int, k: int) -> int:
    # bitwise controlled-not on the binary digits when k is a power of two
    if k & (k - 1) == 0:
        return a1 ^ a2
    return (a1 + a2) % k


def memory_wiring(
    policy: str = "copy",
    memory_initial: str = "00",
    literal: bool = False,
    num_settings: int = 2,
    num_outcomes: int = 2,
) -> BipartiteTransformation:
    """Circuit correlating a system with its memory.

    The system is read at the setting asked of the output system and the memory
    at the setting asked of the output memory; the outputs are ``(a1, a2 xor a1)``
    with the memory's fixed initial answer removed first.  ``literal=True``
    always reads the memory at setting 0, which agrees with the default on
    inputs whose memory is the same pure state at every setting.
    """
    if policy not in POLICIES:
        raise DomainError(f"unknown policy {policy!r}; choose from {POLICIES}")
    if num_settings == 2 and num_outcomes == 2:
        pure_gbit(memory_initial)  # validates the label
        offsets = (int(memory_initial[0]), int(memory_initial[1]))
    else:
        offsets = (0,) * num_settings
    k = num_outcomes

    def f1(X, Y):
        return X

    def f2(X, Y, a1):
        return 0 if literal else Y

    def f3(X, Y, a1, a2):
        clean = _combine(a2, offsets[0 if literal else Y], k)
        copied = _combine(a1, clean, k)
        if X == Y or policy == "copy":
            return a1, copied
        # unmatched blocks under swap-flip: outputs exchanged, first flipped
        return (copied + 1) % k, a1

    return BipartiteTransformation(f1, f2, f3, name=f"memory-update[{policy}{', literal' if literal else ''}]")


@dataclass(frozen=True)
class MemoryUpdateMap:
    base: Transformation
    policy: str = "copy"
    memory_initial: str = "00"
    target: tuple[int, int] = (0, 1)

    @property
    def matrix(self) -> np.ndarray:
        return self.base.matrix

    def block(self, out_setting: int, in_setting: int) -> np.ndarray:
        size = self.base.input_signature.block_size
        m = self.matrix
        return m[out_setting * size : (out_setting + 1) * size, in_setting * size : (in_setting + 1) * size]

    def matched_blocks(self) -> list[np.ndarray]:
        sig = self.base.input_signature
        s_sys, s_mem = sig.settings
        return [self.block(x * s_mem + x, x * s_mem + x) for x in range(min(s_sys, s_mem))]

    def is_block_diagonal(self) -> bool:
        n = self.base.input_signature.num_blocks
        return all(
            not any(v != 0 for v in self.block(i, j).reshape(-1))
            for i in range(n)
            for j in range(n)
            if i != j
        )

    def pretty(self) -> str:
        """Matrix in block form, one block row per line group."""
        sig = self.base.input_signature
        size = sig.block_size
        lines = []
        m = self.matrix
        for r in range(m.shape[0]):
            cells = []
            for start in range(0, m.shape[1], size):
                cells.append(" ".join(str(v) for v in m[r, start : start + size]))
            lines.append(" | ".join(cells))
            if (r + 1) % size == 0 and r + 1 < m.shape[0]:
                lines.append("-" * len(lines[-1]))
        return "\n".join(lines)


def build_memory_update(
    memory_initial: str = "00",
    policy: str = "copy",
    literal: bool = False,
    num_settings: int = 2,
    num_outcomes: int = 2,
) -> MemoryUpdateMap:
    """The outsider's update on (system, memory); flagged superglued since the
    output is only guaranteed to be a valid single merged system."""
    sig = SystemSignature(((num_settings, num_outcomes), (num_settings, num_outcomes)))
    wiring = memory_wiring(policy, memory_initial, literal, num_settings, num_outcomes)
    return MemoryUpdateMap(compile_wiring(wiring, sig, superglued=True), policy, memory_initial)


def fresh_memory(memory_initial: str = "00") -> StateVector:
    return pure_gbit(memory_initial)


def update_system(state: StateVector, update: MemoryUpdateMap | None = None) -> StateVector:
    """Attach a fresh memory to a single gbit and apply the update."""
    update = update or build_memory_update()
    joint = tensor(state, fresh_memory(update.memory_initial))
    return apply_deterministic(update.base, joint)


# -- compression --------------------------------------------------------------------

@dataclass(frozen=True)
class EffectiveBoxView:
    parent: StateVector
    compressed: StateVector
    pairs: tuple[tuple[int, int], ...]


def compress_pairs(state: StateVector, pairs: Sequence[tuple[int, int]]) -> StateVector:
    """Merge each (system, memory) pair into one effective system.

    The effective setting ``i`` means both are read at ``i``; effective
    outcome ``j`` means both answered ``j``.  Pairs are listed by system index;
    the memory positions disappear and the rest keep their order.
    """
    sig = state.signature
    n = len(sig)
    pairs = [tuple(p) for p in pairs]
    memories = {m for _, m in pairs}
    partner = {s: m for s, m in pairs}
    for s, m in pairs:
        if sig.subsystems[s] != sig.subsystems[m]:
            raise DomainError(f"subsystems {s} and {m} have different signatures")
    kept = [i for i in range(n) if i not in memories]
    out_sig = sig.select(kept)

    def expand(x, a):
        full_x = [0] * n
        full_a = [0] * n
        for pos, xi, ai in zip(kept, x, a):
            full_x[pos] = xi
            full_a[pos] = ai
            if pos in partner:
                full_x[partner[pos]] = xi
                full_a[partner[pos]] = ai
        return full_x, full_a

    # every matched-setting entry must have system and memory outcomes equal
    for x in out_sig.setting_tuples():
        full_x, _ = expand(x, (0,) * len(kept))
        for a in sig.outcome_tuples():
            if any(a[s] != a[m] for s, m in pairs) and state[full_x, a] != 0:
                raise NotMeasurementUpdated(
                    f"not a measurement-updated state: entry settings={full_x} outcomes={list(a)} is {state[full_x, a]}"
                )
    return StateVector.from_function(out_sig, lambda x, a: state[expand(x, a)])


def compress(state: StateVector, pair: tuple[int, int] = (0, 1)) -> EffectiveBoxView:
    return EffectiveBoxView(state, compress_pairs(state, [pair]), (tuple(pair),))


# -- information preservation ---------------------------------------------------------

def lift_relabeling(relabel: Relabeling) -> BipartiteTransformation:
    """Apply the same relabeling to system and memory together."""
    return BipartiteTransformation(
        lambda X, Y: relabel.setting_map[X],
        lambda X, Y, a1: relabel.setting_map[Y],
        lambda X, Y, a1, a2: (relabel.outcome_maps[X][a1], relabel.outcome_maps[Y][a2]),
        name=f"lifted {relabel.describe()}",
    )


@dataclass(frozen=True)
class PreservationResult:
    ok: bool
    relabeling: str | None = None
    vertex: StateVector | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def check_information_preserving(
    update: MemoryUpdateMap, signature: SystemSignature | None = None
) -> PreservationResult:
    """Every single-gbit relabeling has an equivalent operation after the update."""
    signature = signature or GBIT + GBIT
    if signature != GBIT + GBIT:
        raise DomainError("information preservation is checked for one gbit plus a gbit memory")
    memory = fresh_memory(update.memory_initial)
    for relabel in gbit_relabelings():
        direct = compile_wiring(relabel, GBIT)
        lifted = compile_wiring(lift_relabeling(relabel), signature, superglued=True)
        for vertex in enumerate_ns_vertices(GBIT):
            expected = apply_deterministic(direct, vertex)
            try:
                updated = apply_deterministic(update.base, tensor(vertex, memory))
                after = apply_deterministic(lifted, updated)
                got = compress(after).compressed
            except (NotMeasurementUpdated, InvalidOperation) as exc:
                return PreservationResult(False, relabel.describe(), vertex, str(exc))
            if got != expected:
                return PreservationResult(
                    False, relabel.describe(), vertex, f"expected [{expected.pretty()}], got [{got.pretty()}]"
                )
    return PreservationResult(True)


def corrupt_update(update: MemoryUpdateMap, block: int = 0) -> MemoryUpdateMap:
    """Replace one matched diagonal block by the identity (mutation-test helper)."""
    m = np.array(update.matrix, dtype=object)
    sig = update.base.input_signature
    size = sig.block_size
    s_mem = sig.settings[1]
    idx = block * s_mem + block
    m[idx * size : (idx + 1) * size, idx * size : (idx + 1) * size] = np.eye(size, dtype=int).astype(object)
    base = Transformation.single(sig, sig, m, superglued=True)
    return MemoryUpdateMap(base, update.policy + "+corrupted", update.memory_initial, update.target)


# -- bipartite preservation -------------------------------------------------------------

@dataclass(frozen=True)
class BipartiteResult:
    ok: bool
    final: StateVector
    effective: StateVector

    def __bool__(self) -> bool:
        return self.ok


def bipartite_updated_state(
    initial: StateVector, update: MemoryUpdateMap | None = None, order: str = "bob-first"
) -> StateVector:
    """Layout ``[P, R, A, B]``: both halves of ``initial`` followed by the two memories."""
    update = update or build_memory_update()
    memory = fresh_memory(update.memory_initial)
    state = tensor(tensor(initial, memory), memory)
    steps = [(1, 3), (0, 2)] if order == "bob-first" else [(0, 2), (1, 3)]
    for positions in steps:
        (branch,) = apply_local(update.base, state, positions)
        state = branch.state
    return state


def bipartite_preservation_check(initial: StateVector, update: MemoryUpdateMap | None = None) -> BipartiteResult:
    """Update Bob's half then Alice's half with fresh memories; the compressed pairs
    must reproduce ``initial`` exactly."""
    final = bipartite_updated_state(initial, update)
    effective = compress_pairs(final, [(0, 2), (1, 3)])
    return BipartiteResult(effective == initial, final, effective)


# -- supergluing -----------------------------------------------------------------------------

@dataclass(frozen=True)
class SuperglueWitness:
    side: tuple[int, ...]
    settings: tuple[tuple[int, ...], tuple[int, ...]]
    marginals: tuple[StateVector, StateVector]

    def describe(self) -> str:
        return (
            f"subsystems {list(self.side)} at settings {list(self.settings[0])} leave the rest in "
            f"[{self.marginals[0].pretty()}], at {list(self.settings[1])} in [{self.marginals[1].pretty()}]"
        )


@dataclass(frozen=True)
class SuperglueReport:
    verdict: str
    witness: SuperglueWitness | None = None

    @property
    def superglued(self) -> bool:
        return self.verdict == "superglued"


def detect_superglue(state: StateVector, split: tuple[Sequence[int], Sequence[int]]) -> SuperglueReport:
    """``superglued`` iff one side of the bipartition signals to the other."""
    left, right = (tuple(side) for side in split)
    if sorted(left + right) != list(range(len(state.signature))):
        raise DomainError("split must partition the subsystems")
    for side, other in ((left, right), (right, left)):
        side_settings = list(state.signature.select(side).setting_tuples())
        first = marginal_at(state, other, side_settings[0])
        for alt in side_settings[1:]:
            m = marginal_at(state, other, alt)
            if m != first:
                return SuperglueReport("superglued", SuperglueWitness(side, (side_settings[0], alt), (first, m)))
    return SuperglueReport("separable-as-split")
