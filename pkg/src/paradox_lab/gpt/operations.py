"""Composition, marginals, no-signalling checks and outcome-branching operations."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np

from .states import DomainError, SignallingError, StateVector, SystemSignature


def tensor(lhs: StateVector, rhs: StateVector) -> StateVector:
    """Product state; with settings-major ordering this is a Kronecker product of
    the (blocks x outcomes) matrices of the two factors."""
    sig = lhs.signature + rhs.signature
    left = np.array(lhs.entries, dtype=object).reshape(lhs.signature.num_blocks, lhs.signature.block_size)
    right = np.array(rhs.entries, dtype=object).reshape(rhs.signature.num_blocks, rhs.signature.block_size)
    return StateVector(sig, tuple(np.kron(left, right).reshape(-1)))


def tensor_all(states: Sequence[StateVector]) -> StateVector:
    result = states[0]
    for s in states[1:]:
        result = tensor(result, s)
    return result


# -- marginals & no-signalling ------------------------------------------------

def _sum_out(state: StateVector, drop: Sequence[int], drop_settings: Sequence[int]) -> np.ndarray:
    n = len(state.signature)
    arr = state.array()
    index: list = [slice(None)] * (2 * n)
    for pos, x in zip(drop, drop_settings):
        index[pos] = x
    arr = arr[tuple(index)]
    # after fixing dropped settings, outcome axes of dropped subsystems sit at
    # positions (n - len(drop)) + original position among outcomes
    kept_settings = n - len(drop)
    outcome_axes = [kept_settings + i for i in drop]
    if outcome_axes:
        arr = arr.sum(axis=tuple(outcome_axes))
    return arr


def marginal_at(
    state: StateVector,
    keep: Sequence[int],
    their_settings: Sequence[int] | None = None,
    check: bool = False,
) -> StateVector:
    """Reduced state on ``keep`` with discarded subsystems fixed at ``their_settings``.

    With ``check=True`` every other choice of discarded settings must give the
    same result, otherwise :class:`SignallingError` names the offending pair.
    """
    n = len(state.signature)
    keep = tuple(keep)
    drop = tuple(i for i in range(n) if i not in keep)
    if their_settings is None:
        their_settings = (0,) * len(drop)
    their_settings = tuple(their_settings)
    if len(their_settings) != len(drop):
        raise DomainError("need one setting per discarded subsystem")
    reference = _sum_out(state, drop, their_settings)
    if check and drop:
        for alt in state.signature.select(drop).setting_tuples():
            other = _sum_out(state, drop, alt)
            if not np.array_equal(other, reference):
                raise SignallingError(
                    f"marginal ill-defined: discarded subsystems {list(drop)} at settings "
                    f"{list(their_settings)} vs {list(alt)} give different reduced states"
                )
    # reorder kept axes to the order requested in `keep`
    kept_sorted = sorted(keep)
    perm = [kept_sorted.index(k) for k in keep]
    m = len(keep)
    reference = np.transpose(reference, perm + [m + p for p in perm]) if m else reference
    return StateVector.from_array(state.signature.select(keep), reference)


def marginal(state: StateVector, keep: Sequence[int], their_settings: Sequence[int] | None = None) -> StateVector:
    """Reduced state on ``keep``; refuses when the discarded part signals."""
    return marginal_at(state, keep, their_settings, check=True)


@dataclass(frozen=True)
class SignallingWitness:
    """Changing ``subsystem``'s setting from ``settings[0]`` to ``settings[1]`` (others fixed
    at ``co_settings``) changes the marginal of the remaining subsystems."""

    subsystem: int
    co_settings: tuple[int, ...]
    settings: tuple[int, int]
    marginals: tuple[StateVector, StateVector]

    def describe(self) -> str:
        return (
            f"subsystem {self.subsystem} signals: with others at {list(self.co_settings)}, "
            f"setting {self.settings[0]} -> [{self.marginals[0].pretty()}], "
            f"setting {self.settings[1]} -> [{self.marginals[1].pretty()}]"
        )


@dataclass(frozen=True)
class NoSignallingResult:
    ok: bool
    witness: SignallingWitness | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_no_signalling(state: StateVector) -> NoSignallingResult:
    """Check that summing out any subsystem's outcome gives a result independent of its setting."""
    sig = state.signature
    n = len(sig)
    arr = state.array()
    for i in range(n):
        others = tuple(j for j in range(n) if j != i)
        rest_sig = SystemSignature(tuple((1, sig.outcomes[j]) for j in others) or ((1, 1),))
        co_list = list(sig.select(others).setting_tuples()) if others else [()]
        for co in co_list:
            first = None
            for x in range(sig.settings[i]):
                full = list(co)
                full.insert(i, x)
                summed = np.asarray(arr[tuple(full)].sum(axis=i), dtype=object)
                if first is None:
                    first = (x, summed)
                elif not np.array_equal(summed, first[1]):
                    m0 = StateVector.from_array(rest_sig, first[1])
                    m1 = StateVector.from_array(rest_sig, summed)
                    return NoSignallingResult(False, SignallingWitness(i, tuple(co), (first[0], x), (m0, m1)))
    return NoSignallingResult(True)


# -- transformations ------------------------------------------------------------

def _freeze(matrix) -> np.ndarray:
    arr = np.array([[Fraction(v) for v in row] for row in np.asarray(matrix, dtype=object)], dtype=object)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Transformation:
    """Outcome-indexed family ``{M_i}`` of exact matrices acting on state vectors.

    ``superglued`` marks outputs that are valid only as a single merged system,
    so no-signalling across the output's subsystem split is not required.
    """

    input_signature: SystemSignature
    output_signature: SystemSignature
    branches: tuple[tuple[Hashable, np.ndarray], ...]
    superglued: bool = False

    def __post_init__(self) -> None:
        frozen = []
        for label, matrix in self.branches:
            m = _freeze(matrix)
            if m.shape != (self.output_signature.length, self.input_signature.length):
                raise DomainError(
                    f"branch {label!r} has shape {m.shape}, expected "
                    f"({self.output_signature.length}, {self.input_signature.length})"
                )
            frozen.append((label, m))
        if not frozen:
            raise DomainError("a transformation needs at least one branch")
        object.__setattr__(self, "branches", tuple(frozen))

    @classmethod
    def single(cls, input_signature, output_signature, matrix, superglued: bool = False) -> "Transformation":
        return cls(input_signature, output_signature, ((None, matrix),), superglued)

    @classmethod
    def identity(cls, signature: SystemSignature) -> "Transformation":
        n = signature.length
        eye = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        return cls.single(signature, signature, eye)

    @property
    def deterministic(self) -> bool:
        return len(self.branches) == 1

    @property
    def matrix(self) -> np.ndarray:
        if not self.deterministic:
            raise DomainError("transformation has several branches")
        return self.branches[0][1]

    def then(self, other: "Transformation") -> "Transformation":
        """Apply ``self`` first, then ``other``; branch labels pair up."""
        if self.output_signature != other.input_signature:
            raise DomainError("signatures do not compose")
        branches = []
        for la, ma in self.branches:
            for lb, mb in other.branches:
                label = lb if self.deterministic else (la if other.deterministic else (la, lb))
                branches.append((label, mb.dot(ma)))
        return Transformation(self.input_signature, other.output_signature, tuple(branches), other.superglued)


@dataclass(frozen=True)
class Branch:
    label: Hashable
    probability: Fraction
    state: StateVector | None


class InvalidOperation(ValueError):
    """A branch output has a setting-dependent norm on this input."""


def _apply_matrix(matrix: np.ndarray, signature: SystemSignature, state: StateVector) -> StateVector:
    vec = np.array(state.entries, dtype=object)
    return StateVector(signature, tuple(matrix.dot(vec)))


def apply(transformation: Transformation, state: StateVector) -> list[Branch]:
    """Run each branch; probability is the block norm of ``M_i . P``."""
    if state.signature != transformation.input_signature:
        raise DomainError(f"transformation expects {transformation.input_signature}, got {state.signature}")
    out = []
    for label, matrix in transformation.branches:
        raw = _apply_matrix(matrix, transformation.output_signature, state)
        if not raw.has_constant_norm():
            raise InvalidOperation(
                f"invalid operation on this state: branch {label!r} has block norms "
                f"{[str(s) for s in raw.block_sums()]}"
            )
        p = raw.norm()
        out.append(Branch(label, p, raw.scaled(1 / p) if p != 0 else None))
    return out


def apply_unnormalised(transformation: Transformation, state: StateVector) -> list[tuple[Hashable, StateVector]]:
    return [
        (label, _apply_matrix(m, transformation.output_signature, state))
        for label, m in transformation.branches
    ]


def apply_local(
    transformation: Transformation, state: StateVector, positions: Sequence[int]
) -> list[Branch]:
    """Apply ``transformation`` to the subsystems at ``positions``, identity elsewhere.

    When the output has as many subsystems as ``positions`` they are written
    back in place; otherwise the output subsystems are inserted at
    ``min(positions)``.
    """
    sig = state.signature
    n = len(sig)
    positions = tuple(positions)
    if sig.select(positions) != transformation.input_signature:
        raise DomainError(
            f"subsystems {positions} have signature {sig.select(positions)}, "
            f"transformation expects {transformation.input_signature}"
        )
    rest = tuple(i for i in range(n) if i not in positions)
    arr = state.array()
    order = list(positions) + [n + p for p in positions] + list(rest) + [n + r for r in rest]
    moved = np.transpose(arr, order)
    local_len = transformation.input_signature.length
    rest_sig = sig.select(rest) if rest else None
    rest_shape = rest_sig.shape() if rest_sig else ()
    flat = moved.reshape(local_len, -1)
    out_local = transformation.output_signature
    m_out = len(out_local)
    if m_out == len(positions):
        new_positions = positions
        kept_positions = rest
    else:
        anchor = min(positions)
        kept_positions = tuple(r if r < anchor else r + m_out - len(positions) for r in rest)
        new_positions = tuple(anchor + k for k in range(m_out))
    total = m_out + len(rest)
    new_subsystems: list = [None] * total
    for p, sub in zip(new_positions, out_local.subsystems):
        new_subsystems[p] = sub
    for p, r in zip(kept_positions, rest):
        new_subsystems[p] = sig.subsystems[r]
    new_sig = SystemSignature(tuple(new_subsystems))

    results = []
    for label, matrix in transformation.branches:
        new_flat = matrix.dot(flat)
        new_arr = new_flat.reshape(out_local.shape() + rest_shape)
        # current axis layout: [new settings, new outcomes, rest settings, rest outcomes]
        current = (
            [("s", p) for p in new_positions]
            + [("o", p) for p in new_positions]
            + [("s", p) for p in kept_positions]
            + [("o", p) for p in kept_positions]
        )
        target = [("s", p) for p in range(total)] + [("o", p) for p in range(total)]
        new_arr = np.transpose(new_arr, [current.index(t) for t in target])
        raw = StateVector.from_array(new_sig, new_arr)
        if not raw.has_constant_norm():
            raise InvalidOperation(
                f"invalid operation on this state: branch {label!r} has block norms "
                f"{[str(s) for s in raw.block_sums()]}"
            )
        p = raw.norm()
        results.append(Branch(label, p, raw.scaled(1 / p) if p != 0 else None))
    return results


def apply_deterministic(transformation: Transformation, state: StateVector, positions: Sequence[int] | None = None) -> StateVector:
    branches = apply(transformation, state) if positions is None else apply_local(transformation, state, positions)
    if len(branches) != 1 or branches[0].probability != 1:
        raise InvalidOperation("expected a single normalisation-preserving branch")
    return branches[0].state


# -- validity of operations --------------------------------------------------

@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    condition: str | None = None
    vertex_index: int | None = None
    branch: Hashable = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate_operation(transformation: Transformation, vertices: Sequence[StateVector]) -> ValidationResult:
    """Check the three validity conditions on every vertex.

    op1: each branch has a setting-independent norm in [0, 1];
    op2: branch norms sum to 1;
    op3: each renormalised output has entries in [0, 1], constant block norm and,
    unless the transformation is flagged superglued, is no-signalling.
    """
    for k, vertex in enumerate(vertices):
        outputs = apply_unnormalised(transformation, vertex)
        total = Fraction(0)
        for label, raw in outputs:
            if not raw.has_constant_norm():
                return ValidationResult(False, "op1", k, label, "block norm depends on the setting")
            p = raw.norm()
            if not 0 <= p <= 1:
                return ValidationResult(False, "op1", k, label, f"norm {p} outside [0, 1]")
            total += p
        if total != 1:
            return ValidationResult(False, "op2", k, None, f"branch norms sum to {total}")
        for label, raw in outputs:
            p = raw.norm()
            if p == 0:
                continue
            post = raw.scaled(1 / p)
            if not post.in_unit_range():
                return ValidationResult(False, "op3", k, label, "entry outside [0, 1]")
            if not transformation.superglued:
                ns = is_no_signalling(post)
                if not ns:
                    return ValidationResult(False, "op3", k, label, ns.witness.describe())
    return ValidationResult(True)


# -- conditioning ----------------------------------------------------------------

def conditional_box(
    state: StateVector, measured: int, setting: int, outcome: int
) -> tuple[Fraction, StateVector]:
    """What an agent who saw ``outcome`` at ``setting`` on ``measured`` ascribes to the rest."""
    n = len(state.signature)
    if n < 2:
        raise DomainError("conditioning needs at least two subsystems")
    rest = tuple(i for i in range(n) if i != measured)
    local = marginal(state, (measured,))
    prob = local[(setting,), (outcome,)]
    if prob == 0:
        raise DomainError(
            f"cannot condition on outcome {outcome} of setting {setting} on subsystem {measured}: probability 0"
        )
    rest_sig = state.signature.select(rest)

    def entry(x, a):
        xs = list(x)
        xs.insert(measured, setting)
        os = list(a)
        os.insert(measured, outcome)
        return state[xs, os] / prob

    return prob, StateVector.from_function(rest_sig, entry)
