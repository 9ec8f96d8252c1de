"""Box-world state vectors with exact rational entries.

Entries are stored flat, settings-major: the joint setting tuple selects a
block, the joint outcome tuple selects the position inside the block, and in
both tuples subsystem 0 is the most significant digit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Iterable, Iterator, Sequence

import numpy as np

Rational = Fraction | int


class DomainError(ValueError):
    """A value lies outside the range an operation accepts."""


class SignallingError(ValueError):
    """A marginal or conditional was requested on a signalling state."""


def as_fraction(value: Rational | str) -> Fraction:
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted; pass a Fraction or a 'num/den' string")
    return Fraction(value)


@dataclass(frozen=True)
class SystemSignature:
    """Ordered list of ``(num_settings, num_outcomes)`` per subsystem."""

    subsystems: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        subsystems = tuple((int(s), int(o)) for s, o in self.subsystems)
        if not subsystems:
            raise DomainError("a signature needs at least one subsystem")
        for s, o in subsystems:
            if s < 1 or o < 1:
                raise DomainError(f"settings and outcomes must be >= 1, got ({s},{o})")
        object.__setattr__(self, "subsystems", subsystems)

    @classmethod
    def gbits(cls, n: int) -> "SystemSignature":
        return cls(((2, 2),) * n)

    def __len__(self) -> int:
        return len(self.subsystems)

    def __add__(self, other: "SystemSignature") -> "SystemSignature":
        return SystemSignature(self.subsystems + other.subsystems)

    def __str__(self) -> str:
        return "".join(f"({s},{o})" for s, o in self.subsystems)

    @property
    def settings(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.subsystems)

    @property
    def outcomes(self) -> tuple[int, ...]:
        return tuple(o for _, o in self.subsystems)

    @property
    def num_blocks(self) -> int:
        return prod(self.settings)

    @property
    def block_size(self) -> int:
        return prod(self.outcomes)

    @property
    def length(self) -> int:
        return self.num_blocks * self.block_size

    def select(self, indices: Iterable[int]) -> "SystemSignature":
        return SystemSignature(tuple(self.subsystems[i] for i in indices))

    def setting_tuples(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(s) for s in self.settings))

    def outcome_tuples(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(o) for o in self.outcomes))

    def index(self, settings: Sequence[int], outcomes: Sequence[int]) -> int:
        if len(settings) != len(self) or len(outcomes) != len(self):
            raise DomainError("setting/outcome tuples must have one entry per subsystem")
        block = 0
        for x, (s, _) in zip(settings, self.subsystems):
            if not 0 <= x < s:
                raise DomainError(f"setting {x} out of range {s}")
            block = block * s + x
        inner = 0
        for a, (_, o) in zip(outcomes, self.subsystems):
            if not 0 <= a < o:
                raise DomainError(f"outcome {a} out of range {o}")
            inner = inner * o + a
        return block * self.block_size + inner

    def shape(self) -> tuple[int, ...]:
        """Axis sizes for the reshaped entry array: settings axes then outcome axes."""
        return self.settings + self.outcomes


@dataclass(frozen=True, eq=False)
class StateVector:
    """Exact probability vector ``P(outcomes | settings)`` of a (possibly unnormalised) box."""

    signature: SystemSignature
    entries: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        entries = tuple(as_fraction(e) for e in self.entries)
        if len(entries) != self.signature.length:
            raise DomainError(
                f"signature {self.signature} needs {self.signature.length} entries, got {len(entries)}"
            )
        object.__setattr__(self, "entries", entries)

    # -- construction -----------------------------------------------------
    @classmethod
    def from_function(cls, signature: SystemSignature, fn) -> "StateVector":
        """Build from ``fn(settings, outcomes) -> probability``."""
        entries = [
            fn(x, a) for x in signature.setting_tuples() for a in signature.outcome_tuples()
        ]
        return cls(signature, tuple(entries))

    @classmethod
    def from_array(cls, signature: SystemSignature, array: np.ndarray) -> "StateVector":
        return cls(signature, tuple(np.asarray(array, dtype=object).reshape(-1)))

    # -- access -------------------------------------------------------------
    def __getitem__(self, key: tuple[Sequence[int], Sequence[int]]) -> Fraction:
        settings, outcomes = key
        return self.entries[self.signature.index(settings, outcomes)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.signature == other.signature and self.entries == other.entries

    def __hash__(self) -> int:
        return hash((self.signature, self.entries))

    def __repr__(self) -> str:
        return f"StateVector({self.signature}, {self.pretty()})"

    def pretty(self) -> str:
        size = self.signature.block_size
        blocks = [self.entries[i : i + size] for i in range(0, len(self.entries), size)]
        return " | ".join(" ".join(str(e) for e in block) for block in blocks)

    def array(self) -> np.ndarray:
        """Entries as an object array shaped ``settings + outcomes``."""
        return np.array(self.entries, dtype=object).reshape(self.signature.shape())

    def blocks(self) -> list[tuple[Fraction, ...]]:
        size = self.signature.block_size
        return [self.entries[i : i + size] for i in range(0, len(self.entries), size)]

    def block_sums(self) -> list[Fraction]:
        return [sum(block, Fraction(0)) for block in self.blocks()]

    def norm(self) -> Fraction:
        """Block norm; raises if blocks disagree."""
        sums = self.block_sums()
        if any(s != sums[0] for s in sums):
            raise DomainError(f"block norm depends on the setting: {[str(s) for s in sums]}")
        return sums[0]

    def has_constant_norm(self) -> bool:
        sums = self.block_sums()
        return all(s == sums[0] for s in sums)

    def in_unit_range(self) -> bool:
        return all(0 <= e <= 1 for e in self.entries)

    def scaled(self, factor: Rational) -> "StateVector":
        factor = Fraction(factor)
        return StateVector(self.signature, tuple(e * factor for e in self.entries))

    def is_product_of(self, split: int) -> bool:
        """True if the state factorises across subsystems ``[:split] | [split:]``."""
        from .operations import marginal_at, tensor

        left = tuple(range(split))
        right = tuple(range(split, len(self.signature)))
        try:
            lhs = marginal_at(self, left, (0,) * len(right), check=True)
            rhs = marginal_at(self, right, (0,) * len(left), check=True)
        except SignallingError:
            return False
        return tensor(lhs, rhs) == self


GBIT = SystemSignature(((2, 2),))
BIT = SystemSignature(((1, 2),))
QUBIT_FIDUCIAL = SystemSignature(((3, 2),))


def _check_probability(p: Rational, name: str) -> Fraction:
    value = as_fraction(p)
    if not 0 <= value <= 1:
        raise DomainError(f"{name}={value} is not a probability")
    return value


def make_gbit(p: Rational, q: Rational) -> StateVector:
    """The gbit ``(p, 1-p | q, 1-q)``: ``p = P(a=0|X=0)``, ``q = P(a=0|X=1)``."""
    p = _check_probability(p, "p")
    q = _check_probability(q, "q")
    return StateVector(GBIT, (p, 1 - p, q, 1 - q))


def pure_gbit(label: str) -> StateVector:
    """One of the deterministic gbits ``"00"``, ``"01"``, ``"10"``, ``"11"``.

    The label lists the outcome produced for setting 0 and setting 1.
    """
    if label not in {"00", "01", "10", "11"}:
        raise DomainError(f"unknown pure gbit {label!r}")
    return make_gbit(1 - int(label[0]), 1 - int(label[1]))


def make_pr_box() -> StateVector:
    """PR box: ``P(ab|XY) = 1/2`` when ``a xor b == X*Y``, else 0."""
    half = Fraction(1, 2)
    return StateVector.from_function(
        SystemSignature.gbits(2),
        lambda x, a: half if (a[0] ^ a[1]) == (x[0] & x[1]) else Fraction(0),
    )


def pr_box_variant(alpha: int, beta: int, gamma: int) -> StateVector:
    """PR box relabelled to ``a xor b == XY xor alpha X xor beta Y xor gamma``."""
    half = Fraction(1, 2)

    def entry(x, a):
        target = (x[0] & x[1]) ^ (alpha & x[0]) ^ (beta & x[1]) ^ gamma
        return half if (a[0] ^ a[1]) == target else Fraction(0)

    return StateVector.from_function(SystemSignature.gbits(2), entry)


def local_deterministic(outputs: Sequence[Sequence[int]]) -> StateVector:
    """Product of deterministic boxes; ``outputs[i][x]`` is party i's answer to setting x."""
    sig = SystemSignature(tuple((len(o), 2) for o in outputs))
    return StateVector.from_function(
        sig,
        lambda x, a: Fraction(int(all(outputs[i][x[i]] == a[i] for i in range(len(outputs))))),
    )


def uniform_state(signature: SystemSignature) -> StateVector:
    weight = Fraction(1, signature.block_size)
    return StateVector(signature, (weight,) * signature.length)
