"""Canonical one-line text form of a state vector.

``state (2,2)(2,2): 1/2 0/1 0/1 1/2 | ...`` lists the signature and then each
block in settings-major order, every rational written as ``num/den``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .states import DomainError, StateVector, SystemSignature

_HEADER = re.compile(r"^state\s+((?:\(\d+,\d+\))+)\s*:\s*(.*)$")
_PAIR = re.compile(r"\((\d+),(\d+)\)")
_RATIONAL = re.compile(r"^(-?\d+)/(\d+)$")


def _fmt(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def dump_state(state: StateVector) -> str:
    blocks = " | ".join(" ".join(_fmt(e) for e in block) for block in state.blocks())
    return f"state {state.signature}: {blocks}"


def load_state(text: str) -> StateVector:
    match = _HEADER.match(text.strip())
    if not match:
        raise DomainError(f"not a serialized state: {text!r}")
    sig = SystemSignature(tuple((int(s), int(o)) for s, o in _PAIR.findall(match.group(1))))
    blocks = [b.split() for b in match.group(2).split("|")]
    if len(blocks) != sig.num_blocks or any(len(b) != sig.block_size for b in blocks):
        raise DomainError(f"block layout does not match signature {sig}")
    entries = []
    for token in (t for b in blocks for t in b):
        m = _RATIONAL.match(token)
        if not m:
            raise DomainError(f"bad rational {token!r}")
        entries.append(Fraction(int(m.group(1)), int(m.group(2))))
    return StateVector(sig, tuple(entries))
