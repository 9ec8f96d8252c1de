"""Exact statevector simulation of a few qubits.

Amplitudes are sympy expressions; every state used here lives in
Q(sqrt 2, sqrt 3, i), so ``expand`` puts them in a canonical form and
zero tests are exact.  Qubit 0 is the most significant bit of a basis index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import sympy

from .gpt.states import BIT, QUBIT_FIDUCIAL, StateVector, SystemSignature

MAX_QUBITS = 4


class QuantumError(ValueError):
    pass


def _num(value) -> sympy.Expr:
    if isinstance(value, float):
        raise TypeError("pass exact values (int, Fraction, sympy expression or string)")
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    if isinstance(value, str):
        return sympy.sympify(value, locals={"r2": sympy.sqrt(2), "r3": sympy.sqrt(3), "r6": sympy.sqrt(6)})
    return sympy.sympify(value)


def _canon(value) -> sympy.Expr:
    return sympy.expand(sympy.radsimp(sympy.expand(value)))


def is_zero(value) -> bool:
    return _canon(value) == 0


def abs2(value) -> sympy.Expr:
    return _canon(value * sympy.conjugate(value))


def to_fraction(value) -> Fraction:
    value = sympy.nsimplify(_canon(value))
    if not value.is_Rational:
        raise QuantumError(f"{value} is not rational")
    return Fraction(int(value.p), int(value.q))


@dataclass(frozen=True)
class Ket:
    num_qubits: int
    amplitudes: tuple

    def __post_init__(self) -> None:
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise QuantumError(f"between 1 and {MAX_QUBITS} qubits supported, got {self.num_qubits}")
        amps = tuple(_canon(_num(a)) for a in self.amplitudes)
        if len(amps) != 2**self.num_qubits:
            raise QuantumError(f"{self.num_qubits} qubits need {2**self.num_qubits} amplitudes")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, bits: str) -> "Ket":
        n = len(bits)
        amps = [0] * 2**n
        amps[int(bits, 2)] = 1
        return cls(n, tuple(amps))

    @classmethod
    def from_terms(cls, terms: dict[str, object]) -> "Ket":
        n = len(next(iter(terms)))
        amps = [0] * 2**n
        for bits, amp in terms.items():
            amps[int(bits, 2)] = _num(amp)
        return cls(n, tuple(amps))

    def amplitude(self, bits: str) -> sympy.Expr:
        return self.amplitudes[int(bits, 2)]

    def norm2(self) -> sympy.Expr:
        return _canon(sum(abs2(a) for a in self.amplitudes))

    def is_normalised(self) -> bool:
        return is_zero(self.norm2() - 1)

    def tensor(self, other: "Ket") -> "Ket":
        return Ket(
            self.num_qubits + other.num_qubits,
            tuple(a * b for a in self.amplitudes for b in other.amplitudes),
        )

    def terms(self) -> dict[str, sympy.Expr]:
        return {
            format(i, f"0{self.num_qubits}b"): a for i, a in enumerate(self.amplitudes) if not is_zero(a)
        }

    def pretty(self) -> str:
        parts = [f"({sympy.sstr(a)})|{bits}>" for bits, a in self.terms().items()]
        return " + ".join(parts) if parts else "0"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ket):
            return NotImplemented
        return self.num_qubits == other.num_qubits and all(
            is_zero(a - b) for a, b in zip(self.amplitudes, other.amplitudes)
        )

    def __hash__(self) -> int:
        return hash((self.num_qubits, self.amplitudes))


def _bit(index: int, qubit: int, n: int) -> int:
    return (index >> (n - 1 - qubit)) & 1


def apply_gate(ket: Ket, matrix: Sequence[Sequence], qubits: Sequence[int]) -> Ket:
    """Apply a ``2^k x 2^k`` matrix to ``qubits`` (first listed is most significant)."""
    n = ket.num_qubits
    k = len(qubits)
    mat = [[_num(v) for v in row] for row in matrix]
    out = [sympy.Integer(0)] * 2**n
    for index, amp in enumerate(ket.amplitudes):
        if amp == 0:
            continue
        local = 0
        for q in qubits:
            local = (local << 1) | _bit(index, q, n)
        for new_local in range(2**k):
            coeff = mat[new_local][local]
            if coeff == 0:
                continue
            new_index = index
            for pos, q in enumerate(qubits):
                bit = (new_local >> (k - 1 - pos)) & 1
                shift = n - 1 - q
                new_index = (new_index & ~(1 << shift)) | (bit << shift)
            out[new_index] += coeff * amp
    return Ket(n, tuple(out))


SQRT2 = sympy.sqrt(2)
HADAMARD = [[1 / SQRT2, 1 / SQRT2], [1 / SQRT2, -1 / SQRT2]]
CNOT = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]


def hardy_state() -> Ket:
    """``(|00> + |10> + |11>) / sqrt 3`` on the two shared qubits."""
    c = 1 / sympy.sqrt(3)
    return Ket.from_terms({"00": c, "01": 0, "10": c, "11": c})


def cnot_memory(ket: Ket, system: int, memory: int) -> Ket:
    """Coherently copy the computational-basis value of ``system`` onto a cleared ``memory``."""
    n = ket.num_qubits
    for index, amp in enumerate(ket.amplitudes):
        if _bit(index, memory, n) and not is_zero(amp):
            raise QuantumError(f"memory qubit {memory} is not in |0>")
    return apply_gate(ket, CNOT, (system, memory))


# -- measurements ----------------------------------------------------------------

OK = "ok"
FAIL = "fail"


def ok_vector() -> Ket:
    return Ket.from_terms({"00": 1 / SQRT2, "11": -1 / SQRT2})


def fail_vector() -> Ket:
    return Ket.from_terms({"00": 1 / SQRT2, "11": 1 / SQRT2})


def _project_pair(ket: Ket, pair: Sequence[int], vector: Ket) -> Ket:
    """``(|v><v| on pair) ket``."""
    v = vector.amplitudes
    proj = [[_canon(v[i] * sympy.conjugate(v[j])) for j in range(4)] for i in range(4)]
    return apply_gate(ket, proj, pair)


@dataclass(frozen=True)
class Outcome:
    label: object
    probability: sympy.Expr
    post_state: Ket | None


def _normalise(unnorm: Ket) -> tuple[sympy.Expr, Ket | None]:
    p = unnorm.norm2()
    if is_zero(p):
        return sympy.Integer(0), None
    scale = 1 / sympy.sqrt(p)
    return p, Ket(unnorm.num_qubits, tuple(a * scale for a in unnorm.amplitudes))


def okfail_measure(ket: Ket, pair: Sequence[int]) -> dict[str, Outcome]:
    """Two-outcome measurement ``{|ok><ok|, 1 - |ok><ok|}`` on ``pair``."""
    ok_part = _project_pair(ket, pair, ok_vector())
    fail_part = Ket(ket.num_qubits, tuple(a - b for a, b in zip(ket.amplitudes, ok_part.amplitudes)))
    result = {}
    for label, part in ((OK, ok_part), (FAIL, fail_part)):
        p, post = _normalise(part)
        result[label] = Outcome(label, p, post)
    return result


def z_measure(ket: Ket, qubit: int) -> dict[int, Outcome]:
    n = ket.num_qubits
    result = {}
    for value in (0, 1):
        part = Ket(n, tuple(a if _bit(i, qubit, n) == value else 0 for i, a in enumerate(ket.amplitudes)))
        p, post = _normalise(part)
        result[value] = Outcome(value, p, post)
    return result


def measure(ket: Ket, spec: tuple) -> dict:
    """``("Z", q)`` or ``("okfail", (q1, q2))``."""
    kind, where = spec
    if kind == "Z":
        return z_measure(ket, where)
    if kind == "okfail":
        return okfail_measure(ket, where)
    raise QuantumError(f"unknown measurement {kind!r}")


def joint_distribution(ket: Ket, specs: Sequence[tuple]) -> dict[tuple, sympy.Expr]:
    """Exact joint probabilities for measurements on disjoint qubits, performed in order."""
    used: list[int] = []
    for _, where in specs:
        qs = [where] if isinstance(where, int) else list(where)
        if set(qs) & set(used):
            raise QuantumError("joint distribution needs measurements on disjoint qubits")
        used.extend(qs)
    table: dict[tuple, sympy.Expr] = {}

    def walk(state: Ket | None, prob, idx: int, labels: tuple) -> None:
        if idx == len(specs):
            table[labels] = _canon(prob)
            return
        for label, outcome in measure(state, specs[idx]).items():
            if outcome.post_state is None:
                for rest in itertools.product(*(_labels(s) for s in specs[idx + 1 :])):
                    table[labels + (label,) + rest] = sympy.Integer(0)
                continue
            walk(outcome.post_state, prob * outcome.probability, idx + 1, labels + (label,))

    walk(ket, sympy.Integer(1), 0, ())
    return table


def _labels(spec: tuple) -> tuple:
    return (0, 1) if spec[0] == "Z" else (OK, FAIL)


# -- the prepare-and-measure experiment --------------------------------------------------

FR_QUBITS = {"P": 0, "R": 1, "A": 2, "B": 3}
FR_MEASUREMENTS = {
    "a": ("Z", FR_QUBITS["A"]),
    "b": ("Z", FR_QUBITS["B"]),
    "u": ("okfail", (FR_QUBITS["A"], FR_QUBITS["P"])),
    "w": ("okfail", (FR_QUBITS["B"], FR_QUBITS["R"])),
}


def fr_final_state() -> Ket:
    """Hardy state on (P, R), memories A and B cleared, then both copied."""
    ket = hardy_state().tensor(Ket.basis("00"))
    ket = cnot_memory(ket, FR_QUBITS["P"], FR_QUBITS["A"])
    return cnot_memory(ket, FR_QUBITS["R"], FR_QUBITS["B"])


def fr_pair_table(first: str, second: str, ket: Ket | None = None) -> dict[tuple, sympy.Expr]:
    ket = ket or fr_final_state()
    return joint_distribution(ket, [FR_MEASUREMENTS[first], FR_MEASUREMENTS[second]])


def support_table(table: dict[tuple, sympy.Expr]) -> dict[tuple, bool]:
    return {k: not is_zero(v) for k, v in table.items()}


def table_to_box(table: dict[tuple, sympy.Expr], labels: Sequence[Sequence]) -> StateVector:
    """Two-party single-setting box with outcome indices following ``labels``."""
    sig = SystemSignature(((1, len(labels[0])), (1, len(labels[1]))))
    return StateVector.from_function(
        sig, lambda x, a: to_fraction(table[(labels[0][a[0]], labels[1][a[1]])])
    )


# -- qubits as boxes ----------------------------------------------------------------------

PAULI = {
    "X": [[0, 1], [1, 0]],
    "Y": [[0, -sympy.I], [sympy.I, 0]],
    "Z": [[1, 0], [0, -1]],
}


def reduced_density(ket: Ket, qubit: int) -> list[list[sympy.Expr]]:
    n = ket.num_qubits
    rho = [[sympy.Integer(0)] * 2 for _ in range(2)]
    for i, ai in enumerate(ket.amplitudes):
        for j, aj in enumerate(ket.amplitudes):
            rest_i = i & ~(1 << (n - 1 - qubit))
            rest_j = j & ~(1 << (n - 1 - qubit))
            if rest_i == rest_j:
                rho[_bit(i, qubit, n)][_bit(j, qubit, n)] += ai * sympy.conjugate(aj)
    return [[_canon(v) for v in row] for row in rho]


@dataclass(frozen=True)
class QubitFiducial:
    """Outcome probabilities of the X, Y and Z measurements, in that order."""

    entries: tuple

    def blocks(self) -> list[tuple]:
        return [self.entries[0:2], self.entries[2:4], self.entries[4:6]]

    def is_rational(self) -> bool:
        return all(sympy.nsimplify(e).is_Rational for e in self.entries)

    def to_state_vector(self) -> StateVector:
        return StateVector(QUBIT_FIDUCIAL, tuple(to_fraction(e) for e in self.entries))

    def pretty(self) -> str:
        return " | ".join(" ".join(sympy.sstr(e) for e in block) for block in self.blocks())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QubitFiducial):
            return NotImplemented
        return all(is_zero(a - b) for a, b in zip(self.entries, other.entries))

    def __hash__(self) -> int:
        return hash(self.entries)


def qubit_to_fiducial(ket: Ket, qubit: int = 0) -> QubitFiducial:
    rho = reduced_density(ket, qubit)
    entries = []
    for name in ("X", "Y", "Z"):
        pauli = PAULI[name]
        expectation = _canon(sum(pauli[i][j] * rho[j][i] for i in range(2) for j in range(2)))
        entries.extend([_canon((1 + expectation) / 2), _canon((1 - expectation) / 2)])
    return QubitFiducial(tuple(entries))


@dataclass(frozen=True)
class ZXDemo:
    out_z: Ket
    out_x: Ket
    distinguishable: bool


def zx_postmeasurement_demo(alpha, beta) -> ZXDemo:
    """Record a Z or an X measurement of ``alpha|0> + beta|1>`` in a memory qubit."""
    alpha, beta = _num(alpha), _num(beta)
    system = Ket(1, (alpha, beta))
    if not system.is_normalised():
        raise QuantumError("|alpha|^2 + |beta|^2 must equal 1")
    start = system.tensor(Ket.basis("0"))
    out_z = cnot_memory(start, 0, 1)
    out_x = apply_gate(cnot_memory(apply_gate(start, HADAMARD, (0,)), 0, 1), HADAMARD, (0,))
    differ = any(qubit_to_fiducial(out_z, q) != qubit_to_fiducial(out_x, q) for q in (0, 1))
    return ZXDemo(out_z, out_x, differ)
