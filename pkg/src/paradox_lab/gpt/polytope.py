"""No-signalling polytope: vertices, CHSH values, random points and membership."""

from __future__ import annotations

import functools
import itertools
import random
import warnings
from fractions import Fraction
from typing import Sequence

import numpy as np

from .operations import is_no_signalling, tensor_all
from .states import (
    GBIT,
    StateVector,
    SystemSignature,
    local_deterministic,
    pr_box_variant,
    pure_gbit,
)


def constraint_matrix(signature: SystemSignature) -> tuple[np.ndarray, np.ndarray]:
    """Equality constraints ``A p = b``: unit block norms and no-signalling."""
    n = len(signature)
    rows: list[np.ndarray] = []
    rhs: list[int] = []
    for x in signature.setting_tuples():
        row = np.zeros(signature.length, dtype=np.int64)
        for a in signature.outcome_tuples():
            row[signature.index(x, a)] = 1
        rows.append(row)
        rhs.append(1)
    for i in range(n):
        others = [j for j in range(n) if j != i]
        for x in signature.setting_tuples():
            if x[i] != 0:
                continue
            for xi in range(1, signature.settings[i]):
                x_alt = list(x)
                x_alt[i] = xi
                for rest in itertools.product(*(range(signature.outcomes[j]) for j in others)):
                    row = np.zeros(signature.length, dtype=np.int64)
                    for ai in range(signature.outcomes[i]):
                        a = list(rest)
                        a.insert(i, ai)
                        row[signature.index(x, a)] += 1
                        row[signature.index(x_alt, a)] -= 1
                    rows.append(row)
                    rhs.append(0)
    return np.array(rows), np.array(rhs)


def _exact_solve(matrix: np.ndarray, rhs: np.ndarray) -> list[Fraction] | None:
    import sympy

    system = sympy.Matrix(matrix.tolist())
    target = sympy.Matrix(rhs.tolist())
    if system.rank() != system.shape[1]:
        return None
    # full column rank: the normal equations have a unique rational solution
    sol = (system.T * system).LUsolve(system.T * target)
    if system * sol != target:
        return None
    return [Fraction(int(v.p), int(v.q)) for v in sol]


def _is_small_gbit_signature(signature: SystemSignature) -> bool:
    return all(sub == (2, 2) for sub in signature.subsystems) and len(signature) <= 2


def enumerate_ns_vertices(signature: SystemSignature) -> list[StateVector]:
    """Exact vertices of the no-signalling polytope for one or two gbits.

    Every subset of ``dim`` entries is tried as the zero set; a float solve
    filters candidates and each survivor is re-solved exactly.
    """
    return list(_enumerate_cached(signature))


@functools.lru_cache(maxsize=None)
def _enumerate_cached(signature: SystemSignature) -> tuple[StateVector, ...]:
    if not _is_small_gbit_signature(signature):
        raise NotImplementedError(f"vertex enumeration for {signature} not implemented at this scale")
    a_eq, b_eq = constraint_matrix(signature)
    length = signature.length
    rank = np.linalg.matrix_rank(a_eq)
    dim = length - rank
    seen: dict[tuple, StateVector] = {}
    for zeros in itertools.combinations(range(length), dim):
        extra = np.zeros((dim, length), dtype=np.int64)
        for r, z in enumerate(zeros):
            extra[r, z] = 1
        system = np.vstack([a_eq, extra])
        if np.linalg.matrix_rank(system) < length:
            continue
        target = np.concatenate([b_eq, np.zeros(dim, dtype=np.int64)])
        approx, *_ = np.linalg.lstsq(system.astype(float), target.astype(float), rcond=None)
        if approx.min() < -1e-9:
            continue
        support = tuple(int(abs(v) > 1e-9) for v in approx)
        if support in seen:
            continue
        exact = _exact_solve(system, target)
        if exact is None or min(exact) < 0:
            continue
        seen[support] = StateVector(signature, tuple(exact))
    return tuple(sorted(seen.values(), key=lambda s: s.entries, reverse=True))


def spanning_set(signature: SystemSignature) -> list[StateVector]:
    """Product vertices plus PR boxes embedded on each pair, for larger gbit signatures.

    This is not the full vertex set beyond two gbits; a warning says so.
    """
    n = len(signature)
    if not all(sub == (2, 2) for sub in signature.subsystems):
        raise NotImplementedError(f"spanning set for {signature} not implemented at this scale")
    if n <= 2:
        return enumerate_ns_vertices(signature)
    warnings.warn(
        f"{n} gbits: validating on product vertices and pairwise PR embeddings only, not the full vertex set",
        stacklevel=2,
    )
    pure = [pure_gbit(label) for label in ("00", "01", "10", "11")]
    result = [tensor_all(list(combo)) for combo in itertools.product(pure, repeat=n)]
    for i, j in itertools.combinations(range(n), 2):
        for alpha, beta, gamma in itertools.product((0, 1), repeat=3):
            box = pr_box_variant(alpha, beta, gamma)
            for rest in itertools.product(pure, repeat=n - 2):
                result.append(_embed_pair(box, i, j, list(rest), n))
    return result


def _embed_pair(box: StateVector, i: int, j: int, rest: list[StateVector], n: int) -> StateVector:
    sig = SystemSignature.gbits(n)
    others = [k for k in range(n) if k not in (i, j)]

    def entry(x, a):
        value = box[(x[i], x[j]), (a[i], a[j])]
        for k, state in zip(others, rest):
            value *= state[(x[k],), (a[k],)]
        return value

    return StateVector.from_function(sig, entry)


# -- CHSH -------------------------------------------------------------------------

CHSH_LOCAL_BOUND = 3


def chsh_value(state: StateVector, alpha: int = 0, beta: int = 0, gamma: int = 0) -> Fraction:
    """``sum_{x,y} P(a xor b = xy xor alpha x xor beta y xor gamma | x, y)``; local bound 3, PR value 4."""
    total = Fraction(0)
    for x, y in itertools.product((0, 1), repeat=2):
        target = (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma
        for a, b in itertools.product((0, 1), repeat=2):
            if a ^ b == target:
                total += state[(x, y), (a, b)]
    return total


def max_chsh(state: StateVector) -> Fraction:
    """Largest value over the 8 relabelled CHSH functionals."""
    return max(chsh_value(state, *params) for params in itertools.product((0, 1), repeat=3))


def violates_chsh(state: StateVector) -> bool:
    return max_chsh(state) > CHSH_LOCAL_BOUND


def local_deterministic_vertices() -> list[StateVector]:
    fns = [(0, 0), (0, 1), (1, 0), (1, 1)]
    return [local_deterministic([f, g]) for f in fns for g in fns]


def pr_vertices() -> list[StateVector]:
    return [pr_box_variant(*params) for params in itertools.product((0, 1), repeat=3)]


# -- random points & membership ----------------------------------------------------

def random_polytope_point(vertices: Sequence[StateVector], rng: random.Random, denominator: int = 97) -> StateVector:
    """Random rational convex combination of ``vertices``."""
    raw = [rng.randint(0, denominator) for _ in vertices]
    if sum(raw) == 0:
        raw[rng.randrange(len(raw))] = 1
    total = sum(raw)
    weights = [Fraction(r, total) for r in raw]
    sig = vertices[0].signature
    entries = [sum((w * v.entries[i] for w, v in zip(weights, vertices)), Fraction(0)) for i in range(sig.length)]
    return StateVector(sig, tuple(entries))


def in_convex_hull(state: StateVector, vertices: Sequence[StateVector], tol: float = 1e-9) -> bool:
    """LP feasibility certificate that ``state`` is a convex combination of ``vertices``."""
    from scipy.optimize import linprog

    v = np.array([[float(e) for e in vert.entries] for vert in vertices]).T
    p = np.array([float(e) for e in state.entries])
    a_eq = np.vstack([v, np.ones((1, len(vertices)))])
    b_eq = np.concatenate([p, [1.0]])
    res = linprog(np.zeros(len(vertices)), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * len(vertices), method="highs")
    if res.status != 0:
        return False
    return float(np.abs(a_eq @ res.x - b_eq).max()) < tol


def gbit_vertices() -> list[StateVector]:
    return enumerate_ns_vertices(GBIT)


def check_vertices_no_signalling(vertices: Sequence[StateVector]) -> bool:
    return all(is_no_signalling(v).ok for v in vertices)
