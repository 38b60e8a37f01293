from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Sequence

from mc_cert.formula import CnfXorFormula, Xor
from mc_cert.randomness import xor_hash

MAX_ORACLE_VARS = 24
MAX_HASH_VARS = 5


class OracleGuardError(ValueError):
    pass


@dataclass(frozen=True)
class ExactCount:
    value: int


def _points(F: CnfXorFormula) -> Iterator[int]:
    """Bitmasks (bit v-1 = variable v) of every model of F."""
    if F.num_vars > MAX_ORACLE_VARS:
        raise OracleGuardError(f"brute force limited to {MAX_ORACLE_VARS} variables, formula has {F.num_vars}")
    full = (1 << F.num_vars) - 1
    clauses: list[tuple[int, int]] = []
    for clause in F.clauses:
        pos = neg = 0
        for lit in clause:
            if lit > 0:
                pos |= 1 << (lit - 1)
            else:
                neg |= 1 << (-lit - 1)
        clauses.append((pos, neg))
    xors = [(sum(1 << (v - 1) for v in x.vars), x.rhs) for x in F.xors]

    for point in range(1 << F.num_vars):
        if not all((point & pos) or (~point & full & neg) for pos, neg in clauses):
            continue
        if all(((point & mask).bit_count() & 1) == rhs for mask, rhs in xors):
            yield point


def brute_force_models(F: CnfXorFormula) -> list[dict[int, bool]]:
    return [
        {v: bool(point >> (v - 1) & 1) for v in range(1, F.num_vars + 1)}
        for point in _points(F)
    ]


def exact_projected_count(F: CnfXorFormula, proj: Optional[Sequence[int]] = None) -> ExactCount:
    proj = tuple(proj) if proj is not None else F.proj
    proj_mask = sum(1 << (v - 1) for v in proj)
    return ExactCount(len({point & proj_mask for point in _points(F)}))


def all_xors(V: Sequence[int]) -> list[Xor]:
    """Every XOR over subsets of V, 2^(|V|+1) of them."""
    out: list[Xor] = []
    for bits in itertools.product((0, 1), repeat=len(V)):
        chosen = [v for v, b in zip(V, bits) if b]
        out.append(Xor.from_vars(chosen, 0))
        out.append(Xor.from_vars(chosen, 1))
    return out


def exact_xor_joint_probability(
    V: Sequence[int],
    pairs: Sequence[tuple[Mapping[int, bool], int]],
) -> Fraction:
    """
    Probability over a uniformly random XOR on V that X(w_i) = c_i for every
    pair, where X(w) = 1 iff w satisfies X.
    """
    if len(V) > MAX_HASH_VARS:
        raise OracleGuardError(f"hash enumeration limited to {MAX_HASH_VARS} variables")
    if not 1 <= len(pairs) <= 3:
        raise OracleGuardError(f"need 1 to 3 (assignment, bit) pairs, got {len(pairs)}")
    keys = [tuple(bool(w[v]) for v in V) for w, _ in pairs]
    if len(set(keys)) != len(keys):
        raise OracleGuardError("assignments must be distinct on V")

    family = all_xors(V)
    hits = sum(
        1
        for x in family
        if all(xor_hash([x], w) == (c,) for w, c in pairs)
    )
    return Fraction(hits, len(family))
