from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from mc_cert.formula import CnfXorFormula, Xor

DEFAULT_IMPLICATION_WIDTH = 16


class XlrupCheckError(RuntimeError):
    pass


# -----------------------------
# Proof steps
# -----------------------------
@dataclass(frozen=True)
class OrigXor:
    id: int
    xor: Xor


@dataclass(frozen=True)
class XorFromClauses:
    id: int
    xor: Xor
    clause_hints: tuple[int, ...]


@dataclass(frozen=True)
class XorAdd:
    id: int
    xor: Xor
    xor_hints: tuple[int, ...]


@dataclass(frozen=True)
class ClauseFromXors:
    id: int
    clause: tuple[int, ...]
    xor_hints: tuple[int, ...]


@dataclass(frozen=True)
class RupClause:
    id: int
    clause: tuple[int, ...]
    clause_hints: tuple[int, ...]


@dataclass(frozen=True)
class DeleteClauses:
    ids: tuple[int, ...]


@dataclass(frozen=True)
class DeleteXors:
    ids: tuple[int, ...]


ProofStep = Union[OrigXor, XorFromClauses, XorAdd, ClauseFromXors, RupClause, DeleteClauses, DeleteXors]
XlrupProof = tuple[ProofStep, ...]


@dataclass(frozen=True)
class Verified:
    steps: int


@dataclass(frozen=True)
class Rejected:
    index: int
    reason: str


CheckResult = Union[Verified, Rejected]


# -----------------------------
# Packed XORs
# -----------------------------
# An XOR is held as (mask, rhs) with bit v of mask set iff v is in the XOR,
# so adding XORs is a single int exclusive-or.
PackedXor = tuple[int, int]


def pack_xor(x: Xor) -> PackedXor:
    mask = 0
    for v in x.vars:
        mask |= 1 << v
    return mask, x.rhs


def unpack_xor(packed: PackedXor) -> Xor:
    mask, rhs = packed
    vs: list[int] = []
    v = 0
    while mask:
        if mask & 1:
            vs.append(v)
        mask >>= 1
        v += 1
    return Xor(tuple(vs), rhs)


def _sum_packed(items: Iterable[PackedXor]) -> PackedXor:
    mask, rhs = 0, 0
    for m, r in items:
        mask ^= m
        rhs ^= r
    return mask, rhs


def xor_sum(xors: Sequence[Xor]) -> Xor:
    """GF(2) sum: symmetric difference of variable sets, xor of rhs bits."""
    if not xors:
        raise XlrupCheckError("xor_sum needs at least one XOR")
    return unpack_xor(_sum_packed(pack_xor(x) for x in xors))


@dataclass
class ProofState:
    clause_db: dict[int, tuple[int, ...]] = field(default_factory=dict)
    xor_db: dict[int, PackedXor] = field(default_factory=dict)
    empty_derived: bool = False
    last_clause_id: int = 0
    last_xor_id: int = 0

    @classmethod
    def for_formula(cls, F: CnfXorFormula) -> "ProofState":
        db = {i: tuple(c) for i, c in enumerate(F.clauses, start=1)}
        return cls(clause_db=db, last_clause_id=len(F.clauses))

    def clause(self, cid: int) -> tuple[int, ...]:
        try:
            return self.clause_db[cid]
        except KeyError:
            raise XlrupCheckError(f"clause {cid} is not live") from None

    def xor(self, xid: int) -> PackedXor:
        try:
            return self.xor_db[xid]
        except KeyError:
            raise XlrupCheckError(f"xor {xid} is not live") from None


# -----------------------------
# Step rules
# -----------------------------
def check_rup(state: ProofState, clause: Sequence[int], hints: Sequence[int]) -> None:
    """
    Hinted reverse unit propagation. Raises XlrupCheckError unless assuming every
    literal of `clause` false and propagating through `hints` in order reaches a
    falsified hint.
    """
    assign: dict[int, bool] = {}
    for lit in clause:
        v, val = abs(lit), lit < 0
        if assign.get(v, val) != val:
            return  # tautology: its negation is already contradictory
        assign[v] = val

    for h in hints:
        unit: int | None = None
        open_count = 0
        for lit in dict.fromkeys(state.clause(h)):
            v = abs(lit)
            if v in assign:
                if assign[v] == (lit > 0):
                    raise XlrupCheckError(f"hint {h} is satisfied")
                continue
            open_count += 1
            unit = lit
        if open_count == 0:
            return
        if open_count > 1:
            raise XlrupCheckError(f"hint {h} is neither unit nor falsified")
        assign[abs(unit)] = unit > 0

    raise XlrupCheckError("hints exhausted without conflict")


def _clause_masks(clause: Sequence[int]) -> tuple[int, int] | None:
    """(positive mask, negative mask), or None for a tautology."""
    pos = neg = 0
    for lit in clause:
        if lit > 0:
            pos |= 1 << lit
        else:
            neg |= 1 << -lit
    if pos & neg:
        return None
    return pos, neg


def check_clause_from_xors(state: ProofState, clause: Sequence[int], xor_hints: Sequence[int]) -> None:
    masks = _clause_masks(clause)
    if masks is None:
        return
    pos, neg = masks
    mask, rhs = _sum_packed(state.xor(h) for h in xor_hints)
    if mask & ~(pos | neg):
        raise XlrupCheckError("xor sum mentions variables outside the clause")
    # At the point falsifying every literal, exactly the negated variables are true.
    parity = (mask & neg).bit_count() & 1
    if parity == rhs:
        raise XlrupCheckError("xor sum is satisfied where the clause is false")


def check_xor_from_clauses(
    state: ProofState,
    x: Xor,
    clause_hints: Sequence[int],
    *,
    width_cap: int = DEFAULT_IMPLICATION_WIDTH,
) -> None:
    k = len(x.vars)
    if k > width_cap:
        raise XlrupCheckError(f"xor width {k} exceeds implication cap {width_cap}")
    local = {v: i for i, v in enumerate(x.vars)}

    # Hinted clauses re-expressed over local bit positions; only those living
    # entirely inside vars(x) can be falsified by a point over vars(x).
    blockers: list[tuple[int, int]] = []
    for h in clause_hints:
        c = state.clause(h)
        if any(abs(lit) not in local for lit in c):
            continue
        pos = neg = 0
        for lit in c:
            if lit > 0:
                pos |= 1 << local[lit]
            else:
                neg |= 1 << local[-lit]
        if pos & neg:
            continue
        blockers.append((pos, neg))

    for point in range(1 << k):
        if (point.bit_count() & 1) == x.rhs:
            continue
        if not any((pos & point) == 0 and (neg & point) == neg for pos, neg in blockers):
            raise XlrupCheckError(f"falsifying point {point:0{max(k, 1)}b} of xor is not covered by hints")


# -----------------------------
# Whole proof
# -----------------------------
def _check_step(
    state: ProofState,
    step: ProofStep,
    input_xors: frozenset[Xor],
    width_cap: int,
) -> None:
    if isinstance(step, (DeleteClauses, DeleteXors)):
        db = state.clause_db if isinstance(step, DeleteClauses) else state.xor_db
        kind = "clause" if isinstance(step, DeleteClauses) else "xor"
        for i in step.ids:
            if i not in db:
                raise XlrupCheckError(f"delete of {kind} {i} which is not live")
            del db[i]
        return

    if isinstance(step, (OrigXor, XorFromClauses, XorAdd)):
        if step.id <= state.last_xor_id:
            raise XlrupCheckError(f"xor id {step.id} is not fresh (last {state.last_xor_id})")
        if isinstance(step, OrigXor):
            if step.xor not in input_xors:
                raise XlrupCheckError("xor does not match any input xor")
        elif isinstance(step, XorFromClauses):
            check_xor_from_clauses(state, step.xor, step.clause_hints, width_cap=width_cap)
        else:
            if not step.xor_hints:
                raise XlrupCheckError("xor addition without hints")
            got = _sum_packed(state.xor(h) for h in step.xor_hints)
            if got != pack_xor(step.xor):
                raise XlrupCheckError(f"sum of hints is {unpack_xor(got)}, not the stated xor")
        state.xor_db[step.id] = pack_xor(step.xor)
        state.last_xor_id = step.id
        return

    if step.id <= state.last_clause_id:
        raise XlrupCheckError(f"clause id {step.id} is not fresh (last {state.last_clause_id})")
    if isinstance(step, ClauseFromXors):
        check_clause_from_xors(state, step.clause, step.xor_hints)
    else:
        check_rup(state, step.clause, step.clause_hints)
    state.clause_db[step.id] = tuple(step.clause)
    state.last_clause_id = step.id
    if not step.clause:
        state.empty_derived = True


def check_proof(
    F: CnfXorFormula,
    steps: Sequence[ProofStep],
    *,
    width_cap: int = DEFAULT_IMPLICATION_WIDTH,
) -> CheckResult:
    """
    Check an XLRUP proof against F.

    Clause ids 1..len(F.clauses) are preloaded from F; input XORs enter only via
    OrigXor steps. Every step is checked, including any after the empty clause.
    """
    state = ProofState.for_formula(F)
    input_xors = frozenset(F.xors)
    for index, step in enumerate(steps):
        try:
            _check_step(state, step, input_xors, width_cap)
        except XlrupCheckError as e:
            return Rejected(index, str(e))
    if not state.empty_derived:
        return Rejected(len(steps), "no empty clause")
    return Verified(len(steps))
