from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

from mc_cert.formula import (
    Assignment,
    CnfXorFormula,
    Xor,
    add_xors,
    ban_sol,
    project,
)
from mc_cert.xlrup import ClauseFromXors, OrigXor, ProofStep, RupClause, XlrupProof

DEFAULT_CONFLICT_BUDGET = 1_000_000
DEFAULT_BLAST_WIDTH = 16


class BudgetExceeded(RuntimeError):
    pass


class BlastWidthError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    conflict_budget: Optional[int] = DEFAULT_CONFLICT_BUDGET
    blast_width: int = DEFAULT_BLAST_WIDTH
    restart_interval: Optional[int] = None


@dataclass(frozen=True)
class Sat:
    model: dict[int, bool]


@dataclass(frozen=True)
class Unsat:
    proof: XlrupProof


SolverResult = Union[Sat, Unsat]


@dataclass(frozen=True)
class BoundedResult:
    models: tuple[dict[int, bool], ...]
    exhausted: bool
    proof: Optional[XlrupProof] = None

    @property
    def count(self) -> int:
        return len(self.models)


# -----------------------------
# XOR blasting
# -----------------------------
def blast_xor(
    x: Xor,
    next_clause_id: int,
    *,
    xor_id: int,
    width_cap: int = DEFAULT_BLAST_WIDTH,
) -> tuple[list[tuple[int, ...]], list[ProofStep]]:
    """
    Clausal form of an XOR: one clause per falsifying point over x.vars, each
    justified by a clause-from-XOR step hinting `xor_id`.
    """
    k = len(x.vars)
    if k > width_cap:
        raise BlastWidthError(f"xor over {k} variables exceeds blast width {width_cap}")
    clauses: list[tuple[int, ...]] = []
    steps: list[ProofStep] = []
    cid = next_clause_id
    for point in itertools.product((False, True), repeat=k):
        if (sum(point) & 1) == x.rhs:
            continue
        clause = tuple(-v if val else v for v, val in zip(x.vars, point))
        clauses.append(clause)
        steps.append(ClauseFromXors(cid, clause, (xor_id,)))
        cid += 1
    return clauses, steps


# -----------------------------
# CDCL search
# -----------------------------
@dataclass(eq=False)
class _Clause:
    id: int
    lits: list[int]


class _Refuted(Exception):
    pass


@dataclass
class _Search:
    num_vars: int
    config: SolverConfig
    next_id: int
    steps: list[ProofStep] = field(default_factory=list)

    value: dict[int, bool] = field(default_factory=dict)
    level: dict[int, int] = field(default_factory=dict)
    reason: dict[int, Optional[_Clause]] = field(default_factory=dict)
    trail_pos: dict[int, int] = field(default_factory=dict)
    trail: list[int] = field(default_factory=list)
    qhead: int = 0
    decision_level: int = 0
    conflicts: int = 0
    watches: dict[int, list[_Clause]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for v in range(1, self.num_vars + 1):
            self.watches[v] = []
            self.watches[-v] = []

    # ---- assignment ----
    def lit_value(self, lit: int) -> Optional[bool]:
        val = self.value.get(abs(lit))
        if val is None:
            return None
        return val == (lit > 0)

    def enqueue(self, lit: int, reason: Optional[_Clause]) -> None:
        v = abs(lit)
        self.value[v] = lit > 0
        self.level[v] = self.decision_level
        self.reason[v] = reason
        self.trail_pos[v] = len(self.trail)
        self.trail.append(lit)

    def backjump(self, target: int) -> None:
        while self.trail and self.level[abs(self.trail[-1])] > target:
            v = abs(self.trail.pop())
            del self.value[v], self.level[v], self.reason[v], self.trail_pos[v]
        self.qhead = min(self.qhead, len(self.trail))
        self.decision_level = target

    # ---- clause database ----
    def attach(self, c: _Clause) -> None:
        self.watches[c.lits[0]].append(c)
        self.watches[c.lits[1]].append(c)

    def propagate(self) -> Optional[_Clause]:
        while self.qhead < len(self.trail):
            false_lit = -self.trail[self.qhead]
            self.qhead += 1
            ws = self.watches[false_lit]
            kept: list[_Clause] = []
            for j, c in enumerate(ws):
                lits = c.lits
                if lits[0] == false_lit:
                    lits[0], lits[1] = lits[1], lits[0]
                if self.lit_value(lits[0]) is True:
                    kept.append(c)
                    continue
                for k in range(2, len(lits)):
                    if self.lit_value(lits[k]) is not False:
                        lits[1], lits[k] = lits[k], lits[1]
                        self.watches[lits[1]].append(c)
                        break
                else:
                    kept.append(c)
                    if self.lit_value(lits[0]) is False:
                        kept.extend(ws[j + 1 :])
                        self.watches[false_lit] = kept
                        return c
                    self.enqueue(lits[0], c)
            self.watches[false_lit] = kept
        return None

    # ---- proof ----
    def _hints(self, implied: list[tuple[int, _Clause]], level0: list[int], conflict: _Clause) -> tuple[int, ...]:
        """
        Antecedents in trail order, then the conflict clause.

        `implied` holds (var, reason) for resolved current-level literals;
        level-0 variables are closed under their reasons.
        """
        chosen: dict[int, _Clause] = dict(implied)
        stack = list(level0)
        while stack:
            v = stack.pop()
            if v in chosen:
                continue
            r = self.reason[v]
            assert r is not None, "level-0 assignment without a reason"
            chosen[v] = r
            stack.extend(abs(l) for l in r.lits if abs(l) != v)
        ordered = sorted(chosen, key=self.trail_pos.__getitem__)
        return (*(chosen[v].id for v in ordered), conflict.id)

    def refute(self, conflict: _Clause) -> None:
        hints = self._hints([], [abs(l) for l in conflict.lits], conflict)
        self.steps.append(RupClause(self.next_id, (), hints))
        self.next_id += 1
        raise _Refuted

    def analyze(self, conflict: _Clause) -> tuple[list[int], int, tuple[int, ...]]:
        """First-UIP learning. Returns (learned lits, backjump level, hints)."""
        seen: set[int] = set()
        learned: list[int] = []
        level0: list[int] = []
        implied: list[tuple[int, _Clause]] = []
        pending = 0
        idx = len(self.trail) - 1
        c = conflict
        p: Optional[int] = None
        while True:
            for q in c.lits:
                if q == p:
                    continue
                v = abs(q)
                if v in seen:
                    continue
                seen.add(v)
                lvl = self.level[v]
                if lvl == self.decision_level:
                    pending += 1
                elif lvl > 0:
                    learned.append(q)
                else:
                    level0.append(v)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            pending -= 1
            if pending == 0:
                break
            r = self.reason[abs(p)]
            assert r is not None, "resolved a decision before reaching the UIP"
            implied.append((abs(p), r))
            c = r

        learned.insert(0, -p)
        back = 0
        if len(learned) > 1:
            best = max(range(1, len(learned)), key=lambda i: self.level[abs(learned[i])])
            learned[1], learned[best] = learned[best], learned[1]
            back = self.level[abs(learned[1])]
        return learned, back, self._hints(implied, level0, conflict)

    def learn(self, conflict: _Clause) -> None:
        lits, back, hints = self.analyze(conflict)
        c = _Clause(self.next_id, lits)
        self.steps.append(RupClause(c.id, tuple(lits), hints))
        self.next_id += 1
        self.backjump(back)
        if len(lits) > 1:
            self.attach(c)
        self.enqueue(lits[0], c)

    def decide(self) -> Optional[int]:
        for v in range(1, self.num_vars + 1):
            if v not in self.value:
                return v
        return None

    def run(self) -> Optional[dict[int, bool]]:
        budget = self.config.conflict_budget
        restart = self.config.restart_interval
        while True:
            conflict = self.propagate()
            if conflict is not None:
                self.conflicts += 1
                if budget is not None and self.conflicts > budget:
                    raise BudgetExceeded(f"conflict budget {budget} exhausted")
                if self.decision_level == 0:
                    self.refute(conflict)
                self.learn(conflict)
                if restart and self.conflicts % restart == 0:
                    self.backjump(0)
                continue
            v = self.decide()
            if v is None:
                return dict(sorted(self.value.items()))
            self.decision_level += 1
            self.enqueue(-v, None)


def _load(search: _Search, clauses: Sequence[tuple[int, Sequence[int]]]) -> None:
    """Add (id, lits) clauses at level 0; raises _Refuted on an immediate conflict."""
    for cid, lits in clauses:
        uniq = list(dict.fromkeys(lits))
        if not uniq:
            search.steps.append(RupClause(search.next_id, (), (cid,)))
            search.next_id += 1
            raise _Refuted
        if any(-l in uniq for l in uniq):
            continue
        c = _Clause(cid, uniq)
        if len(uniq) == 1:
            val = search.lit_value(uniq[0])
            if val is False:
                search.refute(c)
            if val is None:
                search.enqueue(uniq[0], c)
            continue
        search.attach(c)


def solve(F: CnfXorFormula, config: SolverConfig | None = None) -> SolverResult:
    """
    Decide F. A Sat model is total over 1..num_vars; an Unsat proof is a hinted
    XLRUP refutation of exactly F (clause ids 1..len(F.clauses)).
    """
    config = config or SolverConfig()
    n = len(F.clauses)
    search = _Search(num_vars=F.num_vars, config=config, next_id=n + 1)

    numbered: list[tuple[int, tuple[int, ...]]] = list(enumerate(F.clauses, start=1))
    try:
        for j, x in enumerate(F.xors, start=1):
            search.steps.append(OrigXor(j, x))
            blasted, steps = blast_xor(x, search.next_id, xor_id=j, width_cap=config.blast_width)
            search.steps.extend(steps)
            search.next_id += len(steps)
            numbered.extend((s.id, c) for s, c in zip(steps, blasted))
            if blasted and not blasted[0]:
                # 0 = 1 blasts straight to the empty clause.
                raise _Refuted
        _load(search, numbered)
        model = search.run()
    except _Refuted:
        return Unsat(tuple(search.steps))
    assert model is not None
    return Sat(model)


# -----------------------------
# Bounded enumeration
# -----------------------------
def blocked_instance(
    F: CnfXorFormula,
    proj: Sequence[int],
    xors: Sequence[Xor],
    models: Sequence[Assignment],
) -> CnfXorFormula:
    """F plus `xors`, projected on `proj`, with one ban clause per model in list order."""
    G = add_xors(F, xors)
    if G.proj != tuple(proj):
        G = replace(G, proj=tuple(proj))
    for w in models:
        G = ban_sol(G, project(w, proj))
    return G


def bounded_count(
    F: CnfXorFormula,
    proj: Sequence[int],
    thresh: int,
    xors: Sequence[Xor] = (),
    config: SolverConfig | None = None,
) -> BoundedResult:
    """
    Enumerate up to `thresh` models of F + xors, distinct on `proj`.

    When the banned instance becomes UNSAT first, `exhausted` is set and the
    proof refutes blocked_instance(F, proj, xors, models).
    """
    if thresh < 1:
        raise ValueError(f"thresh must be >= 1, got {thresh}")
    models: list[dict[int, bool]] = []
    while len(models) < thresh:
        result = solve(blocked_instance(F, proj, xors, models), config)
        if isinstance(result, Unsat):
            return BoundedResult(tuple(models), True, result.proof)
        models.append(result.model)
    return BoundedResult(tuple(models), False, None)
