from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

# Var -> bool over 1..num_vars (total) or over the projection list (projected).
Assignment = Mapping[int, bool]
ProjectedAssignment = Mapping[int, bool]


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class Xor:
    """
    Parity constraint: the number of true variables in `vars` has parity `rhs`.

    Doubles as a hash-function seed: a random Xor over the projection set maps
    an assignment to the bit "is this constraint satisfied".
    """

    vars: tuple[int, ...] = ()
    rhs: int = 0

    def __post_init__(self) -> None:
        vs = tuple(sorted(set(self.vars)))
        if len(vs) != len(self.vars) or vs != tuple(self.vars):
            raise FormulaError(f"Xor vars must be sorted and duplicate-free: {self.vars!r}")
        if any(v < 1 for v in vs):
            raise FormulaError(f"Xor vars must be positive: {self.vars!r}")
        if self.rhs not in (0, 1):
            raise FormulaError(f"Xor rhs must be 0 or 1, got {self.rhs!r}")

    @classmethod
    def from_vars(cls, vars: Iterable[int], rhs: int) -> "Xor":
        return cls(tuple(sorted(set(vars))), int(rhs))

    @classmethod
    def from_lits(cls, lits: Iterable[int]) -> "Xor":
        """
        Normalize a literal list whose literals XOR to 1.

        `x 1 2 -3 0` means x1 ^ x2 ^ ~x3 = 1; each negative literal flips the
        rhs and repeated variables cancel in pairs.
        """
        present: set[int] = set()
        rhs = 1
        for lit in lits:
            if lit == 0:
                raise FormulaError("Xor literal list contains 0")
            present ^= {abs(lit)}
            if lit < 0:
                rhs ^= 1
        return cls(tuple(sorted(present)), rhs)

    def to_lits(self) -> list[int]:
        if self.rhs == 1:
            return list(self.vars)
        if self.vars:
            return [-self.vars[0], *self.vars[1:]]
        # 0 = 0 has no literal form without a cancelling pair.
        return [1, -1]

    def evaluate(self, w: Assignment) -> bool:
        parity = sum(1 for v in self.vars if w[v]) & 1
        return parity == self.rhs


@dataclass(frozen=True)
class CnfXorFormula:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...] = ()
    xors: tuple[Xor, ...] = ()
    proj: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.num_vars < 1:
            raise FormulaError("Formula must have at least one variable")
        for i, clause in enumerate(self.clauses, start=1):
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise FormulaError(f"Clause {i}: literal {lit} out of range 1..{self.num_vars}")
        for i, x in enumerate(self.xors, start=1):
            _check_xor_range(x, self.num_vars, where=f"Xor {i}")
        if not self.proj:
            raise FormulaError("Projection set must be nonempty")
        if len(set(self.proj)) != len(self.proj):
            raise FormulaError(f"Projection list has duplicates: {self.proj!r}")
        for v in self.proj:
            if not 1 <= v <= self.num_vars:
                raise FormulaError(f"Projection variable {v} out of range 1..{self.num_vars}")

    @classmethod
    def build(
        cls,
        num_vars: int,
        clauses: Iterable[Sequence[int]] = (),
        xors: Iterable[Xor] = (),
        proj: Sequence[int] | None = None,
    ) -> "CnfXorFormula":
        return cls(
            num_vars=num_vars,
            clauses=tuple(tuple(c) for c in clauses),
            xors=tuple(xors),
            proj=tuple(proj) if proj else tuple(range(1, num_vars + 1)),
        )


def _check_xor_range(x: Xor, num_vars: int, *, where: str) -> None:
    for v in x.vars:
        if v > num_vars:
            raise FormulaError(f"{where}: variable {v} out of range 1..{num_vars}")


def _require_total(F: CnfXorFormula, w: Assignment) -> None:
    missing = [v for v in range(1, F.num_vars + 1) if v not in w]
    if missing:
        raise FormulaError(f"Assignment is not total: missing variables {missing[:8]}")


def check_sol(F: CnfXorFormula, w: Assignment) -> bool:
    """True iff every clause has a true literal and every Xor has parity rhs."""
    _require_total(F, w)
    for clause in F.clauses:
        if not any(w[abs(lit)] == (lit > 0) for lit in clause):
            return False
    return all(x.evaluate(w) for x in F.xors)


def project(w: Assignment, proj: Sequence[int]) -> dict[int, bool]:
    return {v: bool(w[v]) for v in proj}


def projection_key(w: Assignment, proj: Sequence[int]) -> tuple[bool, ...]:
    return tuple(bool(w[v]) for v in proj)


def ban_sol(F: CnfXorFormula, p: ProjectedAssignment) -> CnfXorFormula:
    """Add the clause blocking the cube `p` over the projection set."""
    if set(p) != set(F.proj):
        raise FormulaError("Projected assignment domain does not match the projection set")
    blocking = tuple(-v if p[v] else v for v in F.proj)
    return replace(F, clauses=F.clauses + (blocking,))


def add_xors(F: CnfXorFormula, xs: Iterable[Xor]) -> CnfXorFormula:
    xs = tuple(xs)
    for i, x in enumerate(xs, start=1):
        _check_xor_range(x, F.num_vars, where=f"Added xor {i}")
    if not xs:
        return F
    return replace(F, xors=F.xors + xs)


def assignment_from_lits(lits: Iterable[int], num_vars: int) -> dict[int, bool]:
    """
    Decode a solution line (every variable once, sign = value).
    Raises FormulaError unless the literals form a total assignment.
    """
    w: dict[int, bool] = {}
    for lit in lits:
        v = abs(lit)
        if lit == 0 or v > num_vars:
            raise FormulaError(f"Solution literal {lit} out of range 1..{num_vars}")
        if v in w:
            raise FormulaError(f"Solution mentions variable {v} twice")
        w[v] = lit > 0
    if len(w) != num_vars:
        raise FormulaError(f"Solution is not total: {len(w)} of {num_vars} variables given")
    return w


def assignment_to_lits(w: Assignment) -> list[int]:
    return [v if w[v] else -v for v in sorted(w)]
