from __future__ import annotations

import re
from pathlib import Path

from mc_cert.formula import CnfXorFormula, FormulaError, Xor

_HEADER = re.compile(r"^p\s+cnf\s+(\d+)\s+(\d+)\s*$")


def _ints(tokens: list[str], *, lineno: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as e:
        raise FormulaError(f"Line {lineno}: expected integers, got {' '.join(tokens)!r}") from e


def parse_dimacs_cnfxor(text: str) -> CnfXorFormula:
    """
    Parse DIMACS CNF extended with XOR and projection lines.

    Grammar (whitespace-separated, one construct per line):
      c ...                      comment
      c ind v1 v2 ... 0          projection variables (all such lines are unioned)
      p cnf <vars> <constraints> header, before any constraint
      l1 l2 ... 0                clause; may continue over several lines
      x l1 l2 ... 0              XOR whose literals XOR to 1 (`x1 ...` also accepted)

    The constraint count in the header is informational and not enforced.
    """
    num_vars: int | None = None
    clauses: list[tuple[int, ...]] = []
    xors: list[Xor] = []
    proj: list[int] = []
    pending: list[int] = []
    pending_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue

        if line.startswith("c"):
            parts = line.split()
            if len(parts) >= 2 and parts[0] == "c" and parts[1] == "ind":
                vs = _ints(parts[2:], lineno=lineno)
                if not vs or vs[-1] != 0:
                    raise FormulaError(f"Line {lineno}: projection line missing 0 terminator")
                for v in vs[:-1]:
                    if v <= 0:
                        raise FormulaError(f"Line {lineno}: projection variable {v} must be positive")
                    if v not in proj:
                        proj.append(v)
            continue

        if line.startswith("p"):
            if num_vars is not None:
                raise FormulaError(f"Line {lineno}: duplicate header")
            m = _HEADER.match(line)
            if m is None:
                raise FormulaError(f"Line {lineno}: malformed header {line!r}")
            num_vars = int(m.group(1))
            if num_vars == 0:
                raise FormulaError("Formula declares zero variables")
            continue

        if num_vars is None:
            raise FormulaError(f"Line {lineno}: constraint before 'p cnf' header")

        if line.startswith("x"):
            if pending:
                raise FormulaError(f"Line {pending_line}: clause missing 0 terminator")
            lits = _ints(line[1:].split(), lineno=lineno)
            if not lits or lits[-1] != 0:
                raise FormulaError(f"Line {lineno}: XOR missing 0 terminator")
            for lit in lits[:-1]:
                if lit == 0 or abs(lit) > num_vars:
                    raise FormulaError(f"Line {lineno}: literal {lit} out of range 1..{num_vars}")
            xors.append(Xor.from_lits(lits[:-1]))
            continue

        if not pending:
            pending_line = lineno
        for lit in _ints(line.split(), lineno=lineno):
            if lit == 0:
                clauses.append(tuple(pending))
                pending = []
                pending_line = lineno
            elif abs(lit) > num_vars:
                raise FormulaError(f"Line {lineno}: literal {lit} out of range 1..{num_vars}")
            else:
                pending.append(lit)

    if num_vars is None:
        raise FormulaError("Missing 'p cnf' header")
    if pending:
        raise FormulaError(f"Line {pending_line}: clause missing 0 terminator")
    for v in proj:
        if v > num_vars:
            raise FormulaError(f"Projection variable {v} out of range 1..{num_vars}")

    return CnfXorFormula.build(num_vars, clauses, xors, proj or None)


def format_dimacs_cnfxor(F: CnfXorFormula) -> str:
    lines = [f"p cnf {F.num_vars} {len(F.clauses) + len(F.xors)}"]
    if F.proj != tuple(range(1, F.num_vars + 1)):
        lines.append("c ind " + " ".join(str(v) for v in F.proj) + " 0")
    for clause in F.clauses:
        lines.append(" ".join([*(str(l) for l in clause), "0"]))
    for x in F.xors:
        lines.append("x " + " ".join([*(str(l) for l in x.to_lits()), "0"]))
    return "\n".join(lines) + "\n"


def read_formula(path: Path) -> CnfXorFormula:
    return parse_dimacs_cnfxor(Path(path).read_text(encoding="utf-8"))


def write_formula(path: Path, F: CnfXorFormula) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_dimacs_cnfxor(F), encoding="utf-8")
    return path
