from __future__ import annotations

from pathlib import Path
from typing import Iterator, Sequence

from mc_cert.formula import FormulaError, Xor
from mc_cert.xlrup import (
    ClauseFromXors,
    DeleteClauses,
    DeleteXors,
    OrigXor,
    ProofStep,
    RupClause,
    XorAdd,
    XorFromClauses,
)


class XlrupParseError(ValueError):
    pass


class _Tokens:
    def __init__(self, text: str) -> None:
        self._items: list[tuple[str, int]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("//", 1)[0]
            self._items.extend((tok, lineno) for tok in line.split())
        self._pos = 0

    def __bool__(self) -> bool:
        return self._pos < len(self._items)

    @property
    def line(self) -> int:
        if self._pos < len(self._items):
            return self._items[self._pos][1]
        return self._items[-1][1] if self._items else 0

    def peek(self) -> str | None:
        if self._pos < len(self._items):
            return self._items[self._pos][0]
        return None

    def next(self) -> str:
        if self._pos >= len(self._items):
            raise XlrupParseError(f"Line {self.line}: unexpected end of proof")
        tok = self._items[self._pos][0]
        self._pos += 1
        return tok

    def integer(self) -> int:
        line = self.line
        tok = self.next()
        try:
            return int(tok)
        except ValueError:
            raise XlrupParseError(f"Line {line}: expected integer, got {tok!r}") from None

    def ident(self) -> int:
        line = self.line
        v = self.integer()
        if v <= 0:
            raise XlrupParseError(f"Line {line}: id must be positive, got {v}")
        return v

    def zero_terminated(self, *, positive: bool) -> tuple[int, ...]:
        out: list[int] = []
        while True:
            line = self.line
            v = self.integer()
            if v == 0:
                return tuple(out)
            if positive and v < 0:
                raise XlrupParseError(f"Line {line}: id must be positive, got {v}")
            out.append(v)


def _xor(lits: Sequence[int], line: int) -> Xor:
    try:
        return Xor.from_lits(lits)
    except FormulaError as e:
        raise XlrupParseError(f"Line {line}: {e}") from e


def _iter_steps(toks: _Tokens) -> Iterator[tuple[ProofStep, int]]:
    while toks:
        line = toks.line
        head = toks.peek()
        if head == "o":
            toks.next()
            if toks.next() != "x":
                raise XlrupParseError(f"Line {line}: expected 'o x'")
            sid = toks.ident()
            yield OrigXor(sid, _xor(toks.zero_terminated(positive=False), line)), line
        elif head == "i":
            toks.next()
            if toks.peek() == "x":
                toks.next()
                sid = toks.ident()
                lits = toks.zero_terminated(positive=False)
                hints = toks.zero_terminated(positive=True)
                yield XorFromClauses(sid, _xor(lits, line), hints), line
            else:
                sid = toks.ident()
                lits = toks.zero_terminated(positive=False)
                hints = toks.zero_terminated(positive=True)
                yield ClauseFromXors(sid, lits, hints), line
        elif head == "x":
            toks.next()
            if toks.peek() == "d":
                toks.next()
                yield DeleteXors(toks.zero_terminated(positive=True)), line
            else:
                sid = toks.ident()
                lits = toks.zero_terminated(positive=False)
                hints = toks.zero_terminated(positive=True)
                yield XorAdd(sid, _xor(lits, line), hints), line
        elif head == "d":
            toks.next()
            yield DeleteClauses(toks.zero_terminated(positive=True)), line
        else:
            sid = toks.ident()
            lits = toks.zero_terminated(positive=False)
            hints = toks.zero_terminated(positive=True)
            yield RupClause(sid, lits, hints), line


def parse_xlrup(text: str) -> list[ProofStep]:
    """
    Parse XLRUP proof text. Whitespace-insensitive; `//` starts a comment.

    Steps:
      o x <id> <lits> 0                 input XOR
      i x <id> <lits> 0 <clause ids> 0  XOR implied by clauses
      x <id> <lits> 0 <xor ids> 0       XOR as a sum of XORs
      i <id> <lits> 0 <xor ids> 0       clause implied by XORs
      <id> <lits> 0 <clause ids> 0      RUP clause
      d <clause ids> 0                  delete clauses
      x d <xor ids> 0                   delete XORs

    XOR literals XOR to 1. Ids increase strictly within each id space.
    """
    steps: list[ProofStep] = []
    last_clause = 0
    last_xor = 0
    for step, line in _iter_steps(_Tokens(text)):
        if isinstance(step, (OrigXor, XorFromClauses, XorAdd)):
            if step.id <= last_xor:
                raise XlrupParseError(f"Line {line}: xor id {step.id} not above {last_xor}")
            last_xor = step.id
        elif isinstance(step, (ClauseFromXors, RupClause)):
            if step.id <= last_clause:
                raise XlrupParseError(f"Line {line}: clause id {step.id} not above {last_clause}")
            last_clause = step.id
        steps.append(step)
    return steps


def _ints(values: Sequence[int]) -> str:
    return " ".join([*(str(v) for v in values), "0"])


def format_step(step: ProofStep) -> str:
    if isinstance(step, OrigXor):
        return f"o x {step.id} {_ints(step.xor.to_lits())}"
    if isinstance(step, XorFromClauses):
        return f"i x {step.id} {_ints(step.xor.to_lits())} {_ints(step.clause_hints)}"
    if isinstance(step, XorAdd):
        return f"x {step.id} {_ints(step.xor.to_lits())} {_ints(step.xor_hints)}"
    if isinstance(step, ClauseFromXors):
        return f"i {step.id} {_ints(step.clause)} {_ints(step.xor_hints)}"
    if isinstance(step, RupClause):
        return f"{step.id} {_ints(step.clause)} {_ints(step.clause_hints)}"
    if isinstance(step, DeleteClauses):
        return f"d {_ints(step.ids)}"
    if isinstance(step, DeleteXors):
        return f"x d {_ints(step.ids)}"
    raise TypeError(f"not a proof step: {step!r}")


def format_xlrup(steps: Sequence[ProofStep]) -> str:
    return "".join(format_step(s) + "\n" for s in steps)


def read_xlrup(path: Path) -> list[ProofStep]:
    return parse_xlrup(Path(path).read_text(encoding="utf-8"))


def write_xlrup(path: Path, steps: Sequence[ProofStep]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_xlrup(steps), encoding="utf-8")
    return path
