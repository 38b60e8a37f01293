from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from mc_cert.formula import FormulaError, assignment_from_lits, assignment_to_lits
from mc_cert.io_xlrup import write_xlrup
from mc_cert.xlrup import XlrupProof


class CertificateParseError(ValueError):
    pass


@dataclass(frozen=True)
class CertRound:
    m: int
    list_lo: tuple[dict[int, bool], ...]
    # Absent for a failed round (m == |S|).
    list_hi: Optional[tuple[dict[int, bool], ...]] = None


@dataclass(frozen=True)
class Certificate:
    m0: int
    init_models: tuple[dict[int, bool], ...]
    rounds: tuple[CertRound, ...] = ()


class _Reader:
    def __init__(self, text: str) -> None:
        self._toks: list[tuple[str, int]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            self._toks.extend((t, lineno) for t in raw.split("//", 1)[0].split())
        self._pos = 0

    def __bool__(self) -> bool:
        return self._pos < len(self._toks)

    def integer(self, what: str) -> int:
        if self._pos >= len(self._toks):
            raise CertificateParseError(f"unexpected end of certificate, expected {what}")
        tok, line = self._toks[self._pos]
        self._pos += 1
        try:
            return int(tok)
        except ValueError:
            raise CertificateParseError(f"Line {line}: expected {what}, got {tok!r}") from None

    def solution(self, num_vars: int) -> dict[int, bool]:
        line = self._toks[self._pos][1] if self else 0
        lits: list[int] = []
        while True:
            v = self.integer("solution literal")
            if v == 0:
                break
            lits.append(v)
        try:
            return assignment_from_lits(lits, num_vars)
        except FormulaError as e:
            raise CertificateParseError(f"Line {line}: {e}") from e

    def model_list(self, num_vars: int) -> tuple[dict[int, bool], ...]:
        n = self.integer("solution count")
        if n < 0:
            raise CertificateParseError(f"negative solution count {n}")
        return tuple(self.solution(num_vars) for _ in range(n))


def parse_certificate(text: str, num_vars: int, *, proj_size: Optional[int] = None) -> Certificate:
    """
    Parse a partial certificate.

      m0
      <count> then <count> solutions          initial list
      per round:
        m
        <count> solutions after m-1 XORs
        <count> solutions after m XORs          omitted when m == |S| (failed round)

    Solutions list every variable once as a signed literal and end with 0.
    `//` starts a comment. |S| defaults to num_vars.
    """
    proj_size = num_vars if proj_size is None else proj_size
    r = _Reader(text)
    m0 = r.integer("m0")
    init = r.model_list(num_vars)
    rounds: list[CertRound] = []
    while r:
        m = r.integer("round m")
        lo = r.model_list(num_vars)
        hi = None if m == proj_size else r.model_list(num_vars)
        rounds.append(CertRound(m, lo, hi))
    return Certificate(m0, init, tuple(rounds))


def _write_models(lines: list[str], models: Sequence[Mapping[int, bool]], note: str) -> None:
    lines.append(f"{len(models)} // {note}")
    for w in models:
        lines.append(" ".join([*(str(l) for l in assignment_to_lits(w)), "0"]))


def format_certificate(cert: Certificate) -> str:
    lines = [f"{cert.m0} // initial m0"]
    _write_models(lines, cert.init_models, "solutions")
    for i, rnd in enumerate(cert.rounds, start=1):
        lines.append(f"{rnd.m} // round {i} value of m")
        _write_models(lines, rnd.list_lo, "solutions after m - 1 xors")
        if rnd.list_hi is not None:
            _write_models(lines, rnd.list_hi, "solutions after m xors")
    return "\n".join(lines) + "\n"


def read_certificate(path: Path, num_vars: int, *, proj_size: Optional[int] = None) -> Certificate:
    return parse_certificate(Path(path).read_text(encoding="utf-8"), num_vars, proj_size=proj_size)


def proof_sidecar(cert_path: Path, label: str, *, proof_dir: Optional[Path] = None) -> Path:
    """`<base>.<label>.xlrup` next to the certificate (or inside proof_dir)."""
    cert_path = Path(cert_path)
    parent = Path(proof_dir) if proof_dir is not None else cert_path.parent
    return parent / f"{cert_path.stem}.{label}.xlrup"


def write_certificate_bundle(
    cert_path: Path,
    cert: Certificate,
    *,
    init_proof: Optional[XlrupProof] = None,
    round_proofs: Sequence[Optional[XlrupProof]] = (),
) -> dict[str, Path]:
    """
    Write the certificate and its UNSAT proof sidecars.
    Labels are `init` for the exact case and `round<r>` (1-based) per round.
    Returns label -> written path.
    """
    cert_path = Path(cert_path)
    cert_path.parent.mkdir(parents=True, exist_ok=True)
    cert_path.write_text(format_certificate(cert), encoding="utf-8")

    written: dict[str, Path] = {"certificate": cert_path}
    if init_proof is not None:
        written["init"] = write_xlrup(proof_sidecar(cert_path, "init"), init_proof)
    for r, proof in enumerate(round_proofs, start=1):
        if proof is not None:
            label = f"round{r}"
            written[label] = write_xlrup(proof_sidecar(cert_path, label), proof)
    return written
