from __future__ import annotations

import shlex
import subprocess
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from mc_cert.formula import CnfXorFormula, FormulaError, Xor, add_xors, check_sol, projection_key
from mc_cert.io_certificate import Certificate, CertRound, proof_sidecar
from mc_cert.io_dimacs import write_formula
from mc_cert.io_xlrup import XlrupParseError, read_xlrup
from mc_cert.params import PacParams, find_median
from mc_cert.randomness import (
    InsufficientRandomnessError,
    RandomBitStream,
    random_seed_xors,
    required_bits,
)
from mc_cert.solver import SolverConfig, Unsat, blocked_instance, solve
from mc_cert.xlrup import DEFAULT_IMPLICATION_WIDTH, CheckResult, ProofStep, Rejected, check_proof

ORACLE_STRATEGIES = ("solve", "proof-dir", "command")


class CertificateError(RuntimeError):
    """A certificate condition failed. round_no is None for the initial list."""

    def __init__(self, round_no: Optional[int], condition: str, detail: str) -> None:
        self.round_no = round_no
        self.condition = condition
        self.detail = detail
        where = "initial list" if round_no is None else f"round {round_no}"
        super().__init__(f"{where}, condition {condition}: {detail}")

    def __reduce__(self):
        return (type(self), (self.round_no, self.condition, self.detail))


# -----------------------------
# UNSAT oracle
# -----------------------------
@dataclass(frozen=True)
class UnsatOracle:
    """
    Source of UNSAT proofs for reconstructed instances. Whatever the strategy,
    a verdict only counts once xlrup.check_proof verifies the proof against the
    instance the checker built itself.
      - solve:     embedded solver, one fresh instance per call
      - proof-dir: `<proof_dir>/<stem>.<label>.xlrup` sidecars
      - command:   external tool; template fields {instance} and {proof}
    """

    strategy: str
    proof_dir: Optional[Path] = None
    stem: str = ""
    command: Optional[str] = None
    config: SolverConfig = field(default_factory=SolverConfig)
    width_cap: int = DEFAULT_IMPLICATION_WIDTH

    def __post_init__(self) -> None:
        if self.strategy not in ORACLE_STRATEGIES:
            raise ValueError(f"unknown oracle strategy {self.strategy!r}; expected one of {ORACLE_STRATEGIES}")
        if self.strategy == "proof-dir" and self.proof_dir is None:
            raise ValueError("proof-dir oracle needs a proof_dir")
        if self.strategy == "command" and not self.command:
            raise ValueError("command oracle needs a command template")

    @classmethod
    def embedded(cls, config: Optional[SolverConfig] = None, *, width_cap: int = DEFAULT_IMPLICATION_WIDTH) -> "UnsatOracle":
        return cls("solve", config=config or SolverConfig(), width_cap=width_cap)

    @classmethod
    def sidecars(cls, proof_dir: Path, stem: str, *, width_cap: int = DEFAULT_IMPLICATION_WIDTH) -> "UnsatOracle":
        return cls("proof-dir", proof_dir=Path(proof_dir), stem=stem, width_cap=width_cap)

    @classmethod
    def external(cls, command: str, *, width_cap: int = DEFAULT_IMPLICATION_WIDTH) -> "UnsatOracle":
        return cls("command", command=command, width_cap=width_cap)

    def _proof_from_dir(self, label: str) -> list[ProofStep] | Rejected:
        assert self.proof_dir is not None
        path = proof_sidecar(Path(f"{self.stem}.cert"), label, proof_dir=self.proof_dir)
        if not path.exists():
            return Rejected(0, f"missing proof file {path}")
        return read_xlrup(path)

    def _proof_from_command(self, instance: CnfXorFormula, label: str) -> list[ProofStep] | Rejected:
        assert self.command is not None
        with tempfile.TemporaryDirectory(prefix="mc_cert_") as tmp:
            cnf_path = write_formula(Path(tmp) / f"{label}.cnf", instance)
            proof_path = Path(tmp) / f"{label}.xlrup"
            cmd = shlex.split(self.command.format(instance=str(cnf_path), proof=str(proof_path)))
            try:
                proc = subprocess.run(cmd, capture_output=True, text=True, check=False)
            except FileNotFoundError as e:
                return Rejected(0, f"UNSAT command not found: {e}")
            if not proof_path.exists():
                tail = (proc.stderr or proc.stdout).strip()[-200:]
                return Rejected(0, f"UNSAT command exited {proc.returncode} without a proof: {tail}")
            return read_xlrup(proof_path)

    def confirm_unsat(self, instance: CnfXorFormula, label: str) -> CheckResult:
        try:
            if self.strategy == "solve":
                result = solve(instance, self.config)
                if not isinstance(result, Unsat):
                    return Rejected(0, "instance is satisfiable")
                steps: list[ProofStep] | Rejected = list(result.proof)
            elif self.strategy == "proof-dir":
                steps = self._proof_from_dir(label)
            else:
                steps = self._proof_from_command(instance, label)
        except XlrupParseError as e:
            return Rejected(0, f"proof does not parse: {e}")
        if isinstance(steps, Rejected):
            return steps
        return check_proof(instance, steps, width_cap=self.width_cap)


# -----------------------------
# Conditions
# -----------------------------
def _validate_models(
    F: CnfXorFormula,
    proj: Sequence[int],
    xors: Sequence[Xor],
    models: Sequence[Mapping[int, bool]],
    *,
    round_no: Optional[int],
    condition: str,
    what: str,
) -> None:
    G = add_xors(F, xors)
    seen: set[tuple[bool, ...]] = set()
    for i, w in enumerate(models, start=1):
        try:
            ok = check_sol(G, w)
        except FormulaError as e:
            raise CertificateError(round_no, condition, f"{what} solution {i}: {e}") from e
        if not ok:
            raise CertificateError(
                round_no, condition, f"{what} solution {i} does not satisfy the formula with {len(xors)} xors"
            )
        key = projection_key(w, proj)
        if key in seen:
            raise CertificateError(round_no, condition, f"{what} solution {i} is a projected duplicate")
        seen.add(key)


def _require_unsat(
    oracle: UnsatOracle,
    instance: CnfXorFormula,
    label: str,
    *,
    round_no: Optional[int],
    condition: str,
) -> None:
    verdict = oracle.confirm_unsat(instance, label)
    if isinstance(verdict, Rejected):
        raise CertificateError(
            round_no, condition, f"UNSAT claim not verified (step {verdict.index}: {verdict.reason})"
        )


def check_round(
    F: CnfXorFormula,
    proj: Sequence[int],
    thresh: int,
    round_xors: Sequence[Xor],
    rnd: CertRound,
    oracle: UnsatOracle,
    *,
    round_no: int = 1,
) -> int:
    """
    Enforce the three round conditions and return the round's estimate.
      1. 1 <= m <= |S|-1, or m == |S| for a failed round (no list_hi)
      2. at least thresh distinct models of F + first m-1 XORs (first thresh checked)
      3. fewer than thresh distinct models of F + first m XORs, and F + m XORs +
         a ban per listed model is UNSAT by a verified proof
    """
    k = len(proj)
    if len(round_xors) != k - 1:
        raise CertificateError(round_no, "1", f"round has {len(round_xors)} xors, expected {k - 1}")
    m = rnd.m
    if not 1 <= m <= k:
        raise CertificateError(round_no, "1", f"m={m} outside 1..{k}")
    failed = m == k
    if failed != (rnd.list_hi is None):
        raise CertificateError(round_no, "1", "list after m xors must be absent exactly for a failed round")

    if len(rnd.list_lo) < thresh:
        raise CertificateError(round_no, "2", f"{len(rnd.list_lo)} solutions after m-1 xors, need {thresh}")
    _validate_models(
        F, proj, round_xors[: m - 1], rnd.list_lo[:thresh],
        round_no=round_no, condition="2", what="m-1",
    )
    if failed:
        return 2**k

    hi = rnd.list_hi
    assert hi is not None
    if len(hi) >= thresh:
        raise CertificateError(round_no, "3", f"{len(hi)} solutions after m xors, need fewer than {thresh}")
    _validate_models(F, proj, round_xors[:m], hi, round_no=round_no, condition="3", what="m")
    _require_unsat(
        oracle, blocked_instance(F, proj, round_xors[:m], hi), f"round{round_no}",
        round_no=round_no, condition="3",
    )
    return (2**m) * len(hi)


@dataclass(frozen=True)
class CheckedCount:
    count: int
    exact: bool
    bits_used: int
    estimates: tuple[int, ...] = ()


def check_certificate(
    F: CnfXorFormula,
    proj: Sequence[int],
    params: PacParams,
    stream: RandomBitStream,
    cert: Certificate,
    oracle: UnsatOracle,
    *,
    jobs: int = 1,
) -> CheckedCount:
    """
    Re-derive the count a certificate claims, trusting nothing but F, the
    parameters and the bit stream. Raises CertificateError on the first failed
    condition (rounds reported in round order).
    """
    if cert.m0 != 0:
        raise CertificateError(None, "m0", f"m0 must be 0, got {cert.m0}")
    thresh, t = params.thresh, params.rounds
    need = required_bits(len(proj), t)
    if need > stream.remaining:
        raise InsufficientRandomnessError(need, stream.remaining)
    start = stream.cursor
    round_xors = random_seed_xors(stream, proj, t)
    bits_used = stream.cursor - start

    init = cert.init_models
    if len(init) < thresh:
        if cert.rounds:
            raise CertificateError(None, "rounds", "exact-case certificate must not contain rounds")
        _validate_models(F, proj, (), init, round_no=None, condition="init", what="initial")
        _require_unsat(oracle, blocked_instance(F, proj, (), init), "init", round_no=None, condition="init")
        return CheckedCount(count=len(init), exact=True, bits_used=bits_used)

    _validate_models(F, proj, (), init[:thresh], round_no=None, condition="init", what="initial")
    if len(cert.rounds) != t:
        raise CertificateError(None, "rounds", f"certificate has {len(cert.rounds)} rounds, expected {t}")

    if jobs <= 1:
        estimates = [
            check_round(F, proj, thresh, xs, rnd, oracle, round_no=r)
            for r, (xs, rnd) in enumerate(zip(round_xors, cert.rounds), start=1)
        ]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(check_round, F, proj, thresh, xs, rnd, oracle, round_no=r)
                for r, (xs, rnd) in enumerate(zip(round_xors, cert.rounds), start=1)
            ]
            estimates = [fut.result() for fut in futures]

    return CheckedCount(
        count=find_median(estimates),
        exact=False,
        bits_used=bits_used,
        estimates=tuple(estimates),
    )
