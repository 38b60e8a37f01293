from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from mc_cert.certcheck import CertificateError, UnsatOracle, check_certificate
from mc_cert.counter import approxmc
from mc_cert.formula import CnfXorFormula
from mc_cert.io_bits import read_bit_stream, required_bytes, write_random_bits
from mc_cert.io_certificate import read_certificate, write_certificate_bundle
from mc_cert.oracle import exact_projected_count
from mc_cert.params import PacParams
from mc_cert.solver import SolverConfig
from mc_cert.xlrup import DEFAULT_IMPLICATION_WIDTH

TRIALS_CSV = "pac_eval_trials.csv"


@dataclass(frozen=True)
class TrialRow:
    trial: int
    count: int
    certified: Optional[int]
    accepted: bool
    exact_case: bool
    within: bool
    bits_used: int
    error: str = ""


@dataclass(frozen=True)
class PacReport:
    exact: int
    epsilon: Fraction
    delta: Fraction
    lower: Fraction
    upper: Fraction
    rows: tuple[TrialRow, ...]

    @property
    def trials(self) -> int:
        return len(self.rows)

    @property
    def failures(self) -> int:
        return sum(1 for r in self.rows if not r.within)

    @property
    def rejected(self) -> int:
        return sum(1 for r in self.rows if not r.accepted)

    @property
    def failure_fraction(self) -> Fraction:
        return Fraction(self.failures, self.trials) if self.rows else Fraction(0)

    @property
    def meets_delta(self) -> Optional[bool]:
        """None for a single trial: one sample supports no claim."""
        if self.trials < 2:
            return None
        return self.failure_fraction <= self.delta

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.rows])


def envelope(exact: int, epsilon: Fraction) -> tuple[Fraction, Fraction]:
    return Fraction(exact) / (1 + epsilon), (1 + epsilon) * exact


def within_envelope(count: int, exact: int, epsilon: Fraction) -> bool:
    lo, hi = envelope(exact, epsilon)
    return lo <= count <= hi


def run_trial(
    F: CnfXorFormula,
    proj: Sequence[int],
    params: PacParams,
    exact: int,
    workdir: Path,
    trial: int,
    *,
    strategy: str = "linear",
    config: Optional[SolverConfig] = None,
    width_cap: int = DEFAULT_IMPLICATION_WIDTH,
) -> TrialRow:
    """One count + certcheck cycle on a fresh bit file."""
    stem = f"trial{trial:04d}"
    bits_path = write_random_bits(workdir / f"{stem}.bin", required_bytes(len(proj), params.rounds))

    result = approxmc(F, proj, params, read_bit_stream(bits_path), strategy=strategy, config=config)
    cert_path = workdir / f"{stem}.cert"
    write_certificate_bundle(
        cert_path,
        result.certificate,
        init_proof=result.init_proof,
        round_proofs=result.round_proofs,
    )

    certified: Optional[int] = None
    error = ""
    try:
        cert = read_certificate(cert_path, F.num_vars, proj_size=len(proj))
        oracle = UnsatOracle.sidecars(workdir, stem, width_cap=width_cap)
        certified = check_certificate(F, proj, params, read_bit_stream(bits_path), cert, oracle).count
    except (CertificateError, ValueError) as e:
        error = f"{type(e).__name__}: {e}"

    return TrialRow(
        trial=trial,
        count=result.count,
        certified=certified,
        accepted=certified is not None and certified == result.count,
        exact_case=result.exact,
        within=within_envelope(result.count, exact, params.epsilon),
        bits_used=result.bits_used,
        error=error,
    )


def pac_eval(
    F: CnfXorFormula,
    params: PacParams,
    trials: int,
    workdir: Path,
    *,
    proj: Optional[Sequence[int]] = None,
    jobs: int = 1,
    strategy: str = "linear",
    config: Optional[SolverConfig] = None,
    width_cap: int = DEFAULT_IMPLICATION_WIDTH,
    verbose: bool = False,
) -> PacReport:
    """
    Run `trials` independent count/certcheck cycles and compare each count with
    the brute-force projected count. Each trial gets its own bit file, so trials
    may run concurrently.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    proj = tuple(proj) if proj is not None else F.proj
    exact = exact_projected_count(F, proj).value
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)

    trial_args = (F, proj, params, exact, workdir)
    trial_kwargs = dict(strategy=strategy, config=config, width_cap=width_cap)

    def _report(row: TrialRow) -> TrialRow:
        if verbose:
            print(
                f"[pac-eval] trial {row.trial}/{trials}: count={row.count} certified={row.certified} within={row.within}",
                file=sys.stderr,
            )
        return row

    if jobs <= 1:
        rows = [_report(run_trial(*trial_args, i, **trial_kwargs)) for i in range(1, trials + 1)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_trial, *trial_args, i, **trial_kwargs) for i in range(1, trials + 1)]
            rows = [_report(fut.result()) for fut in futures]

    lo, hi = envelope(exact, params.epsilon)
    return PacReport(
        exact=exact,
        epsilon=params.epsilon,
        delta=params.delta,
        lower=lo,
        upper=hi,
        rows=tuple(rows),
    )


def write_trials_csv(report: PacReport, out_dir: Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / TRIALS_CSV
    report.frame().to_csv(out_path, index=False)
    return out_path
