from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from mc_cert.certcheck import CertificateError, UnsatOracle, check_certificate
from mc_cert.config import Settings, get_settings
from mc_cert.counter import FIND_M_STRATEGIES, approxmc
from mc_cert.formula import CnfXorFormula, assignment_to_lits
from mc_cert.io_bits import read_bit_stream, required_bytes, write_random_bits
from mc_cert.io_certificate import CertificateParseError, read_certificate, write_certificate_bundle
from mc_cert.io_dimacs import read_formula
from mc_cert.io_xlrup import read_xlrup, write_xlrup
from mc_cert.oracle import OracleGuardError, exact_projected_count
from mc_cert.ops_context import RunContext
from mc_cert.ops_metrics import write_run_metrics
from mc_cert.ops_runlog import write_last_success
from mc_cert.pac_eval import pac_eval, write_trials_csv
from mc_cert.params import PacParams
from mc_cert.randomness import InsufficientRandomnessError
from mc_cert.solver import BlastWidthError, BudgetExceeded, SolverConfig, Sat, solve
from mc_cert.xlrup import Rejected, check_proof

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_INTERNAL = 4


# -----------------------------
# Metrics wrapper
# -----------------------------
def _run_with_metrics(ctx: RunContext, s: Settings, fn: Callable[[], int]) -> int:
    """
    Run a command, map failures onto exit codes, and record the run:
    one metrics JSON per run, plus the last-success ledger on exit 0.
    """
    error: Optional[str] = None
    try:
        rc = int(fn())
    except CertificateError as e:
        rc, error = EXIT_REJECTED, f"{type(e).__name__}: {e}"
        ctx.extra["round"] = e.round_no
        ctx.extra["condition"] = e.condition
    except (BudgetExceeded, InsufficientRandomnessError, BlastWidthError, OracleGuardError) as e:
        rc, error = EXIT_RESOURCE, f"{type(e).__name__}: {e}"
    except (ValueError, OSError) as e:
        rc, error = EXIT_USAGE, f"{type(e).__name__}: {e}"
    except Exception as e:
        rc, error = EXIT_INTERNAL, f"{type(e).__name__}: {e}"

    ctx.end()
    if error is not None:
        print(f"s ERROR {error}")
    elif rc != EXIT_OK:
        error = str(ctx.extra.get("reason", f"exit {rc}"))

    metrics_path = write_run_metrics(ctx, exit_code=rc, error=error, metrics_dir=s.metrics_dir)
    ctx.add_output("metrics_json", str(metrics_path))
    if rc == EXIT_OK:
        write_last_success(
            ctx.service,
            {
                "duration_s": round(ctx.duration_s, 2),
                "params": ctx.params,
                "outputs": ctx.outputs,
            },
            state_path=s.state_path,
        )
    return rc


# -----------------------------
# Shared helpers
# -----------------------------
def _params(args: argparse.Namespace, s: Settings) -> PacParams:
    return PacParams.parse(
        args.epsilon if args.epsilon is not None else s.epsilon,
        args.delta if args.delta is not None else s.delta,
        args.min_rounds if args.min_rounds is not None else s.min_rounds,
    )


def _solver_config(args: argparse.Namespace, s: Settings) -> SolverConfig:
    budget = getattr(args, "conflict_budget", None)
    width = getattr(args, "blast_width", None)
    return SolverConfig(
        conflict_budget=budget if budget is not None else s.conflict_budget,
        blast_width=width if width is not None else s.blast_width,
        restart_interval=getattr(args, "restart_interval", None),
    )


def _load(ctx: RunContext, path: str) -> CnfXorFormula:
    F = read_formula(Path(path))
    ctx.add_param("formula", path)
    ctx.extra["num_vars"] = F.num_vars
    ctx.extra["proj_size"] = len(F.proj)
    return F


# -----------------------------
# Commands
# -----------------------------
def _cmd_genbits(args: argparse.Namespace, s: Settings) -> int:
    ctx = RunContext(service="genbits")

    def _impl() -> int:
        if args.bytes is not None:
            nbytes = int(args.bytes)
        else:
            if args.formula is None:
                raise ValueError("genbits needs --formula or --bytes")
            F = _load(ctx, args.formula)
            params = _params(args, s)
            nbytes = required_bytes(len(F.proj), params.rounds)
            ctx.extra["t"] = params.rounds
        out = write_random_bits(Path(args.out), nbytes)
        ctx.add_output("bits", str(out))
        ctx.extra["bytes"] = nbytes
        print(f"c wrote {nbytes} bytes to {out}", file=sys.stderr)
        return EXIT_OK

    return _run_with_metrics(ctx, s, _impl)


def _cmd_count(args: argparse.Namespace, s: Settings) -> int:
    ctx = RunContext(service="count")

    def _impl() -> int:
        F = _load(ctx, args.formula)
        params = _params(args, s)
        ctx.add_param("epsilon", params.epsilon)
        ctx.add_param("delta", params.delta)
        ctx.add_param("bits", args.bits)
        stream = read_bit_stream(Path(args.bits))
        result = approxmc(
            F,
            F.proj,
            params,
            stream,
            strategy=args.find_m or s.find_m,
            config=_solver_config(args, s),
            verbose=args.verbose,
        )
        ctx.extra["thresh"] = result.thresh
        ctx.extra["t"] = result.t
        ctx.extra["bits_used"] = result.bits_used
        ctx.extra["exact_case"] = result.exact
        for r, rnd in enumerate(result.rounds, start=1):
            ctx.add_round(
                r,
                m=rnd.m,
                lo=len(rnd.list_lo),
                hi=None if rnd.list_hi is None else len(rnd.list_hi),
                estimate=rnd.estimate,
            )
        if args.cert:
            written = write_certificate_bundle(
                Path(args.cert),
                result.certificate,
                init_proof=result.init_proof,
                round_proofs=result.round_proofs,
            )
            for label, path in written.items():
                ctx.add_output(label, str(path))
        ctx.extra["count"] = result.count
        print(f"s mc {result.count}")
        return EXIT_OK

    return _run_with_metrics(ctx, s, _impl)


def _implication_width(args: argparse.Namespace, s: Settings) -> int:
    return args.implication_width if args.implication_width is not None else s.implication_width


def _oracle(args: argparse.Namespace, s: Settings) -> UnsatOracle:
    width = _implication_width(args, s)
    if args.solve_unsat:
        return UnsatOracle.embedded(_solver_config(args, s), width_cap=width)
    if args.unsat_command:
        return UnsatOracle.external(args.unsat_command, width_cap=width)
    cert_path = Path(args.cert)
    proof_dir = Path(args.proof_dir) if args.proof_dir else (s.proof_dir or cert_path.parent)
    return UnsatOracle.sidecars(proof_dir, cert_path.stem, width_cap=width)


def _cmd_certcheck(args: argparse.Namespace, s: Settings) -> int:
    ctx = RunContext(service="certcheck")

    def _impl() -> int:
        F = _load(ctx, args.formula)
        params = _params(args, s)
        ctx.add_param("epsilon", params.epsilon)
        ctx.add_param("delta", params.delta)
        ctx.add_param("cert", args.cert)
        ctx.add_param("bits", args.bits)
        stream = read_bit_stream(Path(args.bits))
        oracle = _oracle(args, s)
        ctx.extra["oracle"] = oracle.strategy
        try:
            cert = read_certificate(Path(args.cert), F.num_vars, proj_size=len(F.proj))
        except CertificateParseError as e:
            # A malformed certificate is a rejection, not a usage error.
            raise CertificateError(None, "parse", str(e)) from e
        jobs = args.jobs if args.jobs is not None else s.jobs
        checked = check_certificate(F, F.proj, params, stream, cert, oracle, jobs=jobs)
        ctx.extra["bits_used"] = checked.bits_used
        for r, estimate in enumerate(checked.estimates, start=1):
            ctx.add_round(r, estimate=estimate)
        ctx.extra["count"] = checked.count
        print(f"s mc {checked.count}")
        return EXIT_OK

    return _run_with_metrics(ctx, s, _impl)


def _cmd_xlrup_check(args: argparse.Namespace, s: Settings) -> int:
    ctx = RunContext(service="xlrup-check")

    def _impl() -> int:
        F = _load(ctx, args.formula)
        ctx.add_param("proof", args.proof)
        steps = read_xlrup(Path(args.proof))
        verdict = check_proof(F, steps, width_cap=_implication_width(args, s))
        ctx.extra["steps"] = len(steps)
        if isinstance(verdict, Rejected):
            ctx.extra["reason"] = f"step {verdict.index}: {verdict.reason}"
            print(f"s REJECTED step {verdict.index}: {verdict.reason}")
            return EXIT_REJECTED
        print("s VERIFIED")
        return EXIT_OK

    return _run_with_metrics(ctx, s, _impl)


def _cmd_exact_count(args: argparse.Namespace, s: Settings) -> int:
    ctx = RunContext(service="exact-count")

    def _impl() -> int:
        F = _load(ctx, args.formula)
        n = exact_projected_count(F).value
        ctx.extra["count"] = n
        print(f"s mc {n}")
        return EXIT_OK

    return _run_with_metrics(ctx, s, _impl)


def _cmd_pac_eval(args: argparse.Namespace, s: Settings) -> int:
    ctx = RunContext(service="pac-eval")

    def _impl() -> int:
        F = _load(ctx, args.formula)
        params = _params(args, s)
        ctx.add_param("epsilon", params.epsilon)
        ctx.add_param("delta", params.delta)
        ctx.add_param("trials", args.trials)
        workdir = Path(args.workdir)
        report = pac_eval(
            F,
            params,
            args.trials,
            workdir,
            jobs=args.jobs if args.jobs is not None else s.jobs,
            strategy=args.find_m or s.find_m,
            config=_solver_config(args, s),
            width_cap=_implication_width(args, s),
            verbose=args.verbose,
        )
        csv_path = write_trials_csv(report, workdir)
        ctx.add_output("trials_csv", str(csv_path))
        ctx.extra.update(
            exact=report.exact,
            failures=report.failures,
            rejected=report.rejected,
            failure_fraction=str(report.failure_fraction),
        )

        print(f"c exact {report.exact}")
        print(f"c envelope [{report.lower}, {report.upper}]")
        print(f"c counts {' '.join(str(r.count) for r in report.rows)}")
        print(f"c rejected {report.rejected}/{report.trials}")
        print(f"c failure_fraction {report.failure_fraction} ({float(report.failure_fraction):.4f})")
        if report.meets_delta is None:
            print("s PAC single trial, no claim")
        else:
            print(f"s PAC {'OK' if report.meets_delta else 'FAIL'} delta {report.delta}")

        if report.rejected or report.meets_delta is False:
            ctx.extra["reason"] = "certificate rejected or failure fraction above delta"
            return EXIT_REJECTED
        return EXIT_OK

    return _run_with_metrics(ctx, s, _impl)


def _cmd_solve(args: argparse.Namespace, s: Settings) -> int:
    ctx = RunContext(service="solve")

    def _impl() -> int:
        F = _load(ctx, args.formula)
        result = solve(F, _solver_config(args, s))
        if isinstance(result, Sat):
            ctx.extra["result"] = "sat"
            print("s SATISFIABLE")
            print("v " + " ".join(str(l) for l in assignment_to_lits(result.model)) + " 0")
            return EXIT_OK
        ctx.extra["result"] = "unsat"
        ctx.extra["proof_steps"] = len(result.proof)
        if args.proof_out:
            ctx.add_output("proof", str(write_xlrup(Path(args.proof_out), result.proof)))
        print("s UNSATISFIABLE")
        return EXIT_OK

    return _run_with_metrics(ctx, s, _impl)


# -----------------------------
# CLI
# -----------------------------
def _add_pac_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-e", "--epsilon", default=None, help="Tolerance as a decimal string (default: MC_CERT_EPSILON or 0.8).")
    p.add_argument("-d", "--delta", default=None, help="Confidence as a decimal string (default: MC_CERT_DELTA or 0.2).")
    p.add_argument("--min-rounds", type=int, default=None, help="Minimum number of rounds t (default: 1).")


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--conflict-budget", type=int, default=None, help="Conflicts allowed per solver call.")
    p.add_argument("--blast-width", type=int, default=None, help="Largest XOR converted to clauses (default: 16).")
    p.add_argument("--restart-interval", type=int, default=None, help="Restart every N conflicts (default: off).")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mc-cert")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_bits = sub.add_parser("genbits", help="Write a file of random bytes sized for a count")
    p_bits.add_argument("--out", required=True, help="Bit file to write.")
    p_bits.add_argument("--formula", default=None, help="Size the file for this formula and the PAC parameters.")
    p_bits.add_argument("--bytes", type=int, default=None, help="Write exactly this many bytes instead.")
    _add_pac_args(p_bits)

    p_count = sub.add_parser("count", help="Approximate projected count with a partial certificate")
    p_count.add_argument("--formula", required=True)
    p_count.add_argument("--bits", required=True, help="Trusted random bit file.")
    p_count.add_argument("--cert", default=None, help="Write the certificate here (proof sidecars alongside).")
    p_count.add_argument("--find-m", choices=FIND_M_STRATEGIES, default=None)
    p_count.add_argument("-v", "--verbose", action="store_true")
    _add_pac_args(p_count)
    _add_solver_args(p_count)

    p_check = sub.add_parser("certcheck", help="Check a partial certificate and print the certified count")
    p_check.add_argument("--formula", required=True)
    p_check.add_argument("--cert", required=True)
    p_check.add_argument("--bits", required=True)
    oracle = p_check.add_mutually_exclusive_group()
    oracle.add_argument("--proof-dir", default=None, help="Directory of <cert stem>.<label>.xlrup proofs (default: MC_CERT_PROOF_DIR or the certificate's directory).")
    oracle.add_argument("--solve-unsat", action="store_true", help="Produce UNSAT proofs with the embedded solver.")
    oracle.add_argument("--unsat-command", default=None, help='External prover, e.g. "prover {instance} {proof}".')
    p_check.add_argument("--implication-width", type=int, default=None)
    p_check.add_argument("--jobs", type=int, default=None, help="Check rounds in this many worker processes.")
    _add_pac_args(p_check)
    _add_solver_args(p_check)

    p_xlrup = sub.add_parser("xlrup-check", help="Check an XLRUP proof against a CNF-XOR formula")
    p_xlrup.add_argument("formula")
    p_xlrup.add_argument("proof")
    p_xlrup.add_argument("--implication-width", type=int, default=None)

    p_exact = sub.add_parser("exact-count", help="Brute-force projected count (small formulas only)")
    p_exact.add_argument("--formula", required=True)

    p_pac = sub.add_parser("pac-eval", help="Repeated count + certcheck against the exact count")
    p_pac.add_argument("--formula", required=True)
    p_pac.add_argument("--trials", type=int, default=200)
    p_pac.add_argument("--workdir", required=True, help="Bit files, certificates, proofs and the trials CSV go here.")
    p_pac.add_argument("--jobs", type=int, default=None, help="Run trials in this many worker processes.")
    p_pac.add_argument("--implication-width", type=int, default=None)
    p_pac.add_argument("--find-m", choices=FIND_M_STRATEGIES, default=None)
    p_pac.add_argument("-v", "--verbose", action="store_true")
    _add_pac_args(p_pac)
    _add_solver_args(p_pac)

    p_solve = sub.add_parser("solve", help="Decide a CNF-XOR formula")
    p_solve.add_argument("--formula", required=True)
    p_solve.add_argument("--proof-out", default=None, help="Write the XLRUP refutation here when UNSAT.")
    _add_solver_args(p_solve)

    return parser


_COMMANDS = {
    "genbits": _cmd_genbits,
    "count": _cmd_count,
    "certcheck": _cmd_certcheck,
    "xlrup-check": _cmd_xlrup_check,
    "exact-count": _cmd_exact_count,
    "pac-eval": _cmd_pac_eval,
    "solve": _cmd_solve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.cmd](args, get_settings())


if __name__ == "__main__":
    raise SystemExit(main())
