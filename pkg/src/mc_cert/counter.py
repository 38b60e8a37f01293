from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from mc_cert.formula import CnfXorFormula, Xor
from mc_cert.io_certificate import Certificate, CertRound
from mc_cert.params import PacParams, find_median
from mc_cert.randomness import (
    InsufficientRandomnessError,
    RandomBitStream,
    random_seed_xors,
    required_bits,
)
from mc_cert.solver import BoundedResult, SolverConfig, bounded_count
from mc_cert.xlrup import XlrupProof

FIND_M_STRATEGIES = ("linear", "galloping")


@dataclass(frozen=True)
class RoundResult:
    m: int
    list_lo: tuple[dict[int, bool], ...]
    list_hi: Optional[tuple[dict[int, bool], ...]]
    estimate: int
    proof: Optional[XlrupProof] = None
    # prefix length -> bounded count, for every prefix the search probed
    counts: dict[int, int] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.list_hi is None


@dataclass(frozen=True)
class CountResult:
    count: int
    certificate: Certificate
    thresh: int
    t: int
    bits_used: int
    init_proof: Optional[XlrupProof] = None
    rounds: tuple[RoundResult, ...] = ()

    @property
    def exact(self) -> bool:
        return not self.rounds

    @property
    def round_proofs(self) -> tuple[Optional[XlrupProof], ...]:
        return tuple(r.proof for r in self.rounds)


class _PrefixCounter:
    """Bounded counts under the first i XORs, each computed at most once."""

    def __init__(
        self,
        F: CnfXorFormula,
        proj: Sequence[int],
        thresh: int,
        xors: Sequence[Xor],
        config: Optional[SolverConfig],
        initial: Optional[BoundedResult] = None,
    ) -> None:
        self.F, self.proj, self.thresh, self.xors, self.config = F, tuple(proj), thresh, tuple(xors), config
        self._cache: dict[int, BoundedResult] = {}
        if initial is not None:
            self._cache[0] = initial

    def __call__(self, i: int) -> BoundedResult:
        if i not in self._cache:
            self._cache[i] = bounded_count(self.F, self.proj, self.thresh, self.xors[:i], self.config)
        return self._cache[i]

    def below(self, i: int) -> bool:
        return self(i).count < self.thresh

    @property
    def counts(self) -> dict[int, int]:
        return {i: r.count for i, r in sorted(self._cache.items())}


def _linear(probe: _PrefixCounter, last: int) -> Optional[int]:
    for m in range(1, last + 1):
        if probe.below(m):
            return m
    return None


def _galloping(probe: _PrefixCounter, last: int) -> Optional[int]:
    # Counts never increase with more XORs, so "below thresh" is monotone in m.
    if last < 1:
        return None
    lo, hi = 0, 1
    while hi < last and not probe.below(hi):
        lo, hi = hi, min(2 * hi, last)
    if not probe.below(hi):
        return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probe.below(mid):
            hi = mid
        else:
            lo = mid
    return hi


_SEARCHES: dict[str, Callable[[_PrefixCounter, int], Optional[int]]] = {
    "linear": _linear,
    "galloping": _galloping,
}


def _search(strategy: str) -> Callable[[_PrefixCounter, int], Optional[int]]:
    try:
        return _SEARCHES[strategy]
    except KeyError:
        raise ValueError(f"unknown find-m strategy {strategy!r}; expected one of {FIND_M_STRATEGIES}") from None


def find_m(
    F: CnfXorFormula,
    proj: Sequence[int],
    xors: Sequence[Xor],
    thresh: int,
    *,
    strategy: str = "linear",
    config: Optional[SolverConfig] = None,
) -> Optional[int]:
    """Smallest m in 1..|proj|-1 whose bounded count drops below thresh, or None (failed round)."""
    probe = _PrefixCounter(F, proj, thresh, xors, config)
    return _search(strategy)(probe, len(proj) - 1)


def approxmc_core(
    F: CnfXorFormula,
    proj: Sequence[int],
    thresh: int,
    xors: Sequence[Xor],
    *,
    strategy: str = "linear",
    config: Optional[SolverConfig] = None,
    initial: Optional[BoundedResult] = None,
) -> RoundResult:
    """
    One round on pre-sampled XORs.
      - success: lists at m-1 and m XORs, estimate 2^m * |list_hi|
      - failed: m = |S|, list_lo at |S|-1 XORs, estimate 2^|S|
    """
    search = _search(strategy)
    probe = _PrefixCounter(F, proj, thresh, xors, config, initial)
    last = len(proj) - 1
    m = search(probe, last)
    if m is None:
        return RoundResult(
            m=len(proj),
            list_lo=probe(last).models,
            list_hi=None,
            estimate=2 ** len(proj),
            counts=probe.counts,
        )
    hi = probe(m)
    return RoundResult(
        m=m,
        list_lo=probe(m - 1).models,
        list_hi=hi.models,
        estimate=(2**m) * hi.count,
        proof=hi.proof,
        counts=probe.counts,
    )


def approxmc(
    F: CnfXorFormula,
    proj: Sequence[int],
    params: PacParams,
    stream: RandomBitStream,
    *,
    strategy: str = "linear",
    config: Optional[SolverConfig] = None,
    verbose: bool = False,
) -> CountResult:
    """
    Approximate projected count with a partial certificate.

    All round XORs are sampled before any counting, including when the initial
    enumeration settles the count exactly, so a checker replaying the same bit
    file ends at the same cursor.
    """
    thresh, t = params.thresh, params.rounds
    need = required_bits(len(proj), t)
    if need > stream.remaining:
        raise InsufficientRandomnessError(need, stream.remaining)
    start = stream.cursor
    round_xors = random_seed_xors(stream, proj, t)
    bits_used = stream.cursor - start

    initial = bounded_count(F, proj, thresh, (), config)
    if initial.count < thresh:
        if verbose:
            print(f"[approxmc] exact case: {initial.count} < thresh {thresh}", file=sys.stderr)
        return CountResult(
            count=initial.count,
            certificate=Certificate(0, initial.models, ()),
            thresh=thresh,
            t=t,
            bits_used=bits_used,
            init_proof=initial.proof,
        )

    rounds: list[RoundResult] = []
    for r, xs in enumerate(round_xors, start=1):
        res = approxmc_core(F, proj, thresh, xs, strategy=strategy, config=config, initial=initial)
        if verbose:
            print(f"[approxmc] round {r}/{t}: m={res.m} estimate={res.estimate}", file=sys.stderr)
        rounds.append(res)

    cert = Certificate(
        0,
        initial.models,
        tuple(CertRound(r.m, r.list_lo, r.list_hi) for r in rounds),
    )
    return CountResult(
        count=find_median([r.estimate for r in rounds]),
        certificate=cert,
        thresh=thresh,
        t=t,
        bits_used=bits_used,
        rounds=tuple(rounds),
    )
