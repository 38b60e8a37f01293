from __future__ import annotations

import random

import pytest

from corpus import random_formula
from mc_cert.counter import approxmc, approxmc_core, find_m
from mc_cert.formula import CnfXorFormula, Xor, add_xors, check_sol
from mc_cert.oracle import exact_projected_count
from mc_cert.params import PacParams
from mc_cert.randomness import (
    InsufficientRandomnessError,
    RandomBitStream,
    random_seed_xors,
    required_bits,
)
from mc_cert.solver import blocked_instance
from mc_cert.xlrup import Verified, check_proof

FAST = PacParams.parse("3", "0.5")  # thresh 32, one round
FAST3 = PacParams.parse("3", "0.3")  # thresh 32, three rounds


def _bits(seed: int, proj_size: int, params: PacParams) -> RandomBitStream:
    rng = random.Random(seed)
    nbytes = (required_bits(proj_size, params.rounds) + 7) // 8
    return RandomBitStream(rng.randbytes(nbytes))


def _capped(F: CnfXorFormula, proj, xors, thresh: int) -> int:
    return min(exact_projected_count(add_xors(F, xors), proj).value, thresh)


# -----------------------------
# find_m
# -----------------------------
@pytest.mark.parametrize("strategy", ["linear", "galloping"])
def test_find_m_matches_oracle(strategy: str) -> None:
    rng = random.Random(17)
    for _ in range(40):
        F = random_formula(rng, min_vars=4, max_vars=7, unsat_rate=0.0)
        proj = F.proj
        if len(proj) < 2:
            continue
        xors = [
            Xor.from_vars(rng.sample(proj, rng.randint(0, len(proj))), rng.randint(0, 1))
            for _ in range(len(proj) - 1)
        ]
        thresh = rng.randint(1, 6)
        expected = next(
            (m for m in range(1, len(proj)) if _capped(F, proj, xors[:m], thresh) < thresh),
            None,
        )
        assert find_m(F, proj, xors, thresh, strategy=strategy) == expected


def test_find_m_unknown_strategy(pairs: CnfXorFormula) -> None:
    with pytest.raises(ValueError, match="unknown find-m strategy"):
        find_m(pairs, pairs.proj, [], 4, strategy="bisect")


# -----------------------------
# Single rounds
# -----------------------------
def test_failed_round_estimates_two_to_the_projection_size() -> None:
    F = CnfXorFormula.build(6)
    res = approxmc_core(F, F.proj, 32, [Xor((), 0)] * 5)
    assert res.failed
    assert res.m == 6
    assert res.estimate == 64
    assert len(res.list_lo) == 32
    assert res.proof is None


def test_round_with_contradictory_first_xor() -> None:
    F = CnfXorFormula.build(6)
    xors = [Xor((), 1)] + [Xor((1,), 0)] * 4
    res = approxmc_core(F, F.proj, 32, xors)
    assert res.m == 1
    assert res.list_hi == ()
    assert res.estimate == 0
    assert len(res.list_lo) == 32
    assert isinstance(check_proof(blocked_instance(F, F.proj, xors[:1], ()), res.proof), Verified)


def test_round_lists_and_counts(pairs: CnfXorFormula) -> None:
    xors = random_seed_xors(_bits(3, 10, FAST), pairs.proj, 1)[0]
    res = approxmc_core(pairs, pairs.proj, 32, xors)
    assert not res.failed
    assert len(res.list_lo) == 32
    assert len(res.list_hi) < 32
    assert res.estimate == 2**res.m * len(res.list_hi)
    assert all(check_sol(add_xors(pairs, xors[: res.m]), w) for w in res.list_hi)
    for i, c in res.counts.items():
        assert c == _capped(pairs, pairs.proj, xors[:i], 32)
    proof_instance = blocked_instance(pairs, pairs.proj, xors[: res.m], res.list_hi)
    assert isinstance(check_proof(proof_instance, res.proof), Verified)


# -----------------------------
# Full counts
# -----------------------------
def test_exact_case_small_formula() -> None:
    F = CnfXorFormula.build(3, [(1,)])
    result = approxmc(F, F.proj, FAST, _bits(1, 3, FAST))
    assert result.exact
    assert result.count == 4
    assert result.certificate.rounds == ()
    assert len(result.certificate.init_models) == 4
    assert result.bits_used == required_bits(3, 1)
    assert isinstance(check_proof(blocked_instance(F, F.proj, (), result.certificate.init_models), result.init_proof), Verified)


def test_unsat_formula_counts_zero(tiny_unsat: CnfXorFormula) -> None:
    result = approxmc(tiny_unsat, tiny_unsat.proj, FAST, _bits(1, 3, FAST))
    assert result.count == 0
    assert result.certificate.init_models == ()
    assert isinstance(check_proof(tiny_unsat, result.init_proof), Verified)


def test_count_consumes_all_bits_even_in_exact_case() -> None:
    F = CnfXorFormula.build(4, [(1,), (2,)])
    stream = _bits(5, 4, FAST3)
    approxmc(F, F.proj, FAST3, stream)
    assert stream.cursor == required_bits(4, 3)


def test_count_is_deterministic_given_bits(pairs: CnfXorFormula) -> None:
    a = approxmc(pairs, pairs.proj, FAST3, _bits(8, 10, FAST3))
    b = approxmc(pairs, pairs.proj, FAST3, _bits(8, 10, FAST3))
    assert a.count == b.count
    assert a.certificate == b.certificate
    assert len(a.rounds) == 3
    assert a.count == sorted(r.estimate for r in a.rounds)[1]


def test_strategies_agree(pairs: CnfXorFormula) -> None:
    a = approxmc(pairs, pairs.proj, FAST3, _bits(4, 10, FAST3), strategy="linear")
    b = approxmc(pairs, pairs.proj, FAST3, _bits(4, 10, FAST3), strategy="galloping")
    assert a.count == b.count
    assert [r.m for r in a.rounds] == [r.m for r in b.rounds]


def test_insufficient_bits(pairs: CnfXorFormula) -> None:
    stream = RandomBitStream(b"\x00" * 10)
    with pytest.raises(InsufficientRandomnessError):
        approxmc(pairs, pairs.proj, FAST, stream)
    assert stream.cursor == 0


def test_projection_subset(pairs: CnfXorFormula) -> None:
    proj = (1, 2, 3, 6)
    result = approxmc(pairs, proj, FAST, _bits(2, 4, FAST))
    assert result.exact
    assert result.count == exact_projected_count(pairs, proj).value


@pytest.mark.slow
def test_default_parameters_on_pairs(pairs: CnfXorFormula) -> None:
    params = PacParams.parse("0.8", "0.2")
    result = approxmc(pairs, pairs.proj, params, _bits(12, 10, params))
    assert result.thresh == 73
    assert result.t == 9
    assert len(result.rounds) == 9
