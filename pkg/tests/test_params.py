from __future__ import annotations

from fractions import Fraction

import pytest

from mc_cert.params import (
    ROUND_FAILURE,
    PacParams,
    ParamsError,
    binomial_tail,
    compute_t,
    compute_thresh,
    find_median,
    parse_rational,
)


@pytest.mark.parametrize("eps, thresh", [("0.8", 73), ("1", 61), ("3", 32)])
def test_compute_thresh(eps: str, thresh: int) -> None:
    assert compute_thresh(Fraction(eps)) == thresh


def test_compute_thresh_decreases_with_epsilon() -> None:
    values = [compute_thresh(Fraction(e, 10)) for e in range(2, 60)]
    assert values == sorted(values, reverse=True)


@pytest.mark.parametrize(
    "delta, t",
    [("0.5", 1), ("0.36", 1), ("0.3", 3), ("0.25", 7), ("0.2", 9)],
)
def test_compute_t(delta: str, t: int) -> None:
    assert compute_t(Fraction(delta)) == t


def test_compute_t_is_smallest_odd_meeting_delta() -> None:
    for d in range(1, 50):
        delta = Fraction(d, 100)
        t = compute_t(delta)
        assert t % 2 == 1
        assert binomial_tail(t, (t + 1) // 2, ROUND_FAILURE) <= delta
        if t > 1:
            assert binomial_tail(t - 2, (t - 1) // 2, ROUND_FAILURE) > delta


def test_compute_t_respects_min_rounds() -> None:
    assert compute_t(Fraction(1, 2), 4) == 5
    assert compute_t(Fraction(1, 2), 5) == 5
    assert compute_t(Fraction(1, 5), 3) == 9


def test_binomial_tail_examples() -> None:
    assert binomial_tail(1, 1, ROUND_FAILURE) == Fraction(9, 25)
    assert binomial_tail(3, 2, Fraction(1, 2)) == Fraction(1, 2)
    assert binomial_tail(4, 0, Fraction(1, 3)) == 1
    with pytest.raises(ParamsError):
        binomial_tail(2, 3, Fraction(1, 2))


def test_parse_rational_is_exact() -> None:
    assert parse_rational("0.8", name="epsilon") == Fraction(4, 5)
    assert parse_rational(" 1/3 ", name="delta") == Fraction(1, 3)
    with pytest.raises(ParamsError):
        parse_rational("eight", name="epsilon")


@pytest.mark.parametrize(
    "eps, delta",
    [("0", "0.2"), ("-1", "0.2"), ("0.8", "0"), ("0.8", "1.5")],
)
def test_pac_params_rejects_out_of_range(eps: str, delta: str) -> None:
    with pytest.raises(ParamsError):
        PacParams.parse(eps, delta)


def test_pac_params_properties() -> None:
    p = PacParams.parse("0.8", "0.2")
    assert p.thresh == 73
    assert p.rounds == 9
    assert PacParams.parse("3", "0.5", min_rounds=3).rounds == 3


def test_find_median() -> None:
    assert find_median([5]) == 5
    assert find_median([3, 1, 2]) == 2
    assert find_median([8, 8, 1, 9, 4]) == 8
    with pytest.raises(ParamsError):
        find_median([])
