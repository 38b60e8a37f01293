from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

# Per-round failure bound used in the median amplification.
ROUND_FAILURE = Fraction(9, 25)
THRESH_CONSTANT = Fraction(984, 100)


class ParamsError(ValueError):
    pass


def parse_rational(text: str, *, name: str) -> Fraction:
    """Parse a decimal string such as "0.8" exactly; floats never enter."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ParamsError(f"{name} is not a decimal number: {text!r}") from e


@dataclass(frozen=True)
class PacParams:
    epsilon: Fraction
    delta: Fraction
    min_rounds: int = 1

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ParamsError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 < self.delta <= 1:
            raise ParamsError(f"delta must be in (0, 1], got {self.delta}")
        if self.min_rounds < 1:
            raise ParamsError(f"min_rounds must be >= 1, got {self.min_rounds}")

    @classmethod
    def parse(cls, epsilon: str, delta: str, min_rounds: int = 1) -> "PacParams":
        return cls(
            epsilon=parse_rational(epsilon, name="epsilon"),
            delta=parse_rational(delta, name="delta"),
            min_rounds=int(min_rounds),
        )

    @property
    def thresh(self) -> int:
        return compute_thresh(self.epsilon)

    @property
    def rounds(self) -> int:
        return compute_t(self.delta, self.min_rounds)


def compute_thresh(eps: Fraction) -> int:
    """1 + ceil(9.84 * (1 + eps/(1+eps)) * (1 + 1/eps)^2), exact."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ParamsError(f"epsilon must be > 0, got {eps}")
    value = THRESH_CONSTANT * (1 + eps / (1 + eps)) * (1 + 1 / eps) ** 2
    return 1 + math.ceil(value)


def binomial_tail(t: int, k: int, p: Fraction) -> Fraction:
    """P[Binomial(t, p) >= k] as an exact rational."""
    p = Fraction(p)
    if not 0 <= k <= t:
        raise ParamsError(f"need 0 <= k <= t, got k={k}, t={t}")
    if not 0 <= p <= 1:
        raise ParamsError(f"p must be in [0, 1], got {p}")
    q = 1 - p
    return sum((math.comb(t, i) * p**i * q ** (t - i) for i in range(k, t + 1)), Fraction(0))


def compute_t(delta: Fraction, min_rounds: int = 1) -> int:
    """Smallest odd t >= min_rounds whose median failure tail is <= delta."""
    delta = Fraction(delta)
    if not 0 < delta <= 1:
        raise ParamsError(f"delta must be in (0, 1], got {delta}")
    if min_rounds < 1:
        raise ParamsError(f"min_rounds must be >= 1, got {min_rounds}")
    t = min_rounds if min_rounds % 2 == 1 else min_rounds + 1
    while binomial_tail(t, (t + 1) // 2, ROUND_FAILURE) > delta:
        t += 2
    return t


def find_median(values: Sequence[int]) -> int:
    if not values:
        raise ParamsError("median of an empty list")
    return sorted(values)[len(values) // 2]
