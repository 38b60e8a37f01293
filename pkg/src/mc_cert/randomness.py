from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from mc_cert.formula import Assignment, Xor


class InsufficientRandomnessError(RuntimeError):
    def __init__(
        self,
        needed: int,
        available: int,
        *,
        round_no: Optional[int] = None,
        index: Optional[int] = None,
    ) -> None:
        self.needed = int(needed)
        self.available = int(available)
        self.round_no = round_no
        self.index = index
        where = ""
        if round_no is not None:
            where = f" (round {round_no}, xor {index})"
        super().__init__(
            f"Insufficient randomness: need {self.needed} more bits, {self.available} available{where}"
        )

    def __reduce__(self):
        return (
            _rebuild_insufficient,
            (self.needed, self.available, self.round_no, self.index),
        )


def _rebuild_insufficient(
    needed: int, available: int, round_no: Optional[int], index: Optional[int]
) -> InsufficientRandomnessError:
    return InsufficientRandomnessError(needed, available, round_no=round_no, index=index)


@dataclass
class RandomBitStream:
    """
    Byte buffer read bit by bit, most-significant bit of each byte first.

    Single owner: counter and checker each build their own stream from the same
    bit file so their cursors advance identically.
    """

    data: bytes
    cursor: int = 0

    def __post_init__(self) -> None:
        self.data = bytes(self.data)
        if not 0 <= self.cursor <= self.total_bits:
            raise ValueError(f"cursor {self.cursor} outside 0..{self.total_bits}")

    @property
    def total_bits(self) -> int:
        return 8 * len(self.data)

    @property
    def remaining(self) -> int:
        return self.total_bits - self.cursor


def take_bits(stream: RandomBitStream, n: int) -> list[int]:
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > stream.remaining:
        raise InsufficientRandomnessError(n, stream.remaining)
    out: list[int] = []
    pos = stream.cursor
    for _ in range(n):
        byte = stream.data[pos >> 3]
        out.append((byte >> (7 - (pos & 7))) & 1)
        pos += 1
    stream.cursor = pos
    return out


def sample_xor(stream: RandomBitStream, S: Sequence[int]) -> Xor:
    """Membership bits in the order of S (1 = included), then the rhs bit."""
    bits = take_bits(stream, len(S) + 1)
    chosen = [v for v, b in zip(S, bits) if b]
    return Xor.from_vars(chosen, bits[-1])


def required_bits(proj_size: int, t: int) -> int:
    if proj_size < 1:
        return 0
    return t * (proj_size - 1) * (proj_size + 1)


def random_seed_xors(stream: RandomBitStream, S: Sequence[int], t: int) -> list[list[Xor]]:
    """
    Sample t rounds of |S|-1 XORs, round-major.

    Consumes exactly t * (|S|-1) * (|S|+1) bits.
    """
    rounds: list[list[Xor]] = []
    per_round = max(len(S) - 1, 0)
    for r in range(1, t + 1):
        xs: list[Xor] = []
        for i in range(1, per_round + 1):
            try:
                xs.append(sample_xor(stream, S))
            except InsufficientRandomnessError as e:
                raise InsufficientRandomnessError(
                    e.needed, e.available, round_no=r, index=i
                ) from None
        rounds.append(xs)
    return rounds


def xor_hash(xors: Sequence[Xor], w: Assignment) -> tuple[int, ...]:
    return tuple(1 if x.evaluate(w) else 0 for x in xors)
