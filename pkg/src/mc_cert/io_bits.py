from __future__ import annotations

import secrets
from pathlib import Path

from mc_cert.randomness import RandomBitStream, required_bits


def required_bytes(proj_size: int, t: int) -> int:
    return (required_bits(proj_size, t) + 7) // 8


def read_bit_stream(path: Path) -> RandomBitStream:
    """Raw bytes, no header."""
    return RandomBitStream(Path(path).read_bytes())


def write_random_bits(path: Path, nbytes: int) -> Path:
    """Fill `path` with `nbytes` bytes of OS entropy."""
    if nbytes < 0:
        raise ValueError("nbytes must be >= 0")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(secrets.token_bytes(nbytes))
    tmp.replace(path)
    return path
