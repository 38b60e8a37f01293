# src/mc_cert/config.py
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

ENV_PATH = Path.home() / ".config" / "mc_cert" / "mc_cert.env"
if ENV_PATH.exists():
    # Explicit environment wins over the env file.
    load_dotenv(ENV_PATH, override=False)

CONFIG_HOME = Path.home() / ".config" / "mc_cert"


def _env_path(name: str, default: Optional[Path]) -> Optional[Path]:
    raw = os.getenv(name)
    return Path(raw).expanduser() if raw else default


def _env_int(name: str, default: Optional[int]) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    if raw.strip().lower() in ("none", "unlimited"):
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class Settings:
    # ---- Paths ----
    proof_dir: Optional[Path] = field(default_factory=lambda: _env_path("MC_CERT_PROOF_DIR", None))
    metrics_dir: Path = field(
        default_factory=lambda: _env_path("MC_CERT_METRICS_DIR", CONFIG_HOME / "metrics")
    )
    state_path: Path = field(
        default_factory=lambda: _env_path("MC_CERT_STATE_PATH", CONFIG_HOME / "last_success.json")
    )

    # ---- Solver ----
    conflict_budget: Optional[int] = field(
        default_factory=lambda: _env_int("MC_CERT_CONFLICT_BUDGET", 1_000_000)
    )
    blast_width: int = field(default_factory=lambda: _env_int("MC_CERT_BLAST_WIDTH", 16))
    implication_width: int = field(default_factory=lambda: _env_int("MC_CERT_IMPLICATION_WIDTH", 16))

    # ---- Counting defaults ----
    epsilon: str = field(default_factory=lambda: os.getenv("MC_CERT_EPSILON", "0.8"))
    delta: str = field(default_factory=lambda: os.getenv("MC_CERT_DELTA", "0.2"))
    min_rounds: int = field(default_factory=lambda: _env_int("MC_CERT_MIN_ROUNDS", 1))
    find_m: str = field(default_factory=lambda: os.getenv("MC_CERT_FIND_M", "linear"))

    # ---- Runtime ----
    jobs: int = field(default_factory=lambda: _env_int("MC_CERT_JOBS", 1))


def get_settings() -> Settings:
    s = Settings()
    s.metrics_dir.mkdir(parents=True, exist_ok=True)
    return s
