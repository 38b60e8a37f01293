from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class RunContext:
    """Facts about one CLI run, serialized by ops_metrics when the run ends."""

    service: str
    started_at: float = field(default_factory=time.time)
    ended_at: Optional[float] = None

    # Inputs as given on the command line (paths, epsilon/delta strings)
    params: Dict[str, Any] = field(default_factory=dict)

    # label -> written file
    outputs: Dict[str, str] = field(default_factory=dict)

    # One entry per counting or checking round, in round order
    rounds: List[Dict[str, Any]] = field(default_factory=list)

    extra: Dict[str, Any] = field(default_factory=dict)

    def end(self) -> None:
        self.ended_at = time.time()

    @property
    def duration_s(self) -> float:
        end = self.ended_at or time.time()
        return max(0.0, end - self.started_at)

    def add_param(self, key: str, value: Any) -> None:
        if not isinstance(value, (int, float, bool)) and value is not None:
            value = str(value)
        self.params[str(key)] = value

    def add_output(self, label: str, path: Any) -> None:
        self.outputs[str(label)] = str(path)

    def add_round(self, round_no: int, **facts: Any) -> None:
        self.rounds.append({"round": int(round_no), **facts})
