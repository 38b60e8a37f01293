from __future__ import annotations

import json
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from mc_cert.ops_context import RunContext

DEFAULT_METRICS_DIR = Path.home() / ".config" / "mc_cert" / "metrics"

# CLI exit code -> label used in metrics file names
RUN_STATUS = {0: "ok", 1: "rejected", 2: "usage", 3: "resource", 4: "internal"}


def _stamp(ts: float) -> str:
    # 2023-11-14T22-13-20Z, safe in file names
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H-%M-%SZ")


def run_status(exit_code: int) -> str:
    return RUN_STATUS.get(exit_code, f"exit{exit_code}")


def write_run_metrics(
    ctx: RunContext,
    *,
    exit_code: int,
    error: Optional[str] = None,
    metrics_dir: Path = DEFAULT_METRICS_DIR,
) -> Path:
    """
    Write `<service>_<utc stamp>_<status>.json` for one run. A second run of the
    same service and status in the same second gets `_1`, `_2`, ... appended.
    """
    metrics_dir = Path(metrics_dir)
    metrics_dir.mkdir(parents=True, exist_ok=True)

    status = run_status(exit_code)
    base = f"{ctx.service}_{_stamp(ctx.started_at)}_{status}"
    out_path = metrics_dir / f"{base}.json"
    n = 0
    while out_path.exists():
        n += 1
        out_path = metrics_dir / f"{base}_{n}.json"

    payload = {
        "service": ctx.service,
        "status": status,
        "exit_code": int(exit_code),
        "ok": exit_code == 0,
        "error": error,
        "started_at_unix": ctx.started_at,
        "ended_at_unix": ctx.ended_at,
        "duration_s": round(ctx.duration_s, 3),
        "params": ctx.params,
        "outputs": ctx.outputs,
        "rounds": ctx.rounds,
        "extra": ctx.extra,
        "written_at_unix": time.time(),
    }
    # Fractions and paths end up as strings.
    out_path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return out_path
