from __future__ import annotations

import json
import time
from pathlib import Path
from typing import Any, Dict, Optional

DEFAULT_STATE_PATH = Path.home() / ".config" / "mc_cert" / "last_success.json"


def read_last_success(service: Optional[str] = None, *, state_path: Path = DEFAULT_STATE_PATH) -> Optional[Dict[str, Any]]:
    """Last successful run, overall or for one service."""
    if not state_path.exists():
        return None
    try:
        ledger = json.loads(state_path.read_text())
    except (OSError, json.JSONDecodeError):
        return None
    if service is None:
        return ledger.get("latest")
    return ledger.get("services", {}).get(service)


def write_last_success(service: str, summary: Dict[str, Any], *, state_path: Path = DEFAULT_STATE_PATH) -> None:
    """Keeps the latest success per service plus the overall latest."""
    state_path.parent.mkdir(parents=True, exist_ok=True)
    ledger: Dict[str, Any] = {}
    if state_path.exists():
        try:
            ledger = json.loads(state_path.read_text())
        except (OSError, json.JSONDecodeError):
            ledger = {}
    entry = {
        "service": service,
        "ts": int(time.time()),
        "summary": summary,
    }
    ledger.setdefault("services", {})[service] = entry
    ledger["latest"] = entry
    state_path.write_text(json.dumps(ledger, indent=2, sort_keys=True, default=str) + "\n")
