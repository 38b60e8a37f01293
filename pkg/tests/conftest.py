from __future__ import annotations

import pytest

from mc_cert.formula import CnfXorFormula
from mc_cert.io_dimacs import parse_dimacs_cnfxor

PAIRS_TEXT = """\
p cnf 10 7
1 2 3 4 5 0
6 7 8 9 10 0
-1 -6 0
-2 -7 0
-3 -8 0
-4 -9 0
-5 -10 0
"""

TINY_UNSAT_TEXT = """\
p cnf 3 4
1 2 0
-1 -2 0
-3 0
x 1 2 -3 0
"""

TINY_UNSAT_PROOF = """\
o x 1 1 2 -3 0
i x 2 1 2 0 1 2 0
x 3 3 0 1 2 0
i 4 3 0 3 0
5 0 3 4 0
"""


@pytest.fixture(autouse=True)
def isolated_run_state(tmp_path, monkeypatch):
    """
    Keep metrics JSON and the last-success ledger out of the real home directory.
    """
    monkeypatch.setenv("MC_CERT_METRICS_DIR", str(tmp_path / "metrics"))
    monkeypatch.setenv("MC_CERT_STATE_PATH", str(tmp_path / "state" / "last_success.json"))
    for name in (
        "MC_CERT_PROOF_DIR",
        "MC_CERT_CONFLICT_BUDGET",
        "MC_CERT_BLAST_WIDTH",
        "MC_CERT_IMPLICATION_WIDTH",
        "MC_CERT_JOBS",
        "MC_CERT_FIND_M",
        "MC_CERT_EPSILON",
        "MC_CERT_DELTA",
        "MC_CERT_MIN_ROUNDS",
    ):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def pairs() -> CnfXorFormula:
    return parse_dimacs_cnfxor(PAIRS_TEXT)


@pytest.fixture
def tiny_unsat() -> CnfXorFormula:
    return parse_dimacs_cnfxor(TINY_UNSAT_TEXT)
