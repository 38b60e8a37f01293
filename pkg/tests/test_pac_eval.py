from __future__ import annotations

from fractions import Fraction

import pandas as pd
import pytest

from mc_cert.formula import CnfXorFormula
from mc_cert.pac_eval import TRIALS_CSV, envelope, pac_eval, within_envelope, write_trials_csv
from mc_cert.params import PacParams

FAST = PacParams.parse("3", "0.5")


def test_envelope_around_pairs_count() -> None:
    assert envelope(180, Fraction(4, 5)) == (100, 324)
    assert within_envelope(100, 180, Fraction(4, 5))
    assert within_envelope(324, 180, Fraction(4, 5))
    assert not within_envelope(99, 180, Fraction(4, 5))
    assert not within_envelope(325, 180, Fraction(4, 5))


def test_exact_case_trials(tmp_path) -> None:
    F = CnfXorFormula.build(3, [(1,)])
    report = pac_eval(F, FAST, 3, tmp_path / "work", jobs=2)
    assert report.exact == 4
    assert report.trials == 3
    assert [r.trial for r in report.rows] == [1, 2, 3]
    assert all(r.accepted and r.exact_case and r.within for r in report.rows)
    assert report.failures == 0
    assert report.rejected == 0
    assert report.meets_delta is True
    assert (tmp_path / "work" / "trial0001.cert").exists()
    assert (tmp_path / "work" / "trial0001.init.xlrup").exists()


def test_single_trial_makes_no_claim(tmp_path) -> None:
    F = CnfXorFormula.build(2)
    report = pac_eval(F, FAST, 1, tmp_path)
    assert report.meets_delta is None


def test_trials_must_be_positive(tmp_path) -> None:
    with pytest.raises(ValueError):
        pac_eval(CnfXorFormula.build(2), FAST, 0, tmp_path)


def test_projected_trials(pairs: CnfXorFormula, tmp_path) -> None:
    report = pac_eval(pairs, FAST, 2, tmp_path, proj=(1, 2, 6))
    assert report.exact == 6
    assert [r.count for r in report.rows] == [6, 6]


def test_trials_csv(pairs: CnfXorFormula, tmp_path) -> None:
    report = pac_eval(pairs, FAST, 2, tmp_path / "work")
    path = write_trials_csv(report, tmp_path / "out")
    assert path.name == TRIALS_CSV
    frame = pd.read_csv(path)
    assert list(frame.columns) == [
        "trial", "count", "certified", "accepted", "exact_case", "within", "bits_used", "error",
    ]
    assert len(frame) == 2
    assert frame["accepted"].all()
    assert (frame["count"] == frame["certified"]).all()
    assert (frame["bits_used"] == 99).all()


@pytest.mark.slow
def test_pairs_meets_pac_guarantee(pairs: CnfXorFormula, tmp_path) -> None:
    params = PacParams.parse("0.8", "0.2")
    report = pac_eval(pairs, params, 200, tmp_path, jobs=4)
    assert report.exact == 180
    assert (report.lower, report.upper) == (100, 324)
    assert report.rejected == 0
    assert report.failure_fraction <= params.delta
