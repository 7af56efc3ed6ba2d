import pytest

from sosperturb.errors import NoSamplesAcceptedError
from sosperturb.probe import run_probe


def test_deterministic_given_seed():
    a = run_probe(1, 2, 1.0, 0.5, samples=6, seed=42, r_max=8)
    b = run_probe(1, 2, 1.0, 0.5, samples=6, seed=42, r_max=8)
    assert a.to_obj() == b.to_obj()


def test_mixed_acceptance():
    report = run_probe(1, 2, 1.0, 0.5, samples=6, seed=42, r_max=8)
    counts = report.counts()
    assert counts["accepted"] == 1
    assert counts["rejected"] == 5
    assert counts["certified"] == 1
    assert report.max_r == 1


def test_huge_weight_succeeds_at_first_degree():
    # with a weight beyond the coefficient mass, the first degree tried wins
    report = run_probe(1, 2, 1.0, 10.0, samples=5, seed=1, r_max=6)
    found = [row.found_r for row in report.rows if row.found_r is not None]
    assert found and all(r == 1 for r in found)


def test_all_rejected_raises():
    with pytest.raises(NoSamplesAcceptedError):
        run_probe(1, 1, 1.0, 0.5, samples=3, seed=2, r_max=4)


def test_sample_count_validated():
    with pytest.raises(ValueError):
        run_probe(1, 2, 1.0, 0.5, samples=0, seed=0)


def test_eps_validated():
    with pytest.raises(ValueError):
        run_probe(1, 2, 1.0, -0.5, samples=1, seed=0)


def test_report_rows_cover_all_samples():
    report = run_probe(2, 2, 1.0, 1.0, samples=4, seed=1, r_max=6)
    assert len(report.rows) == 4
    assert [row.index for row in report.rows] == [0, 1, 2, 3]
