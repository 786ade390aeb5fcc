import json

import numpy as np
import pytest

from mddest import emit_table, parse_table_csv, run_experiment
from mddest.montecarlo import COLUMNS, rows_to_summaries, summarize


def test_two_replication_esd_by_hand():
    res = run_experiment(1, 50, 2, estimators=("mdd",), seed=5)["mdd"]
    a, b = res.estimates[:, 0]
    assert res.esd[0] == pytest.approx(abs(a - b) / np.sqrt(2), rel=1e-12)
    assert res.bias[0] == pytest.approx((a + b) / 2 - 1.0, rel=1e-12)
    assert res.asd[0] == pytest.approx(res.std_errors[:, 0].mean())


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        run_experiment(1, 50, 1)
    with pytest.raises(ValueError):
        run_experiment(1, 50, 3, estimators=("ols",))


def test_reproducible_and_independent_of_workers():
    a = run_experiment(11, 40, 6, seed=9)
    b = run_experiment(11, 40, 6, seed=9, n_jobs=2)
    for name in ("mdd", "dl"):
        assert a[name].estimates.tobytes() == b[name].estimates.tobytes()
        assert a[name].std_errors.tobytes() == b[name].std_errors.tobytes()
    assert emit_table(a) == emit_table(b)


def test_failures_are_counted_not_raised():
    thetas = [[1.0], [np.nan], [1.2], [0.8]]
    ses = [[0.1], [np.nan], [0.1], [0.2]]
    s = summarize(1, 50, "mdd", ("theta0",), [1.0], thetas, ses, [True, False, True, True])
    assert (s.requested, s.converged, s.failed) == (4, 3, 1)
    assert s.bias[0] == pytest.approx(0.0)
    assert s.esd[0] == pytest.approx(0.2)
    assert s.asd[0] == pytest.approx(0.4 / 3)


def test_coverage_counts_intervals():
    s = summarize(1, 50, "mdd", ("t",), [0.0], [[0.1], [3.0], [-0.1]], [[1.0], [1.0], [1.0]], [True] * 3)
    assert s.coverage()[0] == pytest.approx(2 / 3)


@pytest.fixture(scope="module")
def dgp11():
    return run_experiment(11, 40, 3, seed=1)


def test_single_summary_table(dgp11):
    lines = emit_table(dgp11["mdd"]).splitlines()
    assert lines[0] == ",".join(COLUMNS)
    assert len(lines) == 3
    assert [l.split(",")[1] for l in lines[1:]] == ["theta10", "theta20"]


def test_one_parameter_one_row():
    s = run_experiment(1, 30, 2, estimators=("dl",))["dl"]
    assert len(emit_table(s).splitlines()) == 2


def test_csv_round_trip(dgp11):
    text = emit_table(dgp11, "csv")
    rows = parse_table_csv(text)
    assert rows == [r for s in dgp11.values() for r in s.rows()]
    assert emit_table(rows_to_summaries(rows), "csv") == text


def test_json_and_grid(dgp11):
    doc = json.loads(emit_table(dgp11, "json"))
    assert list(doc[0]) == list(COLUMNS) and len(doc) == 4
    grid = emit_table(dgp11, "text-grid")
    assert "DGP 11" in grid and "Bias" in grid and "theta20" in grid
    with pytest.raises(ValueError):
        emit_table(dgp11, "xlsx")


@pytest.mark.slow
def test_var1_design_matches_reference_row():
    res = run_experiment(16, 200, 1000, estimators=("mdd",), seed=20240101)["mdd"]
    i = list(res.param_names).index("theta11")
    assert res.bias[i] == pytest.approx(-0.003, abs=0.01)
    assert res.asd[i] == pytest.approx(0.045, abs=0.01)
    assert res.esd[i] == pytest.approx(0.043, abs=0.01)


def test_json_writes_null_for_empty_cells():
    s = summarize(1, 50, "mdd", ("theta0",), np.array([1.0]), np.full((3, 1), np.nan),
                  np.full((3, 1), np.nan), np.zeros(3, bool))
    doc = json.loads(emit_table(s, "json"))
    assert doc[0]["asd"] is None and doc[0]["converged"] == 0
