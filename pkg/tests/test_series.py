"""Series ingestion and synthesis tests."""

import numpy as np
import pytest

from islandsim.series import (HourlySeries, SeriesError, ingest_csv, synthesize,
                              write_csv)


def _write_rows(path, rows, header="timestamp,value_mw"):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for r in rows:
            fh.write(r + "\n")


def test_ingest_happy_path(tmp_path):
    series = synthesize("load", {"peak_mw": 100.0, "load_factor": 0.5}, seed=1)
    path = tmp_path / "load.csv"
    write_csv(series, path)
    back = ingest_csv(path)
    assert np.allclose(back.values, series.values, atol=1e-6)
    assert back.peak == pytest.approx(series.peak, abs=1e-5)
    assert back.load_factor == pytest.approx(0.5, abs=1e-4)


def test_ingest_wrong_length(tmp_path):
    path = tmp_path / "short.csv"
    _write_rows(path, [f"{k},1.0" for k in range(8759)])
    with pytest.raises(SeriesError, match="expected 8760 rows, got 8759"):
        ingest_csv(path)


def test_ingest_negative_value_cites_row(tmp_path):
    rows = [f"{k},1.0" for k in range(8760)]
    rows[98] = "98,-0.5"            # line 100 including the header
    path = tmp_path / "neg.csv"
    _write_rows(path, rows)
    with pytest.raises(SeriesError, match="row 100"):
        ingest_csv(path)


def test_ingest_parse_error_cites_row(tmp_path):
    rows = [f"{k},1.0" for k in range(8760)]
    rows[4] = "4,not-a-number"
    path = tmp_path / "bad.csv"
    _write_rows(path, rows)
    with pytest.raises(SeriesError, match="row 6"):
        ingest_csv(path)


def test_ingest_gap_detected(tmp_path):
    rows = [f"{k},1.0" for k in range(8760)]
    rows[10] = "11,1.0"             # skips stamp 10
    path = tmp_path / "gap.csv"
    _write_rows(path, rows)
    with pytest.raises(SeriesError, match="gap"):
        ingest_csv(path)


def test_ingest_bad_header(tmp_path):
    path = tmp_path / "hdr.csv"
    _write_rows(path, ["0,1.0"], header="time,mw")
    with pytest.raises(SeriesError, match="header"):
        ingest_csv(path)


# ----------------------------------------------------------------------
# synthesis
# ----------------------------------------------------------------------

def test_load_deterministic_and_exact_targets():
    a = synthesize("load", {"peak_mw": 210.0, "load_factor": 0.46}, seed=7)
    b = synthesize("load", {"peak_mw": 210.0, "load_factor": 0.46}, seed=7)
    assert np.array_equal(a.values, b.values)
    assert a.peak == pytest.approx(210.0, abs=1e-9)
    assert a.load_factor == pytest.approx(0.46, abs=1e-9)
    assert a.values.min() > 0


def test_load_different_seed_differs():
    a = synthesize("load", {"peak_mw": 210.0, "load_factor": 0.46}, seed=7)
    c = synthesize("load", {"peak_mw": 210.0, "load_factor": 0.46}, seed=8)
    assert not np.array_equal(a.values, c.values)


def test_wind_capacity_factor_band():
    w = synthesize("wind", {"capacity_factor": 0.40}, seed=1)
    assert 0.39 <= w.capacity_factor <= 0.41
    assert w.values.max() <= 1.0
    assert w.values.min() >= 0.0


def test_pv_zero_outside_daylight_envelope():
    pv = synthesize("pv", {"capacity_factor": 0.21}, seed=1)
    assert 0.20 <= pv.capacity_factor <= 0.22
    night = pv.values.reshape(-1, 24)[:, [0, 1, 2, 23]]
    assert np.all(night == 0.0)


def test_synthesized_series_pass_ingest_validation(tmp_path):
    for kind, targets in (("load", {"peak_mw": 50.0, "load_factor": 0.5}),
                          ("wind", {"capacity_factor": 0.35, "capacity_mw": 20.0}),
                          ("pv", {"capacity_factor": 0.21, "capacity_mw": 10.0})):
        series = synthesize(kind, targets, seed=3)
        path = tmp_path / f"{kind}.csv"
        write_csv(series, path)
        ingest_csv(path)


def test_stats_recomputable_within_tolerance():
    w = synthesize("wind", {"capacity_factor": 0.40, "capacity_mw": 55.0}, seed=12)
    recomputed = w.values.mean() / 55.0
    assert abs(recomputed - w.capacity_factor) < 1e-3 * max(1.0, w.capacity_factor)


def test_unreachable_targets_error():
    with pytest.raises(SeriesError):
        synthesize("load", {"peak_mw": 100.0, "load_factor": 1.2}, seed=1)
    with pytest.raises(SeriesError):
        synthesize("wind", {"capacity_factor": 1.5}, seed=1)
    with pytest.raises(SeriesError):
        synthesize("fog", {"capacity_factor": 0.2}, seed=1)


def test_scaled_keeps_capacity_bookkeeping():
    w = synthesize("wind", {"capacity_factor": 0.40}, seed=2)
    scaled = w.scaled(55.0)
    assert scaled.capacity_mw == pytest.approx(55.0)
    assert scaled.capacity_factor == pytest.approx(w.capacity_factor, abs=1e-12)


def test_hourly_series_values_frozen():
    s = HourlySeries(np.ones(10))
    with pytest.raises(ValueError):
        s.values[0] = 2.0
