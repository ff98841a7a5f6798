"""Report artifact tests: schemas, slicing and byte-stable rendering."""

import hashlib

import numpy as np
import pytest

from islandsim.economics import EconomicReport
from islandsim.pareto import ParetoPoint
from islandsim.report import (figure_pareto, figure_week, write_economics_csv,
                              write_pareto_csv, write_week_csv)


def _report(sid="central_p30_h8", concept="central", lcoe=92.5, pen=0.48):
    return EconomicReport(
        scenario_id=sid, concept=concept, bes_power_mw=30.0, bes_hours=8.0,
        new_wind_mw=75.0, lcoe=lcoe, res_penetration=pen,
        curtailment_existing_share=0.08, curtailment_new_share=0.12,
        curtailment_total_share=0.10, system_variable_cost_delta=1.2e6,
        capacity_credit_mw=18.5, total_cost_delta=4.4e6)


def _fake_record(hours=168 * 2, seed=0):
    rng = np.random.default_rng(seed)
    t = np.arange(hours)
    return {
        "hour": t.astype(float),
        "load": 100 + 40 * np.sin(t / 24 * 2 * np.pi) + rng.random(hours),
        "p.U1": 60 + 10 * rng.random(hours),
        "p.U2": 30 + 5 * rng.random(hours),
        "pv_injected": np.clip(20 * np.sin((t % 24 - 6) / 12 * np.pi), 0, None),
        "wind_injected": 30 * rng.random(hours),
        "ens": np.zeros(hours),
        "charge.BES1": 5 * rng.random(hours),
        "discharge.BES1": 5 * rng.random(hours),
        "soc.BES1": 120 + 60 * np.sin(t / 24 * np.pi),
        "plan.soc.BES1": 110 + 60 * np.sin(t / 24 * np.pi),
    }


def test_economics_csv_schema(tmp_path):
    path = write_economics_csv([_report(), _report("self_p30_h8", "self", 180.0)],
                               tmp_path / "economics.csv")
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == EconomicReport.CSV_FIELDS
    assert len(lines) == 3
    assert lines[1].startswith("central_p30_h8,central,30.000000")


def test_pareto_csv_schema(tmp_path):
    front = [ParetoPoint("a", 0.42, 90.0), ParetoPoint("b", 0.45, 110.0)]
    path = write_pareto_csv(front, tmp_path / "pareto.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "scenario_id,res_penetration,lcoe"
    assert lines[1] == "a,0.420000,90.000000"


def test_week_slicing_and_range(tmp_path):
    record = _fake_record()
    path = write_week_csv(record, 2, tmp_path / "week.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 169
    with pytest.raises(ValueError, match="week must be in 1..2"):
        write_week_csv(record, 3, tmp_path / "week3.csv")
    with pytest.raises(ValueError, match="week must be"):
        write_week_csv(record, 0, tmp_path / "week0.csv")


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_figures_render_and_are_byte_stable(tmp_path):
    record = _fake_record()
    p1 = figure_week(record, 1, tmp_path / "w1.png", title="case")
    p2 = figure_week(record, 1, tmp_path / "w2.png", title="case")
    assert p1.stat().st_size > 10_000
    assert _digest(p1) == _digest(p2)

    reports = [_report(), _report("self_p30_h8", "self", 180.0, 0.44)]
    front = [ParetoPoint("central_p30_h8", 0.48, 92.5)]
    f1 = figure_pareto(reports, front, tmp_path / "f1.png")
    f2 = figure_pareto(reports, front, tmp_path / "f2.png")
    assert _digest(f1) == _digest(f2)


def test_csv_outputs_byte_stable(tmp_path):
    a = write_economics_csv([_report()], tmp_path / "a.csv")
    b = write_economics_csv([_report()], tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()
