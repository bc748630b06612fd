"""Sweep harness: fits, bounds, reports, CSV round trip, CLI."""

import math

import numpy as np
import pytest
from click.testing import CliRunner
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import constant_g_problem
from sympont import catalog
from sympont.cli import main as cli_main
from sympont.harness import (
    CSV_COLUMNS,
    CellRecord,
    ExperimentReport,
    ExperimentSpec,
    OracleInfo,
    emit_reports,
    error_bounds,
    fit_order,
    read_cells_csv,
    run_sweep,
)


class TestFitOrder:
    def test_linear(self):
        pts = [(h, h) for h in (0.1, 0.05, 0.025, 0.0125)]
        assert fit_order(pts) == pytest.approx(1.0, abs=1e-12)

    def test_quadratic(self):
        pts = [(h, h * h) for h in (0.1, 0.05, 0.025, 0.0125)]
        assert fit_order(pts) == pytest.approx(2.0, abs=1e-12)

    def test_synthetic_near_linear(self):
        pts = [(0.1, 0.1), (0.05, 0.052), (0.025, 0.0249)]
        assert fit_order(pts) == pytest.approx(1.0, abs=0.05)

    def test_nonpositive_dropped_and_marker(self):
        assert fit_order([(0.1, 0.0), (0.05, -1.0), (0.025, 0.01)]) is None
        assert fit_order([(0.1, 0.1), (0.05, 0.05)]) is None

    @settings(max_examples=30, deadline=None)
    @given(
        c=st.floats(min_value=1e-3, max_value=1e3),
        p=st.floats(min_value=0.25, max_value=3.0),
    )
    def test_recovers_exact_power_laws(self, c, p):
        hs = (0.2, 0.1, 0.05, 0.025, 0.0125)
        pts = [(h, c * h**p) for h in hs]
        assert fit_order(pts) == pytest.approx(p, rel=1e-9)


class TestErrorBounds:
    def test_paper_formula_arithmetic(self, eikonal_1d_costed):
        # Hand-evaluated for C1 = 1, C2 = 0.1, C3 = 1, T = 1, dt = 0.1, d = 0.01:
        # growth = e^{0.1}; lower = 0.05*((g-1)*0.1 + 0.01) + 0.5*(g-1)*0.1 + 0.01
        p = eikonal_1d_costed.problem
        g = math.exp(0.1)
        lower, upper = error_bounds(p, 0.1, 0.01, 0.0)
        assert lower == pytest.approx(
            0.05 * ((g - 1) * 0.1 + 0.01) + 0.5 * (g - 1) * 0.1 + 0.01, abs=1e-15
        )
        assert upper == pytest.approx(0.5 * 1.0 * 0.1 * 2.0 * g * 1.0 * 0.1 + 0.01, abs=1e-15)

    def test_c2_zero_collapses_dt_terms(self, eikonal_1d):
        lower, upper = error_bounds(eikonal_1d.problem, 0.05, 1e-3, 0.0)
        assert lower == pytest.approx(1e-3, abs=1e-18)
        assert upper == pytest.approx(1e-3, abs=1e-18)


class TestSpecValidation:
    def test_dt_must_decrease(self):
        with pytest.raises(ValueError):
            ExperimentSpec(problem_id="eikonal-1d", dt_list=(0.1, 0.1))

    def test_delta_positive(self):
        with pytest.raises(ValueError):
            ExperimentSpec(problem_id="eikonal-1d", delta_list=(0.0,))

    def test_enum_fields(self):
        with pytest.raises(ValueError):
            ExperimentSpec(problem_id="eikonal-1d", oracle="psychic")


@pytest.fixture
def const_entry():
    entry = catalog.CatalogEntry(
        id="const-g-test",
        problem=constant_g_problem(2.0, with_exact=True),
        description="constant terminal cost",
        default_start=np.array([0.5]),
    )
    catalog.register(entry)
    yield entry
    catalog.unregister("const-g-test")


class TestRunSweep:
    def test_single_trivial_cell_error_exactly_zero(self, const_entry):
        spec = ExperimentSpec(
            problem_id="const-g-test",
            dt_list=(1.0,),
            delta_list=(1e-6,),
            oracle="exact",
        )
        report = run_sweep(spec)
        assert len(report.cells) == 1
        assert report.cells[0].err_signed == 0.0
        assert report.exit_code == 0

    def test_five_by_six_produces_thirty_cells(self):
        spec = ExperimentSpec(
            problem_id="eikonal-1d",
            dt_list=(1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32),
            delta_list=(1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6),
        )
        report = run_sweep(spec)
        assert len(report.cells) == 30
        assert report.all_lower_ok and report.all_upper_ok

    def test_delta_shrink_never_hurts(self):
        spec = ExperimentSpec(
            problem_id="eikonal-1d",
            dt_list=(0.125,),
            delta_list=(1e-2, 1e-4, 1e-6, 1e-8),
        )
        report = run_sweep(spec)
        assert report.no_delta_blowup

    def test_workers_reproduce_serial(self):
        spec1 = ExperimentSpec(problem_id="eikonal-1d", dt_list=(0.25, 0.125), delta_list=(1e-3,))
        spec2 = ExperimentSpec(
            problem_id="eikonal-1d", dt_list=(0.25, 0.125), delta_list=(1e-3,), workers=3
        )
        assert run_sweep(spec1).cells == run_sweep(spec2).cells

    def test_missing_closed_form_aborts(self):
        spec = ExperimentSpec(problem_id="eikonal-1d-costed", oracle="exact")
        with pytest.raises(ValueError, match="closed-form"):
            run_sweep(spec)

    @pytest.mark.parametrize("pid", ["eikonal-2d", "smooth-quadratic-1d"])
    def test_default_sweep_verdicts_pass(self, pid):
        # Together with the acceptance sweeps of the two 1-D front problems,
        # this closes the claim that both bound verdicts hold on every catalog
        # problem across the default sweep.
        entry = catalog.get(pid)
        spec = ExperimentSpec(
            problem_id=pid,
            oracle="exact" if entry.problem.exact_value is not None else "grid",
        )
        report = run_sweep(spec)
        assert not report.failures
        assert report.all_lower_ok and report.all_upper_ok
        assert report.no_delta_blowup


def _fake_report(cells):
    spec = ExperimentSpec(problem_id="eikonal-1d", dt_list=(0.1,), delta_list=(1e-3,))
    return ExperimentReport(
        spec=spec,
        cells=tuple(cells),
        oracle_info=OracleInfo(kind="exact", value=1.0, epsilon=0.0),
        dt_order=None,
        delta_order=None,
        delta_excess=0.0,
    )


def _cell(**overrides):
    base = dict(
        problem="eikonal-1d",
        dt=0.1,
        delta=1e-3,
        route="tpbvp",
        u_bar=1.0,
        u_oracle=1.0,
        err_signed=0.0,
        lower_bound=1e-3,
        upper_bound=1e-3,
        lower_ok=True,
        upper_ok=True,
        dual_slack=0.3,
        sweeps=12,
        residual=1e-12,
    )
    base.update(overrides)
    return CellRecord(**base)


class TestEmitReports:
    def test_empty_report_header_only(self, tmp_path):
        report = _fake_report([])
        emit_reports(report, tmp_path)
        lines = (tmp_path / "cells.csv").read_text().splitlines()
        assert lines == [",".join(CSV_COLUMNS)]
        summary = (tmp_path / "summary.txt").read_text()
        assert "zero cells" in summary
        assert "EXIT 0" in summary

    def test_verdict_failure_marks_nonzero_exit(self, tmp_path):
        report = _fake_report([_cell(upper_ok=False, err_signed=5.0)])
        assert report.exit_code == 1
        emit_reports(report, tmp_path)
        assert "EXIT 1" in (tmp_path / "summary.txt").read_text()

    def test_csv_round_trip_exact(self, tmp_path):
        spec = ExperimentSpec(
            problem_id="eikonal-1d", dt_list=(0.25, 0.125), delta_list=(1e-2, 1e-5)
        )
        report = run_sweep(spec)
        emit_reports(report, tmp_path)
        back = read_cells_csv(tmp_path / "cells.csv")
        assert tuple(back) == report.cells

    def test_regeneration_bitwise_identical(self, tmp_path):
        spec = ExperimentSpec(problem_id="eikonal-1d", dt_list=(0.25, 0.125), delta_list=(1e-3,))
        a, b = tmp_path / "a", tmp_path / "b"
        emit_reports(run_sweep(spec), a)
        emit_reports(run_sweep(spec), b)
        for name in ("cells.csv", "summary.txt", "error_vs_dt.svg", "error_vs_delta.svg"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name


class TestCli:
    def test_list_problems(self):
        result = CliRunner().invoke(cli_main, ["list-problems"])
        assert result.exit_code == 0
        assert "eikonal-1d" in result.output

    def test_verify_constants_ok(self):
        result = CliRunner().invoke(
            cli_main, ["verify-constants", "--problem", "eikonal-1d", "--samples", "500"]
        )
        assert result.exit_code == 0
        assert "pass" in result.output

    def test_verify_constants_unknown_problem(self):
        result = CliRunner().invoke(cli_main, ["verify-constants", "--problem", "nope"])
        assert result.exit_code == 2

    def test_run_writes_reports_and_exits_zero(self, tmp_path):
        result = CliRunner().invoke(
            cli_main,
            [
                "run",
                "--problem",
                "eikonal-1d",
                "--x0",
                "2.0",
                "--dt",
                "0.25,0.125",
                "--delta",
                "1e-3",
                "--oracle",
                "exact",
                "--route",
                "tpbvp",
                "--seed",
                "0",
                "--out",
                str(tmp_path),
            ],
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "cells.csv").exists()
        assert (tmp_path / "summary.txt").exists()
        assert (tmp_path / "error_vs_dt.svg").exists()
