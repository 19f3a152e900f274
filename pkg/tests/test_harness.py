import json
import math

import numpy as np
import pytest

import geomflow as gf
from geomflow.errors import ConfigError
from geomflow.harness import (ConvergenceReport, DiagnosticsSeries, cache_dir,
                              convergence_study, cpu_comparison, diagnostics_series,
                              exact_csf_circle, observed_orders, reference_solution,
                              write_convergence_csv, write_convergence_json,
                              write_cpu_csv, write_diagnostics_csv)
from geomflow.metrics import MetricKind, manifold_distance
from geomflow.schemes import FlowKind, Scheme, SchemeConfig, run


class TestReferenceSolution:
    def test_csf_circle_bypasses_computation(self, tmp_path):
        ref = reference_solution(gf.Circle(1.0), FlowKind.CSF, 500, 1e-4, 0.25,
                                 cache=tmp_path)
        radii = np.hypot(ref.nodes[:, 0], ref.nodes[:, 1])
        assert np.allclose(radii, math.sqrt(0.5), atol=1e-14)
        # nothing was persisted: exact references are free to recompute
        assert list(tmp_path.iterdir()) == []

    def test_exact_circle_extinction_guard(self):
        with pytest.raises(ConfigError):
            exact_csf_circle(1.0, 0.6, 100)

    def test_cache_round_trip_bit_identical(self, tmp_path):
        args = (gf.Ellipse(2.0, 1.0), FlowKind.CSF, 200, 1.0 / 80.0, 0.1)
        first = reference_solution(*args, cache=tmp_path)
        files = list(tmp_path.iterdir())
        assert len(files) == 1
        again = reference_solution(*args, cache=tmp_path)
        assert np.array_equal(first.nodes, again.nodes)
        stored, t = gf.geometry.load_snapshot_csv(files[0])
        assert t == 0.1
        assert np.array_equal(stored.nodes, first.nodes)

    def test_reference_refinement_self_consistency(self, tmp_path):
        # halving the reference step again must not increase the measured
        # error of the finest ladder level (desk-scale analog, small N)
        shape = gf.Ellipse(2.0, 1.0)
        tau_min = 1.0 / 64.0
        final = run(shape, SchemeConfig(flow=FlowKind.SDF, tau=tau_min, t_end=0.25, n=200),
                    scheme=Scheme.BGN2).state.curr_curve
        ref1 = reference_solution(shape, FlowKind.SDF, 200, tau_min / 8.0, 0.25,
                                  cache=tmp_path)
        ref2 = reference_solution(shape, FlowKind.SDF, 200, tau_min / 16.0, 0.25,
                                  cache=tmp_path)
        e1 = manifold_distance(final, ref1)
        e2 = manifold_distance(final, ref2)
        assert e2 == pytest.approx(e1, rel=0.05)

    def test_cache_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GEOMFLOW_CACHE_DIR", str(tmp_path / "envcache"))
        assert cache_dir() == tmp_path / "envcache"
        assert (tmp_path / "envcache").is_dir()


class TestConvergenceStudy:
    @pytest.fixture(scope="class")
    def small_study(self, tmp_path_factory):
        cache = tmp_path_factory.mktemp("cache")
        return convergence_study(
            gf.Circle(1.0), FlowKind.CSF, Scheme.BGN2, MetricKind.MANIFOLD,
            tau0=1.0 / 20.0, levels=3, n=400, t_end=0.25, cache=cache)

    def test_ladder_structure(self, small_study):
        assert small_study.taus == [1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0]
        assert len(small_study.orders) == len(small_study.errors) - 1
        assert all(e >= 0 for e in small_study.errors)
        assert not small_study.partial

    def test_second_order_observed(self, small_study):
        # the coarsest ratio overshoots 2 (tau = 1/20 is pre-asymptotic);
        # the resolved tail must sit at second order
        assert all(o >= 1.7 for o in small_study.orders)
        assert 1.7 <= small_study.orders[-1] <= 2.3

    def test_error_ladder_monotone(self, small_study):
        assert all(b < a for a, b in zip(small_study.errors, small_study.errors[1:]))

    def test_orders_recomputable_from_errors(self, small_study):
        again = observed_orders(small_study.errors)
        assert np.allclose(again, small_study.orders, atol=1e-12)

    def test_csv_and_json_mirrors(self, small_study, tmp_path):
        csv_path = tmp_path / "report.csv"
        json_path = tmp_path / "report.json"
        write_convergence_csv(small_study, csv_path)
        write_convergence_json(small_study, json_path)
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "tau,error,order,seconds"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert float(first[0]) == 1.0 / 20.0
        assert first[2] == ""  # no order on the first ladder level
        payload = json.loads(json_path.read_text())
        assert payload["errors"] == small_study.errors
        assert payload["orders"] == small_study.orders
        # 17 significant digits: the CSV errors parse back bit-exactly
        for line, err in zip(lines[1:], small_study.errors):
            assert float(line.split(",")[1]) == err

    def test_failed_level_marks_partial(self, tmp_path):
        # t_end not an integer multiple of the coarsest tau: that level fails
        report = convergence_study(
            gf.Circle(1.0), FlowKind.CSF, Scheme.BGN2, MetricKind.MANIFOLD,
            tau0=3.0 / 100.0, levels=2, n=64, t_end=0.045,
            tau_ref=0.045 / 64, cache=tmp_path)
        assert report.partial
        assert math.isnan(report.errors[0])
        assert not math.isnan(report.errors[1])


class TestDiagnostics:
    def test_series_from_run(self):
        cfg = SchemeConfig(flow=FlowKind.SDF, tau=1.0 / 160.0, t_end=0.5, n=80)
        result = run(gf.Ellipse(2, 1), cfg)
        series = diagnostics_series(result)
        assert series.rel_area_loss[0] == 0.0
        assert series.norm_perimeter[0] == 1.0
        assert np.all(np.diff(series.times) > 0)
        assert np.all(series.psi >= 1.0)
        assert np.all(np.diff(series.mr_count) >= 0)

    def test_diagnostics_csv(self, tmp_path):
        cfg = SchemeConfig(flow=FlowKind.CSF, tau=1e-2, t_end=0.1, n=32)
        series = diagnostics_series(run(gf.Circle(1.0), cfg))
        path = tmp_path / "diag.csv"
        write_diagnostics_csv(series, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,dA,L_ratio,Psi,mr_count"
        assert len(lines) == 12
        row0 = lines[1].split(",")
        assert float(row0[1]) == 0.0 and float(row0[2]) == 1.0


class TestCpuComparison:
    def test_structure_and_errors(self, tmp_path):
        rows = cpu_comparison(gf.Circle(1.0), FlowKind.CSF, [40, 80], 0.05,
                              schemes=[Scheme.BGN2], cache=tmp_path)
        assert [r.n for r in rows] == [40, 80]
        assert all(r.scheme == "bgn2" for r in rows)
        assert all(r.seconds > 0 for r in rows)
        assert all(r.realized_t == 0.05 for r in rows)
        # errors shrink with N (both tau and h refine together)
        assert rows[1].e_manifold < rows[0].e_manifold
        assert rows[1].e_hausdorff < rows[0].e_hausdorff

    def test_non_integral_t_rounds_down(self, tmp_path):
        rows = cpu_comparison(gf.Circle(1.0), FlowKind.CSF, [30], 0.052,
                              schemes=[Scheme.BGN2], cache=tmp_path)
        # tau = 1/60, floor(0.052 * 60) = 3 steps -> realized t = 0.05
        assert rows[0].realized_t == pytest.approx(3.0 / 60.0)

    def test_cpu_csv(self, tmp_path):
        rows = cpu_comparison(gf.Circle(1.0), FlowKind.CSF, [40], 0.05,
                              schemes=[Scheme.BGN1, Scheme.BGN2], cache=tmp_path)
        path = tmp_path / "cpu.csv"
        write_cpu_csv(rows, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "scheme,n,e_manifold,e_hausdorff,seconds,realized_t"
        assert len(lines) == 3
