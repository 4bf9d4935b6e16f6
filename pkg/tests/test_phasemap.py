import numpy as np
import pytest
from dataclasses import replace

from sshdpt.phasemap import (TARGET_RC, WORKERS_ENV, BracketError, SweepConfig, boundary,
                             boundary_vs_initial, calibrate_window, dpt_at, resolve_workers,
                             scan_diagram, window_ladder)

BASE = SweepConfig()


class TestDptAt:
    def test_trivial_final_chain(self):
        assert dpt_at(3.0, BASE)

    def test_topological_final_chain(self):
        assert not dpt_at(1 / 3, BASE)

    def test_accidental_near_boundary(self):
        assert dpt_at(0.95, BASE)

    def test_ratio_must_be_positive(self):
        with pytest.raises(ValueError):
            dpt_at(0.0, BASE)

    @pytest.mark.parametrize("c", [0.25, 3.0])
    def test_scale_invariance(self, c):
        scaled = replace(BASE, j_inter=BASE.j_inter * c)
        for ratio in (0.85, 0.89, 0.9, 1.2):
            assert dpt_at(ratio, scaled) == dpt_at(ratio, BASE)
        assert scaled.duration == pytest.approx(BASE.duration / c)


class TestConfig:
    def test_defaults(self):
        assert BASE.unit_cells == 40
        assert BASE.duration == pytest.approx(10 / 60)

    @pytest.mark.parametrize("kw", [{"initial_ratio": 1.0}, {"initial_ratio": -0.1},
                                    {"window": 0}, {"workers": 0}])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            SweepConfig(**kw)

    def test_workers_from_environment(self, monkeypatch):
        monkeypatch.delenv(WORKERS_ENV, raising=False)
        assert resolve_workers() == 1
        monkeypatch.setenv(WORKERS_ENV, "3")
        assert resolve_workers() == 3
        assert resolve_workers(2) == 2


class TestBoundary:
    def test_reference_value(self):
        rc, hw = boundary(BASE)
        assert hw <= 1e-4
        assert abs(rc - TARGET_RC) <= 0.005

    def test_above_zero_mode_bound(self):
        rc, _ = boundary(replace(BASE, window=2.0))
        assert rc > 2**-0.5

    def test_bracket_must_straddle(self):
        with pytest.raises(BracketError):
            boundary(replace(BASE, bracket=(1.1, 1.5)))
        with pytest.raises(BracketError):
            boundary(replace(BASE, bracket=(0.3, 0.6)))

    def test_window_ladder_non_increasing(self):
        ladder = window_ladder(BASE, [1.0, 2.0, 6.0, 20.0])
        rcs = [r for _, r, _ in ladder]
        assert all(b <= a + 1e-12 for a, b in zip(rcs, rcs[1:]))
        assert all(r > 2**-0.5 for r in rcs)

    def test_calibration_reports_window(self):
        best, rc, ladder = calibrate_window(BASE, [2.0, 10.0])
        assert best in (2.0, 10.0)
        assert len(ladder) == 2
        assert abs(rc - TARGET_RC) <= 0.005


class TestBoundaryVsInitial:
    def test_curve_shape(self):
        rows = boundary_vs_initial([0.0, 0.4, 0.8], BASE)
        rcs = [r for _, r, _ in rows]
        assert rcs == sorted(rcs)
        assert all(r <= 1 + 1e-3 for r in rcs)
        assert abs(rcs[-1] - 1) < 0.01

    def test_exact_edge_state_matches_basis_state_limit(self):
        (_, r_exact, _), = boundary_vs_initial([1e-4], BASE)
        r_basis, _ = boundary(BASE)
        assert abs(r_exact - r_basis) < 1e-3


class TestScanDiagram:
    CONFIG = SweepConfig(unit_cells=10)

    def test_regions(self):
        grid = np.linspace(20, 120, 6)
        d = scan_diagram(grid, grid, self.CONFIG)
        ja, jb = np.meshgrid(grid, grid, indexing="ij")
        assert np.all(d.dpt[ja > jb])
        assert not np.any(d.dpt[ja / jb < 0.7])
        assert np.all(np.isnan(d.first_tc[~d.dpt]))
        assert np.all(d.first_tc[d.dpt] <= d.duration)
        assert d.monotone_violations == []

    def test_scaling(self):
        grid = np.linspace(20, 120, 5)
        c = 2.5
        a = scan_diagram(grid, grid, self.CONFIG)
        b = scan_diagram(c * grid, c * grid, replace(self.CONFIG, j_inter=self.CONFIG.j_inter * c))
        np.testing.assert_array_equal(a.dpt, b.dpt)
        np.testing.assert_allclose(b.first_tc * c, a.first_tc, rtol=0, atol=1e-6)

    def test_worker_count_does_not_change_result(self):
        grid = np.linspace(30, 90, 4)
        a = scan_diagram(grid, grid, self.CONFIG)
        b = scan_diagram(grid, grid, replace(self.CONFIG, workers=3))
        np.testing.assert_array_equal(a.dpt, b.dpt)
        np.testing.assert_array_equal(a.first_tc, b.first_tc)

    def test_single_cell(self):
        d = scan_diagram([60.0], [20.0], self.CONFIG)
        assert list(d.rows()) == [(60.0, 20.0, True, d.first_tc[0, 0])]

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            scan_diagram([], [60.0], self.CONFIG)
