import math

import numpy as np
import pytest

from blowuplab import (
    DomainError,
    EnsembleSpec,
    em_path,
    hyperbolic_sde_model,
    pathwise_growth_slope,
    run_ensemble,
    volatility_masking_scan,
)

PAPER = dict(k=0.05, sigma=0.05)


def paper_spec(n_paths, master_seed, t_end=30.0):
    return EnsembleSpec(model=hyperbolic_sde_model(**PAPER), A0=1.0, dt=0.01,
                        t_end=t_end, n_paths=n_paths, master_seed=master_seed)


class TestRunEnsemble:
    def test_serial_equals_parallel(self):
        # 700 paths spans two worker chunks
        serial = run_ensemble(paper_spec(700, 11), workers=1)
        threaded = run_ensemble(paper_spec(700, 11), workers=8)
        assert serial.exploded_fraction == threaded.exploded_fraction
        assert serial.absorbed_fraction == threaded.absorbed_fraction
        assert np.array_equal(serial.blowup_times, threaded.blowup_times)
        assert serial.quantiles == threaded.quantiles
        assert np.array_equal(serial.terminal_values, threaded.terminal_values)
        assert np.array_equal(serial.slopes, threaded.slopes, equal_nan=True)
        assert np.array_equal(serial.outcomes, threaded.outcomes)
        assert np.array_equal(serial.event_times, threaded.event_times,
                              equal_nan=True)
        assert np.array_equal(serial.final_levels, threaded.final_levels,
                              equal_nan=True)

    def test_single_path_matches_em_path(self):
        stats = run_ensemble(paper_spec(1, 77))
        path = em_path(hyperbolic_sde_model(**PAPER), 1.0, 0.01, 30.0,
                       seed=(77, 0))
        assert stats.outcomes[0] == "survived"
        assert not path.exploded and not path.absorbed
        assert math.isnan(stats.event_times[0])
        assert stats.final_levels[0] == path.values[-1]
        assert stats.slopes[0] == pytest.approx(pathwise_growth_slope(path),
                                                rel=1e-12)

    def test_single_exploding_path_matches_em_path(self):
        model = hyperbolic_sde_model(0.05, 0.0)
        spec = EnsembleSpec(model=model, A0=1.0, dt=0.01, t_end=30.0,
                            n_paths=1, master_seed=77)
        stats = run_ensemble(spec)
        path = em_path(model, 1.0, 0.01, 30.0, seed=(77, 0))
        assert stats.outcomes[0] == "exploded"
        assert stats.event_times[0] == path.explosion_step_time
        assert stats.final_levels[0] >= spec.threshold

    def test_zero_noise_ensemble_is_degenerate(self):
        spec = EnsembleSpec(model=hyperbolic_sde_model(0.01, 0.0), A0=1.0,
                            dt=0.01, t_end=150.0, n_paths=16, master_seed=3)
        stats = run_ensemble(spec)
        assert stats.exploded_fraction == 1.0
        assert stats.absorbed_fraction == 0.0
        assert stats.blowup_times.min() == stats.blowup_times.max()
        assert stats.blowup_times[0] == pytest.approx(100.0, abs=0.5)
        assert len(set(stats.quantiles.values())) == 1
        assert stats.terminal_values.size == 0

    def test_master_seed_changes_little(self):
        a = run_ensemble(paper_spec(2000, 42), workers=4)
        b = run_ensemble(paper_spec(2000, 43), workers=4)
        assert abs(a.exploded_fraction - b.exploded_fraction) < 0.05
        assert abs(a.absorbed_fraction - b.absorbed_fraction) < 0.05

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            run_ensemble(EnsembleSpec(model=None, A0=1.0, dt=0.01, t_end=1.0,
                                      n_paths=4, master_seed=0))
        with pytest.raises(DomainError):
            run_ensemble(paper_spec(0, 1))
        bad = EnsembleSpec(model=hyperbolic_sde_model(**PAPER), A0=-1.0,
                           dt=0.01, t_end=1.0, n_paths=4, master_seed=0)
        with pytest.raises(DomainError):
            run_ensemble(bad)


@pytest.fixture(scope="module")
def stats():
    return run_ensemble(paper_spec(500, 42), workers=4)


@pytest.fixture(scope="module")
def points():
    template = EnsembleSpec(model=None, A0=1.0, dt=0.01, t_end=80.0,
                            n_paths=60, master_seed=2718)
    return volatility_masking_scan(0.01, [0.0, 0.02, 0.1], template,
                                   window=64, record_points=320)


class TestStatsInvariants:
    def test_fractions_and_counts_agree(self, stats):
        n = stats.n_paths
        exploded = int(np.count_nonzero(stats.outcomes == "exploded"))
        absorbed = int(np.count_nonzero(stats.outcomes == "absorbed"))
        survived = int(np.count_nonzero(stats.outcomes == "survived"))
        assert exploded + absorbed + survived == n
        assert stats.exploded_fraction == exploded / n
        assert stats.absorbed_fraction == absorbed / n
        assert stats.terminal_values.size == survived
        assert stats.blowup_times.size == exploded
        assert stats.slopes.size == n

    def test_event_times_mark_non_survivors(self, stats):
        finite = np.isfinite(stats.event_times)
        assert np.array_equal(finite, stats.outcomes != "survived")
        assert np.all(stats.event_times[finite] > 0.0)

    def test_final_levels_semantics(self, stats):
        absorbed = stats.outcomes == "absorbed"
        assert np.all(np.isnan(stats.final_levels[absorbed]))
        exploded = stats.outcomes == "exploded"
        assert np.all(stats.final_levels[exploded] >= 1e9)
        survived = stats.outcomes == "survived"
        assert np.array_equal(np.sort(stats.final_levels[survived]),
                              np.sort(stats.terminal_values))

    def test_blowup_times_sorted_and_quantiles_monotone(self, stats):
        times = stats.blowup_times
        assert np.all(np.diff(times) >= 0.0)
        orders = sorted(stats.quantiles)
        values = [stats.quantiles[q] for q in orders]
        assert orders == [5, 25, 50, 75, 95]
        assert all(a <= b for a, b in zip(values, values[1:]))
        assert times.min() <= values[0] and values[-1] <= times.max()

    def test_slope_summary_matches_measurable_slopes(self, stats):
        measured = stats.slopes[np.isfinite(stats.slopes)]
        assert stats.slope_mean == pytest.approx(float(measured.mean()))
        assert stats.slope_std == pytest.approx(float(measured.std(ddof=1)))


class TestMaskingScan:
    def test_noiseless_growth_is_always_flagged(self, points):
        assert points[0].sigma == 0.0
        assert points[0].flagged_fraction == 1.0
        assert points[0].n_analyzed == points[0].n_paths

    def test_noise_masks_the_signal(self, points):
        fractions = [p.flagged_fraction for p in points]
        assert fractions[1] < fractions[0]
        assert fractions[2] < fractions[0]
        # frozen run: 1.0, 0.45, then 23 of 59 once one path is absorbed
        assert fractions[1] == pytest.approx(0.45, abs=1e-12)
        assert points[2].n_analyzed == 59

    def test_absorbed_paths_leave_the_denominator(self, points):
        noisy = points[2]
        assert noisy.absorbed_fraction == pytest.approx(1.0 / 60.0)
        assert noisy.n_analyzed == noisy.n_paths - 1
        assert noisy.flagged_fraction == noisy.n_flagged / noisy.n_analyzed

    def test_rejects_bad_arguments(self):
        template = EnsembleSpec(model=None, A0=1.0, dt=0.01, t_end=80.0,
                                n_paths=4, master_seed=0)
        with pytest.raises(DomainError):
            volatility_masking_scan(0.01, [], template)
        with pytest.raises(DomainError):
            volatility_masking_scan(0.01, [0.1, 0.1], template)
        with pytest.raises(DomainError):
            volatility_masking_scan(0.01, [0.1, 0.05], template)
        with pytest.raises(DomainError):
            volatility_masking_scan(0.01, [0.0], template, window=4)
        with pytest.raises(DomainError):
            volatility_masking_scan(0.01, [0.0], template, window=64,
                                    record_points=32)
