import math

import numpy as np
import pytest
from scipy import stats

from ppm_jscc import ChannelGrid, NoiseRealization, OverflowSupport, PpmConfig, correlation_profile, draw_noise, trial_rng
from ppm_jscc.channel import window_sums
from ppm_jscc.signal import modulate


def test_grid_is_symmetric_and_spaced():
    cfg = PpmConfig.for_uniform(4.0, 10.0)
    grid = ChannelGrid.from_config(cfg)
    cand = grid.candidates()
    assert cand[0] == pytest.approx(-0.5) and cand[-1] == pytest.approx(0.5)
    assert np.allclose(np.diff(cand), cfg.grid_step / cfg.delta)
    centers = grid.cell_centers()
    assert centers[0] == pytest.approx(-centers[-1])
    assert grid.n_cells * grid.dt == pytest.approx(cfg.time_horizon)


def test_draw_noise_is_deterministic():
    cfg = PpmConfig.for_uniform(4.0, 10.0)
    a, b = draw_noise(cfg, 123), draw_noise(cfg, 123)
    assert np.array_equal(a.increments, b.increments)
    assert not np.array_equal(a.increments, draw_noise(cfg, 124).increments)


def test_draw_noise_tiny_n0():
    cfg = PpmConfig.for_uniform(4.0, 1.0, n0=1e-30)
    assert np.max(np.abs(draw_noise(cfg, 0).increments)) < 1e-15


def test_noise_variance_chi_square_interval():
    # N0 = 2, dt = 0.001 -> variance 0.001; 10^6 cells
    cfg = PpmConfig(beta=2.0, energy=1.0, n0=2.0, grid_step=0.001, time_horizon=1000.0)
    inc = draw_noise(cfg, 7).increments
    n = len(inc)
    assert n == 1_000_000
    s2 = float(np.sum(inc ** 2)) / n  # mean is known to be zero
    lo = 0.001 * stats.chi2.ppf(0.0005, n) / n
    hi = 0.001 * stats.chi2.ppf(0.9995, n) / n
    assert lo < s2 < hi


def test_window_sums_against_loop():
    rng = np.random.default_rng(1)
    v = rng.standard_normal(57)
    out = window_sums(v, 9)
    ref = np.array([v[i:i + 9].sum() for i in range(57 - 8)])
    assert np.allclose(out, ref)


def test_noiseless_profile_is_triangle():
    cfg = PpmConfig.for_uniform(4.0, 9.0)
    prof = correlation_profile(cfg, 0.2, None)
    i = int(np.argmax(prof.statistic))
    assert prof.candidates[i] == pytest.approx(0.2, abs=cfg.grid_step)
    assert prof.statistic[i] == pytest.approx(3.0)
    far = np.abs(prof.candidates - 0.2) > 1 / cfg.beta
    assert np.all(prof.statistic[far] == 0.0)


def test_profile_matches_direct_correlation():
    cfg = PpmConfig.for_uniform(3.0, 5.0)
    noise = draw_noise(cfg, 5)
    grid = ChannelGrid.from_config(cfg)
    prof = correlation_profile(cfg, 0.1, noise)
    received = modulate(cfg, 0.1).samples * cfg.grid_step + noise.increments  # cell integrals of r(t)
    for m in (0, 17, grid.half_count, grid.n_candidates - 1):
        template = modulate(PpmConfig.for_uniform(3.0, 1.0), float(grid.candidates()[m])).samples
        direct = float(np.dot(template, received))
        assert direct == pytest.approx(prof.statistic[m], abs=0.02)


def test_profile_linearity():
    cfg = PpmConfig.for_uniform(5.0, 4.0)
    noise = draw_noise(cfg, 11)
    full = correlation_profile(cfg, -0.3, noise).statistic
    parts = correlation_profile(cfg, -0.3, None).statistic + correlation_profile(cfg, None, noise).statistic
    assert np.allclose(full, parts, atol=1e-12)


def test_profile_rejects_overflow_and_mismatched_noise():
    cfg = PpmConfig.for_gaussian(3.68, 22.387)
    with pytest.raises(OverflowSupport):
        correlation_profile(cfg, cfg.max_shift + 0.1, None)
    other = draw_noise(PpmConfig.for_uniform(3.68, 22.387), 0)
    with pytest.raises(ValueError):
        correlation_profile(cfg, 0.0, other)


def test_profile_at_truth_mean_and_variance():
    cfg = PpmConfig.for_uniform(4.0, 16.0, n0=0.5, grid_step=1 / 400)
    grid = ChannelGrid.from_config(cfg)
    m = grid.candidate_index(0.0)
    vals = np.array([correlation_profile(cfg, 0.0, draw_noise(cfg, s)).statistic[m] for s in range(4000)])
    se_mean = math.sqrt(0.25 / len(vals))
    assert abs(vals.mean() - math.sqrt(cfg.energy)) < 4 * se_mean
    assert abs(vals.var(ddof=1) - 0.25) < 4 * 0.25 * math.sqrt(2 / len(vals))


def test_trial_rng_depends_on_every_key():
    a = trial_rng(1, 0, 5).standard_normal(4)
    assert np.array_equal(a, trial_rng(1, 0, 5).standard_normal(4))
    for other in (trial_rng(2, 0, 5), trial_rng(1, 1, 5), trial_rng(1, 0, 6)):
        assert not np.array_equal(a, other.standard_normal(4))


def test_noise_realization_fields():
    cfg = PpmConfig.for_uniform(2.0, 1.0)
    n = draw_noise(cfg, 3)
    assert isinstance(n, NoiseRealization)
    assert n.seed == 3 and n.dt == cfg.grid_step
