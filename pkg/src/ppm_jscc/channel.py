"""Discretised AWGN channel and the correlation-receiver statistic.

White noise has no pointwise samples, so the channel noise is carried as its
integral over each grid cell.  A correlation against the rectangular pulse is
then a window sum of those integrals, computed with prefix sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .signal import OverflowSupport, PpmConfig, _window_cells, pulse_autocorr


def trial_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Generator that is a pure function of (master_seed, key...)."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ChannelGrid:
    """Cell layout shared by the transmitter, the noise and the receiver.

    Candidate m (0 <= m <= 2*half_count) sits at x_hat = (m - half_count)*dt/delta
    and correlates over cells [m, m + window).  The grid has 2*half_count + window
    cells and is symmetric about t = 0.
    """

    dt: float
    delta: float
    window: int
    half_count: int

    @classmethod
    def from_config(cls, cfg: PpmConfig) -> "ChannelGrid":
        dt = cfg.grid_step
        window = _window_cells(cfg)
        half = math.floor((0.5 * cfg.time_horizon - 0.5 * window * dt) / dt + 1e-9)
        if cfg.candidate_limit is not None:
            half = min(half, math.floor(cfg.candidate_limit * cfg.delta / dt + 1e-9))
        if half < 0:
            raise ValueError("time horizon too short for the pulse window")
        return cls(dt, cfg.delta, window, half)

    @property
    def n_cells(self) -> int:
        return 2 * self.half_count + self.window

    @property
    def n_candidates(self) -> int:
        return 2 * self.half_count + 1

    @property
    def t_start(self) -> float:
        return -(self.half_count + 0.5 * self.window) * self.dt

    @property
    def candidate_step(self) -> float:
        return self.dt / self.delta

    def cell_centers(self) -> np.ndarray:
        return self.t_start + (np.arange(self.n_cells) + 0.5) * self.dt

    def candidates(self) -> np.ndarray:
        return (np.arange(self.n_candidates) - self.half_count) * self.candidate_step

    def candidate_index(self, x: float) -> int:
        """Index of the candidate nearest to x (clipped to the grid)."""
        m = int(round(x / self.candidate_step)) + self.half_count
        return min(max(m, 0), self.n_candidates - 1)


@dataclass
class NoiseRealization:
    """Per-cell integrals of n(t); i.i.d. N(0, (N0/2)*dt)."""

    increments: np.ndarray = field(repr=False)
    dt: float
    seed: int


@dataclass
class CorrelationProfile:
    candidates: np.ndarray
    statistic: np.ndarray
    pulse_width: float  # 1/beta, in candidate (x) units

    def __post_init__(self):
        self.candidates = np.asarray(self.candidates, dtype=float)
        self.statistic = np.asarray(self.statistic, dtype=float)
        if self.candidates.shape != self.statistic.shape:
            raise ValueError("candidates and statistic lengths differ")

    def __len__(self):
        return len(self.candidates)


def draw_noise(cfg: PpmConfig, seed: int) -> NoiseRealization:
    grid = ChannelGrid.from_config(cfg)
    rng = np.random.default_rng(seed)
    sigma = math.sqrt(0.5 * cfg.n0 * grid.dt)
    return NoiseRealization(sigma * rng.standard_normal(grid.n_cells), grid.dt, seed)


def window_sums(increments: np.ndarray, window: int) -> np.ndarray:
    """Sums over every run of `window` consecutive cells, via one prefix sum."""
    prefix = np.concatenate(([0.0], np.cumsum(increments)))
    return prefix[window:] - prefix[:-window]


def correlation_profile(cfg: PpmConfig, x_true: float | None,
                        noise: NoiseRealization | None) -> CorrelationProfile:
    """R_{r,phi}(x_hat*delta) on the candidate grid.

    ``x_true=None`` gives the noise-only profile, ``noise=None`` the noiseless one.
    """
    grid = ChannelGrid.from_config(cfg)
    cand = grid.candidates()
    stat = np.zeros(len(cand))
    if x_true is not None:
        if abs(x_true) > cfg.max_shift + 1e-12:
            raise OverflowSupport(f"pulse at x={x_true} exits the transmission window")
        stat += math.sqrt(cfg.energy) * pulse_autocorr(cfg, (x_true - cand) * cfg.delta)
    if noise is not None:
        if len(noise.increments) != grid.n_cells or not math.isclose(noise.dt, grid.dt):
            raise ValueError("noise realization does not match the channel grid")
        stat += cfg.amplitude * window_sums(noise.increments, grid.window)
    return CorrelationProfile(cand, stat, 1.0 / cfg.beta)
