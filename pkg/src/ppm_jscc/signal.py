"""Source models, the rectangular PPM pulse and transmitted waveforms."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

# Pulse-extent limit used for the Gaussian source (|x|*delta + delta/(2*beta) <= 6.35).
GAUSSIAN_PULSE_LIMIT = 6.35
GRID_POINTS_PER_WIDTH = 250


class OverflowSupport(ValueError):
    """The shifted pulse does not fit inside the transmission window."""


class SourceKind(enum.Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class SourceModel:
    kind: SourceKind

    @property
    def variance(self) -> float:
        return 1.0 / 12.0 if self.kind is SourceKind.UNIFORM else 1.0

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind is SourceKind.UNIFORM:
            return float(rng.uniform(-0.5, 0.5))
        return float(rng.standard_normal())


@dataclass(frozen=True)
class PpmConfig:
    """Analog PPM scheme parameters.

    ``time_horizon`` is the full transmission window length T; the window is
    [-T/2, T/2].  ``candidate_limit`` optionally caps the receiver's search to
    |x_hat| <= candidate_limit (0.5 for the uniform source).
    """

    beta: float
    energy: float
    n0: float = 1.0
    delta: float = 1.0
    grid_step: float | None = None
    time_horizon: float | None = None
    candidate_limit: float | None = None

    def __post_init__(self):
        if not self.beta > 1:
            raise ValueError(f"beta must exceed 1, got {self.beta}")
        for name in ("energy", "n0", "delta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.grid_step is None:
            object.__setattr__(self, "grid_step", self.delta / (GRID_POINTS_PER_WIDTH * self.beta))
        if self.time_horizon is None:
            object.__setattr__(self, "time_horizon", self.delta + self.delta / self.beta)
        if not 0 < self.grid_step <= self.half_width * (1 + 1e-12):
            raise ValueError("grid_step must be positive and at most delta/(2*beta)")
        if self.time_horizon < self.width * (1 - 1e-12):
            raise ValueError("time_horizon shorter than one pulse")

    @classmethod
    def for_uniform(cls, beta, enr, n0=1.0, delta=1.0, grid_step=None):
        return cls(beta=beta, energy=enr * n0, n0=n0, delta=delta, grid_step=grid_step,
                   time_horizon=delta + delta / beta, candidate_limit=0.5)

    @classmethod
    def for_gaussian(cls, beta, enr, n0=1.0, delta=1.0, grid_step=None,
                     pulse_limit=GAUSSIAN_PULSE_LIMIT):
        return cls(beta=beta, energy=enr * n0, n0=n0, delta=delta, grid_step=grid_step,
                   time_horizon=2.0 * pulse_limit)

    @property
    def enr(self) -> float:
        return self.energy / self.n0

    @property
    def width(self) -> float:
        """Pulse width delta/beta in seconds."""
        return self.delta / self.beta

    @property
    def half_width(self) -> float:
        return 0.5 * self.delta / self.beta

    @property
    def amplitude(self) -> float:
        return math.sqrt(self.beta / self.delta)

    @property
    def max_shift(self) -> float:
        """Largest |x| whose pulse stays inside [-T/2, T/2]."""
        return (0.5 * self.time_horizon - self.half_width) / self.delta


@dataclass
class SampledWaveform:
    """Piecewise-constant signal; sample k covers [t_start + k*dt, t_start + (k+1)*dt)."""

    t_start: float
    dt: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        self.samples = np.asarray(self.samples, dtype=float)

    @property
    def centers(self) -> np.ndarray:
        return self.t_start + (np.arange(len(self.samples)) + 0.5) * self.dt

    @property
    def energy(self) -> float:
        return float(np.sum(self.samples ** 2) * self.dt)

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.samples))) if len(self.samples) else 0.0

    def support(self) -> tuple[float, float]:
        idx = np.flatnonzero(self.samples)
        return (self.t_start + idx[0] * self.dt, self.t_start + (idx[-1] + 1) * self.dt)


def _window_cells(cfg: PpmConfig) -> int:
    return max(2, int(round(cfg.width / cfg.grid_step)))


def _pulse_samples(centers: np.ndarray, shift: float, cfg: PpmConfig) -> np.ndarray:
    # cell takes the full amplitude when its center lies inside the support
    tol = 1e-9 * cfg.grid_step
    inside = np.abs(centers - shift) <= cfg.half_width + tol
    return np.where(inside, cfg.amplitude, 0.0)


def rect_pulse(cfg: PpmConfig) -> SampledWaveform:
    """Unit-energy rectangular pulse of width delta/beta centred at t = 0."""
    n_win = _window_cells(cfg)
    t_start = -(0.5 * n_win + 1) * cfg.grid_step
    centers = t_start + (np.arange(n_win + 2) + 0.5) * cfg.grid_step
    return SampledWaveform(t_start, cfg.grid_step, _pulse_samples(centers, 0.0, cfg))


def modulate(cfg: PpmConfig, x: float) -> SampledWaveform:
    """sqrt(E) * phi(t - x*delta) sampled on the channel grid over [-T/2, T/2].

    Raises OverflowSupport when the shifted pulse leaves the window.
    """
    from .channel import ChannelGrid

    if abs(x) > cfg.max_shift + 1e-12:
        raise OverflowSupport(f"pulse at x={x} exits [-T/2, T/2] (|x| <= {cfg.max_shift:.6g})")
    grid = ChannelGrid.from_config(cfg)
    samples = math.sqrt(cfg.energy) * _pulse_samples(grid.cell_centers(), x * cfg.delta, cfg)
    return SampledWaveform(grid.t_start, cfg.grid_step, samples)


def pulse_autocorr(cfg: PpmConfig, tau):
    """Autocorrelation of the rectangular pulse: 1 - |tau|/(delta/beta), zero beyond."""
    r = 1.0 - np.abs(tau) / cfg.width
    r = np.maximum(r, 0.0)
    return float(r) if np.ndim(r) == 0 else r
