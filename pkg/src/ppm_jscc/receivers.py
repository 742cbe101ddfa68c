"""ML / MAP analog-PPM receivers and the digital-PPM detector."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import CorrelationProfile
from .signal import PpmConfig


@dataclass(frozen=True)
class Estimate:
    x_hat: float
    argmax_index: int
    tie_count: int


def _argmax(candidates: np.ndarray, values: np.ndarray) -> Estimate:
    if len(values) == 0:
        raise ValueError("empty correlation profile")
    i = int(np.argmax(values))  # first occurrence: smallest index wins ties
    ties = int(np.count_nonzero(values == values[i]))
    return Estimate(float(candidates[i]), i, ties)


def ml_uniform(profile: CorrelationProfile) -> Estimate:
    """Maximum-correlation estimate over |x_hat| <= 0.5."""
    if len(profile) and np.max(np.abs(profile.candidates)) > 0.5 + 1e-9:
        raise ValueError("uniform-source candidates must lie in [-0.5, 0.5]")
    return _argmax(profile.candidates, profile.statistic)


def map_penalty(cfg: PpmConfig, candidates: np.ndarray) -> np.ndarray:
    """Gaussian-prior term N0/(4 sqrt(E)) * a^2 of the MAP metric."""
    return cfg.n0 / (4.0 * math.sqrt(cfg.energy)) * np.asarray(candidates) ** 2


def map_gaussian(profile: CorrelationProfile, cfg: PpmConfig) -> Estimate:
    """MAP estimate for a standard Gaussian source: argmax of R - N0 a^2/(4 sqrt(E))."""
    lam = profile.statistic - map_penalty(cfg, profile.candidates)
    return _argmax(profile.candidates, lam)


def detect_digital_ppm(profile: CorrelationProfile, levels, positions=None) -> float:
    """ML detection over M orthogonal pulse positions; returns the detected level.

    ``positions`` (x units) default to the levels themselves and must be spaced
    at least one pulse width apart.
    """
    levels = np.asarray(levels, dtype=float)
    positions = levels if positions is None else np.asarray(positions, dtype=float)
    if len(positions) != len(levels) or len(levels) == 0:
        raise ValueError("levels and positions must match one-to-one")
    step = profile.candidates[1] - profile.candidates[0] if len(profile) > 1 else 0.0
    if len(positions) > 1 and np.min(np.diff(np.sort(positions))) < profile.pulse_width - 0.5 * step:
        raise ValueError("pulse positions closer than one pulse width are not orthogonal")
    idx = np.searchsorted(profile.candidates, positions)
    idx = np.clip(idx, 1, len(profile) - 1)
    left = profile.candidates[idx - 1]
    idx = np.where(np.abs(positions - left) <= np.abs(profile.candidates[idx] - positions), idx - 1, idx)
    return float(levels[int(np.argmax(profile.statistic[idx]))])
