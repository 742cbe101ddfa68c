"""Separation baseline: scalar quantiser followed by digital PPM with ML detection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import log_ndtr, ndtr, ndtri

from .channel import correlation_profile, draw_noise
from .receivers import detect_digital_ppm
from .signal import PpmConfig, SourceKind


@dataclass(frozen=True)
class QuantizerSpec:
    levels: np.ndarray
    thresholds: np.ndarray
    overload: float = 0.0

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        thresholds = np.asarray(self.thresholds, dtype=float)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "thresholds", thresholds)
        if len(levels) < 2 or np.any(np.diff(levels) <= 0):
            raise ValueError("levels must be strictly increasing with at least two entries")
        if len(thresholds) != len(levels) - 1:
            raise ValueError("need exactly len(levels) - 1 thresholds")
        if np.any(thresholds <= levels[:-1]) or np.any(thresholds >= levels[1:]):
            raise ValueError("thresholds must interleave the levels")

    @property
    def m(self) -> int:
        return len(self.levels)

    def index(self, x):
        return np.searchsorted(self.thresholds, x, side="right")

    def quantize(self, x):
        return self.levels[self.index(x)]


def uniform_quantizer(m: int, support=(-0.5, 0.5)) -> QuantizerSpec:
    """m equally spaced cells over ``support`` with midpoint reconstruction."""
    if m < 2:
        raise ValueError("need at least two levels")
    lo, hi = map(float, support)
    if not hi > lo:
        raise ValueError("empty support interval")
    edges = np.linspace(lo, hi, m + 1)
    return QuantizerSpec(0.5 * (edges[:-1] + edges[1:]), edges[1:-1], overload=max(abs(lo), abs(hi)))


def gaussian_quantizer(m: int, overload: float, reconstruction: str = "midpoint") -> QuantizerSpec:
    """Uniform quantiser on [-overload, overload] for a standard Gaussian source.

    Outer cells extend to infinity.  ``reconstruction="centroid"`` replaces the
    midpoints with the conditional means of each cell.
    """
    spec = uniform_quantizer(m, (-overload, overload))
    if reconstruction == "midpoint":
        return spec
    if reconstruction != "centroid":
        raise ValueError(f"unknown reconstruction {reconstruction!r}")
    mean, _, _ = _gaussian_cell_moments(spec.thresholds)
    return QuantizerSpec(mean, spec.thresholds, overload)


def _gaussian_cell_moments(thresholds):
    """Probability, conditional mean and conditional second moment per cell."""
    edges = np.concatenate(([-np.inf], thresholds, [np.inf]))
    a, b = edges[:-1], edges[1:]
    fa, fb = np.isfinite(a), np.isfinite(b)
    a0, b0 = np.where(fa, a, 0.0), np.where(fb, b, 0.0)
    pa = np.where(fa, np.exp(-0.5 * a0 ** 2), 0.0) / math.sqrt(2 * math.pi)
    pb = np.where(fb, np.exp(-0.5 * b0 ** 2), 0.0) / math.sqrt(2 * math.pi)
    # upper-tail cells from the survival side to avoid cancellation near 1
    prob = np.where(a > 0, ndtr(-a) - ndtr(-b), ndtr(b) - ndtr(a))
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = (pa - pb) / prob
        second = (prob + np.where(fa, a0 * pa, 0.0) - np.where(fb, b0 * pb, 0.0)) / prob
    return np.clip(mean, a, b), second, prob


def ppm_error_probability(m: int, enr: float) -> float:
    """Symbol-error probability of ML detection among m orthogonal equal-energy pulses."""
    if m < 2:
        raise ValueError("need at least two pulse positions")
    mu = math.sqrt(2.0 * enr)

    def integrand(y):
        return math.exp(-0.5 * (y - mu) ** 2) / math.sqrt(2 * math.pi) * -math.expm1((m - 1) * log_ndtr(y))

    # the integrand is ~1 below the crossover ndtri(1 - 1/m) and decays above it
    knee = float(-ndtri(1.0 / m))
    pts = sorted({mu, knee})
    lo, hi = mu - 40.0, mu + 40.0
    val, _ = integrate.quad(integrand, lo, hi, points=pts, limit=200, epsabs=0, epsrel=1e-10)
    return val


def predicted_distortion(spec: QuantizerSpec, enr: float, source: SourceKind,
                         pe: float | None = None) -> float:
    """Exact end-to-end MSE: quantisation cell moments plus symmetric symbol errors.

    ``pe`` may carry a precomputed symbol-error probability for spec.m levels.
    """
    m = spec.m
    levels = spec.levels
    if source is SourceKind.UNIFORM:
        lo, hi = -0.5, 0.5
        edges = np.concatenate(([lo], np.clip(spec.thresholds, lo, hi), [hi]))
        prob = np.diff(edges)
        mean = 0.5 * (edges[:-1] + edges[1:])
        var = prob ** 2 / 12.0
        second = var + mean ** 2
    else:
        mean, second, prob = _gaussian_cell_moments(spec.thresholds)
    if pe is None:
        pe = ppm_error_probability(m, enr)
    keep = prob > 0
    prob, mean, second = prob[keep], mean[keep], second[keep]
    own = second - 2 * mean * levels[keep] + levels[keep] ** 2
    all_levels = second * m - 2 * mean * levels.sum() + (levels ** 2).sum()
    others = (all_levels - own) / (m - 1)
    return float(np.sum(prob * ((1 - pe) * own + pe * others)))


def optimize_quantizer(enr: float, source: SourceKind, m_max: int = 10 ** 6,
                       reconstruction: str = "midpoint") -> tuple[QuantizerSpec, float]:
    """Grid search of the level count (and overload for the Gaussian source).

    The distortion is unimodal in M (quantisation error falls, symbol errors
    rise), so the coarse log-spaced sweep stops once it has risen for several
    consecutive points past the running minimum.
    """

    def best_overload(m):
        if source is SourceKind.UNIFORM:
            s = uniform_quantizer(m)
            return s, predicted_distortion(s, enr, source)
        pe = ppm_error_probability(m, enr)

        def score(v):
            return predicted_distortion(gaussian_quantizer(m, v, reconstruction), enr, source, pe)

        grid = np.linspace(0.5, 8.0, 16)
        vals = [score(v) for v in grid]
        i = int(np.argmin(vals))
        fine = np.linspace(grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)], 15)
        vals = [score(v) for v in fine]
        j = int(np.argmin(vals))
        return gaussian_quantizer(m, fine[j], reconstruction), vals[j]

    coarse = np.unique(np.round(np.geomspace(2, m_max, 60)).astype(int))
    scores = []
    for m in coarse:
        scores.append(best_overload(int(m))[1])
        if len(scores) - 1 - int(np.argmin(scores)) >= 4:
            break
    i = int(np.argmin(scores))
    lo, hi = coarse[max(i - 1, 0)], coarse[min(i + 1, len(coarse) - 1)]
    fine = np.unique(np.round(np.geomspace(lo, hi, 15)).astype(int))
    results = {int(m): best_overload(int(m)) for m in fine}
    best = min(results, key=lambda m: results[m][1])
    # integer hill-climb to the exact discrete optimum
    while True:
        for m in (best - 1, best + 1):
            if m >= 2 and m not in results:
                results[m] = best_overload(m)
        step = min((m for m in (best - 1, best + 1) if m in results), key=lambda m: results[m][1])
        if results[step][1] >= results[best][1]:
            return results[best]
        best = step


def separation_config(spec: QuantizerSpec, enr: float, n0: float = 1.0) -> PpmConfig:
    """Digital PPM layout: beta = M so the M orthogonal positions tile [-0.5, 0.5]."""
    return PpmConfig.for_uniform(beta=float(spec.m), enr=enr, n0=n0)


def pulse_positions(m: int, beta: float) -> np.ndarray:
    return (np.arange(m) - 0.5 * (m - 1)) / beta


def run_separation_trial(cfg: PpmConfig, spec: QuantizerSpec, x: float, seed: int,
                         noiseless: bool = False) -> float:
    """Quantise, send the level's pulse with energy E, detect by ML; returns the output level."""
    if cfg.beta < spec.m:
        raise ValueError("beta must be at least M so that all positions fit")
    positions = pulse_positions(spec.m, cfg.beta)
    j = int(spec.index(x))
    noise = None if noiseless else draw_noise(cfg, seed)
    profile = correlation_profile(cfg, float(positions[j]), noise)
    return detect_digital_ppm(profile, spec.levels, positions)


def sample_separation(spec: QuantizerSpec, enr: float, x: float, rng: np.random.Generator) -> float:
    """Same channel outcome as run_separation_trial, drawn in O(1).

    Correlator outputs at orthogonal positions are independent: N(sqrt(2 ENR), 1)
    at the sent position and N(0, 1) elsewhere (in units of sqrt(N0/2)).  The
    largest of the M - 1 others is drawn by inversion, and on an error the
    detected position is uniform over the others by symmetry.
    """
    m = spec.m
    j = int(spec.index(x))
    y_sent = math.sqrt(2.0 * enr) + rng.standard_normal()
    u = rng.random()
    tail = -math.expm1(math.log(u) / (m - 1)) if u > 0 else 1.0
    y_other = -float(ndtri(tail))
    if y_other <= y_sent:
        return float(spec.levels[j])
    k = int(rng.integers(m - 1))
    return float(spec.levels[k + (k >= j)])
