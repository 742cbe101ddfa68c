"""Monte Carlo batches, beta search, ENR sweeps and CSV/SVG reports."""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .bounds import (
    db_to_linear,
    gaussian_bound,
    gaussian_theorem_beta,
    reference_curves,
    uniform_bound,
    uniform_theorem_beta,
)
from .channel import trial_rng
from .montecarlo import AnalogPpmSimulator
from .separation import (
    QuantizerSpec,
    gaussian_quantizer,
    optimize_quantizer,
    predicted_distortion,
    sample_separation,
    uniform_quantizer,
)
from .signal import GAUSSIAN_PULSE_LIMIT, PpmConfig, SourceKind, SourceModel

CSV_HEADER = ("enr_db", "beta", "trials", "mse", "mse_ci95", "sdr_db", "bound_total",
              "bound_tilde", "separation_limit", "overflow_count", "seed")
BOOTSTRAP_RESAMPLES = 2000


class Scheme(str, Enum):
    ANALOG_UNIFORM = "AnalogPpmUniform"
    ANALOG_GAUSSIAN = "AnalogPpmGaussian"
    SEPARATION_UNIFORM = "SeparationUniform"
    SEPARATION_GAUSSIAN = "SeparationGaussian"

    @property
    def source(self) -> SourceKind:
        if self in (Scheme.ANALOG_UNIFORM, Scheme.SEPARATION_UNIFORM):
            return SourceKind.UNIFORM
        return SourceKind.GAUSSIAN

    @property
    def is_analog(self) -> bool:
        return self in (Scheme.ANALOG_UNIFORM, Scheme.ANALOG_GAUSSIAN)


@dataclass(frozen=True)
class Fixed:
    value: float

    def __post_init__(self):
        if not self.value > 1:
            raise ValueError("a fixed beta must exceed 1")


@dataclass(frozen=True)
class TheoremFormula:
    pass


@dataclass(frozen=True)
class GridSearch:
    span: tuple[float, float] = (0.3, 3.0)
    points: int = 12
    refine: int = 3


BetaPolicy = Fixed | TheoremFormula | GridSearch


def parse_beta_policy(text: str) -> BetaPolicy:
    """``fixed:<v>``, ``theorem`` or ``grid[:lo,hi,points]``."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind == "fixed":
        return Fixed(float(arg))
    if kind == "theorem":
        return TheoremFormula()
    if kind == "grid":
        if not arg:
            return GridSearch()
        lo, hi, pts = arg.split(",")
        return GridSearch((float(lo), float(hi)), int(pts))
    raise ValueError(f"unknown beta policy {text!r}")


@dataclass
class ExperimentConfig:
    scheme: Scheme
    enr_grid_db: list[float]
    beta_policy: BetaPolicy = field(default_factory=TheoremFormula)
    trials: int = 10_000
    master_seed: int = 0
    output_path: str = "results.csv"
    workers: int = 1
    bootstrap: bool = False
    pulse_limit: float = GAUSSIAN_PULSE_LIMIT
    delta: float = 1.0
    n0: float = 1.0
    reconstruction: str = "midpoint"

    def __post_init__(self):
        self.scheme = Scheme(self.scheme)
        self.enr_grid_db = [float(v) for v in self.enr_grid_db]
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.enr_grid_db:
            raise ValueError("ENR grid is empty")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def ppm_config(self, enr: float, beta: float) -> PpmConfig:
        if self.scheme.source is SourceKind.UNIFORM:
            return PpmConfig.for_uniform(beta, enr, n0=self.n0, delta=self.delta)
        return PpmConfig.for_gaussian(beta, enr, n0=self.n0, delta=self.delta,
                                      pulse_limit=self.pulse_limit)


@dataclass(frozen=True)
class TrialBatchResult:
    scheme: Scheme
    enr_db: float
    beta: float
    trials: int
    mse: float
    mse_ci95: float
    sdr_db: float
    overflow_count: int
    seed: int
    mse_ci95_bootstrap: float | None = None
    overload: float | None = None

    @property
    def enr(self) -> float:
        return float(db_to_linear(self.enr_db))


# ---------------------------------------------------------------- trial loops

def _analog_chunk(job):
    cfg, source, seed, enr_index, start, stop, noiseless = job
    sim = AnalogPpmSimulator(cfg, source)
    model = SourceModel(source)
    sq = np.empty(stop - start)
    over = np.zeros(stop - start, dtype=bool)
    for j, i in enumerate(range(start, stop)):
        rng = trial_rng(seed, enr_index, i)
        x = model.sample(rng)
        x_tx, over[j] = sim.clip(x)
        x_hat = sim.estimate_full(x_tx, None) if noiseless else sim.estimate(x_tx, rng)
        sq[j] = (x - x_hat) ** 2
    return sq, over


def _separation_chunk(job):
    spec, source, enr, seed, enr_index, start, stop, noiseless = job
    model = SourceModel(source)
    sq = np.empty(stop - start)
    for j, i in enumerate(range(start, stop)):
        rng = trial_rng(seed, enr_index, i)
        x = model.sample(rng)
        x_hat = float(spec.quantize(x)) if noiseless else sample_separation(spec, enr, x, rng)
        sq[j] = (x - x_hat) ** 2
    return sq, np.zeros(stop - start, dtype=bool)


def _run_jobs(worker, jobs, workers):
    if workers == 1 or len(jobs) == 1:
        parts = [worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(worker, jobs))
    # merged in trial-index order, so the result does not depend on scheduling
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _chunks(trials: int, workers: int):
    n = 1 if workers == 1 else 4 * workers
    edges = np.linspace(0, trials, min(n, trials) + 1).astype(int)
    return list(zip(edges[:-1], edges[1:]))


def bootstrap_ci95(sq: np.ndarray, seed: int, enr_index: int) -> float:
    """Half-width of the percentile bootstrap interval of the mean."""
    rng = trial_rng(seed, enr_index, 2 ** 32)  # stream disjoint from the trial streams
    means = np.array([sq[rng.integers(0, len(sq), len(sq))].mean()
                      for _ in range(BOOTSTRAP_RESAMPLES)])
    lo, hi = np.percentile(means, [2.5, 97.5])
    return float(0.5 * (hi - lo))


def _summarise(config, enr_db, beta, enr_index, sq, over, overload=None) -> TrialBatchResult:
    n = len(sq)
    mse = float(np.mean(sq))
    ci = float(1.96 * np.std(sq, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    variance = SourceModel(config.scheme.source).variance
    sdr = 10.0 * math.log10(variance / mse) if mse > 0 else math.inf
    boot = bootstrap_ci95(sq, config.master_seed, enr_index) if config.bootstrap and n > 1 else None
    return TrialBatchResult(config.scheme, float(enr_db), float(beta), n, mse, ci, sdr,
                            int(np.count_nonzero(over)), config.master_seed, boot, overload)


def run_batch(config: ExperimentConfig, enr_db: float, beta: float, enr_index: int = 0,
              noiseless: bool = False) -> TrialBatchResult:
    """Analog-PPM batch at one (ENR, beta) point.

    Trial i uses the generator keyed by (master_seed, enr_index, i) for both the
    source sample and the channel noise.  Gaussian samples whose pulse would
    leave the window are sent clipped to the edge and counted as overflows.
    """
    if not config.scheme.is_analog:
        raise ValueError("run_batch simulates analog schemes; use run_separation_batch")
    enr = float(db_to_linear(enr_db))
    cfg = config.ppm_config(enr, beta)
    jobs = [(cfg, config.scheme.source, config.master_seed, enr_index, a, b, noiseless)
            for a, b in _chunks(config.trials, config.workers)]
    sq, over = _run_jobs(_analog_chunk, jobs, config.workers)
    return _summarise(config, enr_db, beta, enr_index, sq, over)


def run_separation_batch(config: ExperimentConfig, enr_db: float, spec: QuantizerSpec,
                         enr_index: int = 0, noiseless: bool = False) -> TrialBatchResult:
    """Separation-baseline batch; the beta column carries M (positions are 1/M apart)."""
    if config.scheme.is_analog:
        raise ValueError("run_separation_batch simulates separation schemes")
    enr = float(db_to_linear(enr_db))
    jobs = [(spec, config.scheme.source, enr, config.master_seed, enr_index, a, b, noiseless)
            for a, b in _chunks(config.trials, config.workers)]
    sq, over = _run_jobs(_separation_chunk, jobs, config.workers)
    overload = spec.overload if config.scheme.source is SourceKind.GAUSSIAN else None
    return _summarise(config, enr_db, spec.m, enr_index, sq, over, overload)


# ---------------------------------------------------------------- parameter choice

def theorem_beta(source: SourceKind, enr: float) -> float:
    beta = uniform_theorem_beta(enr) if source is SourceKind.UNIFORM else gaussian_theorem_beta(enr)
    return max(beta, 1.0 + 1e-9)


def beta_search_grid(policy: GridSearch, center: float) -> np.ndarray:
    lo, hi = policy.span
    grid = center * np.geomspace(lo, hi, policy.points)
    grid = np.append(grid, center)
    return np.unique(grid[grid > 1.0])


def optimize_beta(config: ExperimentConfig, enr_db: float, enr_index: int = 0,
                  policy: GridSearch | None = None) -> tuple[float, TrialBatchResult]:
    """Coarse-to-fine empirical search over beta with common random numbers.

    Every candidate beta reuses the same trial streams, so the comparison is
    between paired estimates.  The coarse grid spans ``policy.span`` times the
    theorem beta (and includes it); the fine pass puts ``policy.refine`` times
    the coarse density around the best coarse point.
    """
    policy = policy or (config.beta_policy if isinstance(config.beta_policy, GridSearch) else GridSearch())
    enr = float(db_to_linear(enr_db))
    center = theorem_beta(config.scheme.source, enr)
    tried: dict[float, TrialBatchResult] = {}

    def evaluate(betas):
        for b in betas:
            b = float(b)
            if b not in tried:
                tried[b] = run_batch(config, enr_db, b, enr_index)

    coarse = beta_search_grid(policy, center)
    evaluate(coarse)
    best = min(tried, key=lambda b: (tried[b].mse, b))
    ratio = (policy.span[1] / policy.span[0]) ** (1.0 / max(policy.points - 1, 1))
    fine = best * np.geomspace(1.0 / ratio, ratio, 2 * policy.refine + 1)
    evaluate(fine[fine > 1.0])
    best = min(tried, key=lambda b: (tried[b].mse, b))
    return best, tried[best]


def separation_quantizer(config: ExperimentConfig, enr: float) -> QuantizerSpec:
    """Quantiser for the separation baseline under the configured policy.

    Fixed(v) pins M = round(v) (optimising only the Gaussian overload); the
    other policies minimise the exact predicted distortion over M and overload.
    """
    source = config.scheme.source
    if isinstance(config.beta_policy, Fixed):
        m = int(round(config.beta_policy.value))
        if source is SourceKind.UNIFORM:
            return uniform_quantizer(m)
        grid = np.linspace(0.5, 8.0, 151)
        vals = [predicted_distortion(gaussian_quantizer(m, v, config.reconstruction), enr, source)
                for v in grid]
        return gaussian_quantizer(m, float(grid[int(np.argmin(vals))]), config.reconstruction)
    spec, _ = optimize_quantizer(enr, source, reconstruction=config.reconstruction)
    return spec


def run_point(config: ExperimentConfig, enr_index: int) -> TrialBatchResult:
    enr_db = config.enr_grid_db[enr_index]
    enr = float(db_to_linear(enr_db))
    if not config.scheme.is_analog:
        return run_separation_batch(config, enr_db, separation_quantizer(config, enr), enr_index)
    policy = config.beta_policy
    if isinstance(policy, Fixed):
        return run_batch(config, enr_db, policy.value, enr_index)
    if isinstance(policy, TheoremFormula):
        return run_batch(config, enr_db, theorem_beta(config.scheme.source, enr), enr_index)
    return optimize_beta(config, enr_db, enr_index, policy)[1]


def run_sweep(config: ExperimentConfig) -> list[TrialBatchResult]:
    return [run_point(config, i) for i in range(len(config.enr_grid_db))]


# ---------------------------------------------------------------- reporting

def bound_columns(result: TrialBatchResult) -> tuple[float, float]:
    """(bound_total, bound_tilde) at the row's (ENR, beta); NaN where undefined."""
    if not result.scheme.is_analog:
        return math.nan, math.nan
    enr, beta = result.enr, result.beta
    if result.scheme.source is SourceKind.UNIFORM:
        rep = uniform_bound(enr, beta)
    else:
        if beta * enr <= 0.5:
            return math.nan, math.nan
        rep = gaussian_bound(enr, beta)
    return rep.total, rep.asymptotic_total


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def report_rows(results) -> list[list[str]]:
    rows = []
    for r in results:
        total, tilde = bound_columns(r)
        sigma2 = SourceModel(r.scheme.source).variance
        limit = reference_curves(r.enr, sigma2).separation_limit
        rows.append([_fmt(v) for v in (r.enr_db, r.beta, r.trials, r.mse, r.mse_ci95, r.sdr_db,
                                       total, tilde, limit, r.overflow_count, r.seed)])
    return rows


def default_output_dir() -> Path:
    return Path(os.environ.get("PPM_JSCC_OUTPUT_DIR", "results"))


def emit_report(results, path, plot: bool = False) -> list[Path]:
    """Write the CSV (and optionally an SVG next to it); returns the written paths."""
    results = list(results)
    if not results:
        raise ValueError("no results to report")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(report_rows(results))
    written = [path]
    if plot:
        written.append(plot_sdr(results, path.with_suffix(".svg")))
    return written


def plot_sdr(results, path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    results = sorted(results, key=lambda r: r.enr_db)
    enr_db = np.array([r.enr_db for r in results])
    sigma2 = SourceModel(results[0].scheme.source).variance
    fig, ax = plt.subplots(figsize=(6, 4.5))
    sdr = np.array([r.sdr_db for r in results])
    lo = np.array([10 * math.log10(sigma2 / (r.mse + r.mse_ci95)) for r in results])
    ax.errorbar(enr_db, sdr, yerr=sdr - lo, fmt="o", capsize=3, label=f"{results[0].scheme.value} (MC)")
    totals = np.array([bound_columns(r)[0] for r in results])
    if np.any(np.isfinite(totals)):
        ax.plot(enr_db, 10 * np.log10(sigma2 / totals), "--", label="upper bound on D")
    ax.plot(enr_db, 10 * np.log10(np.e) * 2 * db_to_linear(enr_db), ":", label="separation limit")
    ax.set_xlabel("ENR [dB]")
    ax.set_ylabel("SDR [dB]")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
