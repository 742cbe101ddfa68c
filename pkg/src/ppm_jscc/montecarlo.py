"""Per-trial analog-PPM estimator driven by a lazily sampled noise path.

The receiver statistic at candidate m is a window sum of cell noise, i.e. a
difference W[m+L] - W[m] of the random walk W of cell integrals.  With one
window (L cells) per block, W is first sampled only at block boundaries.  A far
candidate block can only beat the local peak if the linear interpolation of
the coarse path plus the bridge excursion exceeds that peak.  Within a block the
deviation from linear interpolation is the difference of two independent
bridges, itself a bridge with twice the block variance; its supremum exceeds
``margin`` standard deviations with probability below exp(-2*margin**2)
(Brownian-bridge supremum law, which dominates the discrete walk).  Blocks under
that envelope are never refined.  Refinement
draws the within-block increments from their exact conditional law given the
block sum, so the path is the same random walk as the fully sampled one.

For small grids every block is refined and this reduces to brute force.
"""

from __future__ import annotations

import math

import numpy as np

from .channel import ChannelGrid, window_sums
from .signal import PpmConfig, SourceKind, pulse_autocorr

BRIDGE_MARGIN = 4.5


class _LazyWalk:
    def __init__(self, rng: np.random.Generator, n_blocks: int, block: int, sigma_cell: float):
        self.rng = rng
        self.block = block
        self.sigma_cell = sigma_cell
        steps = rng.standard_normal(n_blocks) * (sigma_cell * math.sqrt(block))
        self.skeleton = np.concatenate(([0.0], np.cumsum(steps)))

    def fill(self, blocks: np.ndarray) -> np.ndarray:
        """Rows of W at points kB .. kB+B-1 for each block k."""
        s0 = self.skeleton[blocks]
        jump = self.skeleton[blocks + 1] - s0
        g = self.rng.standard_normal((len(blocks), self.block)) * self.sigma_cell
        g += ((jump - g.sum(axis=1)) / self.block)[:, None]
        w = np.empty_like(g)
        w[:, 0] = 0.0
        np.cumsum(g[:, :-1], axis=1, out=w[:, 1:])
        return w + s0[:, None]


class _FixedWalk:
    """Same interface over a fully materialised set of increments."""

    def __init__(self, increments: np.ndarray, n_blocks: int, block: int):
        padded = np.zeros(n_blocks * block)
        padded[: len(increments)] = increments
        self.walk = np.concatenate(([0.0], np.cumsum(padded)))
        self.block = block
        self.skeleton = self.walk[::block]

    def fill(self, blocks: np.ndarray) -> np.ndarray:
        idx = blocks[:, None] * self.block + np.arange(self.block)[None, :]
        return self.walk[idx]


class _BlockStore:
    """Refined blocks of one walk, kept compactly (most blocks are never filled)."""

    def __init__(self, walk, n_blocks: int):
        self.walk = walk
        self.n_blocks = n_blocks
        self.pos = np.full(n_blocks, -1, dtype=np.int64)
        self.data = np.empty((0, walk.block))

    def need(self, blocks: np.ndarray) -> None:
        blocks = np.union1d(blocks, blocks + 1)
        blocks = blocks[blocks < self.n_blocks]
        blocks = blocks[self.pos[blocks] < 0]
        if len(blocks):
            self.pos[blocks] = np.arange(len(self.data), len(self.data) + len(blocks))
            self.data = np.concatenate((self.data, self.walk.fill(blocks)))

    def rows(self, blocks: np.ndarray) -> np.ndarray:
        return self.data[self.pos[blocks]]


class AnalogPpmSimulator:
    """Exact-in-distribution ML/MAP decoding for one PpmConfig."""

    def __init__(self, cfg: PpmConfig, source: SourceKind, margin: float = BRIDGE_MARGIN):
        self.cfg = cfg
        self.source = source
        self.grid = grid = ChannelGrid.from_config(cfg)
        self.block = grid.window
        self.n_blocks = -(-grid.n_cells // self.block) + 1
        self.n_cand_blocks = -(-grid.n_candidates // self.block)
        self.sigma_cell = math.sqrt(0.5 * cfg.n0 * grid.dt)
        self.sqrt_e = math.sqrt(cfg.energy)
        self.pen_coef = cfg.n0 / (4.0 * self.sqrt_e) if source is SourceKind.GAUSSIAN else 0.0
        self.envelope = cfg.amplitude * margin * self.sigma_cell * math.sqrt(2.0 * self.block)
        self.signal_reach = cfg.width / grid.dt  # candidates with nonzero signal

        first = np.arange(self.n_cand_blocks) * self.block
        last = np.minimum(first + self.block - 1, grid.n_candidates - 1)
        x_lo = (first - grid.half_count) * grid.candidate_step
        x_hi = (last - grid.half_count) * grid.candidate_step
        min_sq = np.where((x_lo <= 0) & (x_hi >= 0), 0.0, np.minimum(x_lo ** 2, x_hi ** 2))
        self.block_min_penalty = self.pen_coef * min_sq

    def clip(self, x: float) -> tuple[float, bool]:
        """Transmitted shift and whether x had to be clipped to the window."""
        lim = self.cfg.max_shift
        if abs(x) > lim:
            return math.copysign(lim, x), True
        return x, False

    def _values(self, store, blocks: np.ndarray, x_tx: float | None):
        w0 = store.rows(blocks)
        w1 = store.rows(blocks + 1)
        m = blocks[:, None] * self.block + np.arange(self.block)[None, :]
        cand = (m - self.grid.half_count) * self.grid.candidate_step
        val = self.cfg.amplitude * (w1 - w0) - self.pen_coef * cand ** 2
        if x_tx is not None:
            val += self.sqrt_e * pulse_autocorr(self.cfg, (x_tx - cand) * self.cfg.delta)
        val[m >= self.grid.n_candidates] = -np.inf
        return m.ravel(), val.ravel()

    def _decode(self, walk, x_tx: float | None) -> int:
        store = _BlockStore(walk, self.n_blocks)
        if x_tx is None:
            local = np.arange(0)
        else:
            mx = x_tx / self.grid.candidate_step + self.grid.half_count
            lo = max(int(math.floor(mx - self.signal_reach)) - 1, 0)
            hi = min(int(math.ceil(mx + self.signal_reach)) + 1, self.grid.n_candidates - 1)
            local = np.arange(lo // self.block, hi // self.block + 1)
        local = np.union1d(local, [self.n_cand_blocks - 1])
        store.need(local)
        m_loc, v_loc = self._values(store, local, x_tx)
        peak = np.max(v_loc)

        zs = np.diff(walk.skeleton)
        k = np.arange(self.n_cand_blocks)
        upper = self.cfg.amplitude * np.maximum(zs[k], zs[k + 1]) + self.envelope - self.block_min_penalty
        flag = upper >= peak
        flag[local] = False
        far = np.flatnonzero(flag)
        if len(far) == 0:
            return int(m_loc[np.argmax(v_loc)])
        store.need(far)
        m_far, v_far = self._values(store, far, x_tx)
        m_all = np.concatenate((m_loc, m_far))
        v_all = np.concatenate((v_loc, v_far))
        order = np.argsort(m_all, kind="stable")
        return int(m_all[order][np.argmax(v_all[order])])

    def candidate(self, m: int) -> float:
        return (m - self.grid.half_count) * self.grid.candidate_step

    def estimate(self, x_tx: float, rng: np.random.Generator) -> float:
        walk = _LazyWalk(rng, self.n_blocks, self.block, self.sigma_cell)
        return self.candidate(self._decode(walk, x_tx))

    def estimate_from_increments(self, x_tx: float | None, increments: np.ndarray) -> float:
        walk = _FixedWalk(np.asarray(increments, dtype=float), self.n_blocks, self.block)
        return self.candidate(self._decode(walk, x_tx))

    def estimate_full(self, x_tx: float | None, increments: np.ndarray | None) -> float:
        """Brute-force argmax over the whole candidate grid (reference path)."""
        cand = self.grid.candidates()
        val = -self.pen_coef * cand ** 2
        if x_tx is not None:
            val = val + self.sqrt_e * pulse_autocorr(self.cfg, (x_tx - cand) * self.cfg.delta)
        if increments is not None:
            val = val + self.cfg.amplitude * window_sums(increments, self.grid.window)
        return float(cand[int(np.argmax(val))])

