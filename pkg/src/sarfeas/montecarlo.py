"""Stochastic oracles for the analytic detection formulas.

Randomness contract: trials are generated in fixed-size blocks, and block
``i`` always draws from ``Philox(SeedSequence(seed, spawn_key=(i,)))``.
Chunking and worker count only decide how blocks are scheduled, so integer
success counts, and therefore every estimate, are bit-identical for a given
seed no matter how the work is split.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .detection import WindowCounts, threshold_from_pfa
from .errors import DomainError

GENERATOR = "numpy.random.Philox(SeedSequence(seed, spawn_key=(block,)))"
PIXEL_BLOCK = 1 << 16
WINDOW_BLOCK_PIXELS = 1 << 20


@dataclass(frozen=True)
class McConfig:
    n_trials: int = 1_000_000
    seed: int = 20240611
    chunk_size: int = 1 << 20

    def __post_init__(self):
        if self.n_trials < 1:
            raise DomainError(f"n_trials must be >= 1, got {self.n_trials}")
        if self.chunk_size < 1:
            raise DomainError(f"chunk_size must be >= 1, got {self.chunk_size}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    std_err: float
    successes: int
    n_trials: int


@dataclass(frozen=True)
class ShipTrialEstimate:
    p_d_ship: McEstimate
    p_fa_ship: McEstimate


def worker_count() -> int:
    """Worker threads from ``SARFEAS_THREADS`` (unset or 0 means one per CPU)."""
    raw = os.environ.get("SARFEAS_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"SARFEAS_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise DomainError("SARFEAS_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _estimate(successes: int, n: int) -> McEstimate:
    p = successes / n
    return McEstimate(p, math.sqrt(p * (1.0 - p) / n), successes, n)


def _run_blocks(n_trials: int, block: int, chunk_size: int, count_block: Callable[[int, int], int]) -> int:
    """Sum ``count_block(block_index, size)`` over all blocks.

    Blocks are grouped into chunks of roughly ``chunk_size`` trials for
    scheduling; the sum is over integers so the order is irrelevant.
    """
    n_blocks = -(-n_trials // block)
    sizes = [block] * (n_blocks - 1) + [n_trials - block * (n_blocks - 1)]
    per_chunk = max(1, chunk_size // block)
    chunks = [range(i, min(i + per_chunk, n_blocks)) for i in range(0, n_blocks, per_chunk)]

    def run_chunk(idx: range) -> int:
        return sum(count_block(i, sizes[i]) for i in idx)

    workers = min(worker_count(), len(chunks))
    if workers <= 1:
        return sum(run_chunk(c) for c in chunks)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(run_chunk, chunks))


def mc_pixel_pd(alpha_prime: float, beta: float, p_fa: float, cfg: McConfig) -> McEstimate:
    """Empirical pixel detection rate under the complex pixel model.

    Each trial draws ln X ~ Normal(alpha', beta^2), a uniform phase and
    unit-power circular Gaussian noise (each quadrature variance 1/2), and
    counts ``|sqrt(X) e^{j phi} + noise|^2 >= -ln p_fa``.  ``beta = 0`` gives
    a fixed SNR ``exp(alpha')``; ``alpha' = -inf`` gives noise only.
    """
    if beta < 0 or not math.isfinite(beta):
        raise DomainError(f"beta must be finite and >= 0, got {beta}")
    if math.isnan(alpha_prime) or alpha_prime == math.inf:
        raise DomainError(f"alpha' must be finite or -inf, got {alpha_prime}")
    thr = threshold_from_pfa(p_fa)
    noise_sd = math.sqrt(0.5)

    def count(block: int, n: int) -> int:
        rng = block_rng(cfg.seed, block)
        log_snr = rng.normal(alpha_prime if math.isfinite(alpha_prime) else 0.0, beta, n)
        amp = np.exp(0.5 * log_snr) if math.isfinite(alpha_prime) else np.zeros(n)
        phase = rng.uniform(0.0, 2.0 * math.pi, n)
        re = amp * np.cos(phase) + rng.normal(0.0, noise_sd, n)
        im = amp * np.sin(phase) + rng.normal(0.0, noise_sd, n)
        return int(np.count_nonzero(re * re + im * im >= thr))

    hits = _run_blocks(cfg.n_trials, PIXEL_BLOCK, cfg.chunk_size, count)
    return _estimate(hits, cfg.n_trials)


def mc_conditional_pd(chi: float, p_fa: float, cfg: McConfig) -> McEstimate:
    """Empirical detection rate at a fixed pixel SNR ``chi``."""
    if chi < 0:
        raise DomainError("SNR must be non-negative")
    return mc_pixel_pd(math.log(chi) if chi > 0 else -math.inf, 0.0, p_fa, cfg)


def mc_ship_trial(counts: WindowCounts, p_d: float, p_fa: float, cfg: McConfig) -> ShipTrialEstimate:
    """Empirical m-of-n window decisions from per-pixel Bernoulli draws.

    Target windows hold ``n_ps_w`` ship pixels (detected w.p. ``p_d``) and
    ``n_pw - n_ps_w`` noise pixels; noise-only windows hold ``n_pw`` noise
    pixels.  Both use ``cfg.n_trials`` windows, from disjoint block streams.
    """
    for p, name in ((p_d, "p_d"), (p_fa, "p_fa")):
        if not 0 <= p <= 1:
            raise DomainError(f"{name} must be a probability, got {p}")
    n_pw, n_ship, m = counts.n_pw, counts.n_ps_w, counts.m
    rows = max(1, WINDOW_BLOCK_PIXELS // n_pw)
    col_p = np.full(n_pw, p_fa)
    col_p[:n_ship] = p_d
    n_blocks = -(-cfg.n_trials // rows)

    def target(block: int, n: int) -> int:
        u = block_rng(cfg.seed, block).random((n, n_pw))
        return int(np.count_nonzero(np.count_nonzero(u < col_p, axis=1) >= m))

    def noise(block: int, n: int) -> int:
        u = block_rng(cfg.seed, n_blocks + block).random((n, n_pw))
        return int(np.count_nonzero(np.count_nonzero(u < p_fa, axis=1) >= m))

    hits_t = _run_blocks(cfg.n_trials, rows, cfg.chunk_size, target)
    hits_n = _run_blocks(cfg.n_trials, rows, cfg.chunk_size, noise)
    return ShipTrialEstimate(_estimate(hits_t, cfg.n_trials), _estimate(hits_n, cfg.n_trials))


def target_window_pd_exact(counts: WindowCounts, p_d: float, p_fa: float) -> float:
    """Exact detection rate of the simulated target window, noise pixels included."""
    k = np.arange(counts.n_ps_w + 1)
    ship = stats.binom.pmf(k, counts.n_ps_w, p_d)
    # P(noise survivors >= m - k); sf(x) = P(N > x)
    noise_tail = stats.binom.sf(counts.m - k - 1, counts.n_pw - counts.n_ps_w, p_fa)
    return float(np.dot(ship, noise_tail))
