"""Monte-Carlo counterpart of enumeration.

States are drawn equiprobably: each variable's outcome is picked uniformly
and independently, which is the same as walking the probability tree from
the root and taking every branch with equal chance.  Every state therefore
has selection probability ``1 / state_count`` regardless of its model
probability.
"""
from __future__ import annotations

import math
import secrets
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .enumeration import HistogramSpec, _bin_numbers
from .moments import NormalModel, density_cdf
from .network import Assignment, Network

BLOCK = 1 << 16


class NoDataError(ValueError):
    pass


def new_seed() -> int:
    return secrets.randbits(63)


def draw_state(net: Network, rng: np.random.Generator) -> Assignment:
    """One equiprobable state; consumes one integer draw per variable."""
    return tuple(int(rng.integers(k)) for k in net.cardinalities)


def _draw_block(net: Network, seq: np.random.SeedSequence, size: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seq))
    out = np.empty((size, len(net)), dtype=np.int64)
    for i, k in enumerate(net.cardinalities):
        out[:, i] = rng.integers(0, k, size=size)
    return out


def draw_states(net: Network, m: int, seed: int, *, threads: int = 1) -> np.ndarray:
    """``m`` equiprobable states as rows of outcome indices.

    Draws are split into fixed blocks with independent child seeds, so the
    result depends only on ``seed`` and ``m``, never on ``threads``.
    """
    sizes = [min(BLOCK, m - lo) for lo in range(0, m, BLOCK)]
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(seqs, sizes))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(lambda job: _draw_block(net, *job), jobs))
    else:
        blocks = [_draw_block(net, *job) for job in jobs]
    if not blocks:
        return np.empty((0, len(net)), dtype=np.int64)
    return np.concatenate(blocks)


@dataclass
class SampleSummary:
    m: int
    seed: int
    zero_draws: int
    mean: float
    variance: float
    bin_lo: np.ndarray
    bin_hi: np.ndarray
    counts: np.ndarray
    # estimated probability mass per bin: state_count / m * sum of sampled p
    masses: np.ndarray
    ks_statistic: float | None
    degenerate: bool

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "seed": self.seed,
            "zero_draws": self.zero_draws,
            "mean_lnp": self.mean,
            "variance_lnp": self.variance,
            "ks_statistic": self.ks_statistic,
            "degenerate": self.degenerate,
            "histogram": {
                "bin_lo_log10": self.bin_lo.tolist(),
                "bin_hi_log10": self.bin_hi.tolist(),
                "count": self.counts.tolist(),
                "mass": self.masses.tolist(),
            },
        }


def ks_statistic(values: np.ndarray, cdf) -> float:
    """Two-sided Kolmogorov-Smirnov distance between the sample and ``cdf``.

    ``cdf`` must accept an array.  Ties are handled exactly: at each distinct
    value both the left and right limits of the empirical CDF are compared.
    """
    values = np.asarray(values, dtype=float)
    m = values.size
    if m == 0:
        raise NoDataError("empty sample")
    uniq, counts = np.unique(values, return_counts=True)
    right = np.cumsum(counts) / m
    left = right - counts / m
    ref = np.asarray(cdf(uniq), dtype=float)
    return float(max(np.max(np.abs(right - ref)), np.max(np.abs(left - ref))))


def log10_histogram(logp: np.ndarray, spec: HistogramSpec, weights: np.ndarray | None = None):
    """Right-closed log10 bins as used by enumeration; returns (lo, hi, counts, sums)."""
    logp = np.asarray(logp, dtype=float)
    w = spec.bin_width
    if weights is None:
        weights = np.ones_like(logp)
    if spec.range is None:
        b = _bin_numbers(logp, 0.0, w)
        if b.size == 0:
            return np.zeros(0), np.zeros(0), np.zeros(0, dtype=np.int64), np.zeros(0)
        b_lo, b_hi = int(b.min()), int(b.max())
        origin = 0.0
    else:
        origin = spec.range[0]
        b = _bin_numbers(logp, origin, w)
        b_lo = 0
        b_hi = max(int(math.ceil((spec.range[1] - origin) / w - 1e-9)), 1) - 1
        keep = (b >= b_lo) & (b <= b_hi)
        b, weights = b[keep], weights[keep]
    idx = b - b_lo
    n_bins = b_hi - b_lo + 1
    counts = np.bincount(idx, minlength=n_bins)
    sums = np.bincount(idx, weights=weights, minlength=n_bins)
    lo = origin + w * np.arange(b_lo, b_hi + 1, dtype=float)
    return lo, lo + w, counts, sums


def sample_summary(
    net: Network,
    m: int,
    spec: HistogramSpec = HistogramSpec(),
    reference: NormalModel | None = None,
    *,
    seed: int | None = None,
    threads: int = 1,
) -> SampleSummary:
    """Draw ``m`` states equiprobably and summarize ``ln p`` over the draws."""
    if m < 2:
        raise ValueError("need at least 2 draws")
    if seed is None:
        seed = new_seed()
    states = draw_states(net, m, seed, threads=threads)
    logp = net.log_probs(states)
    finite = logp[np.isfinite(logp)]
    zero = int(m - finite.size)
    if finite.size == 0:
        raise NoDataError("every draw had probability 0")
    if np.all(finite == finite[0]):
        mean, variance = float(finite[0]), 0.0
    else:
        mean = float(np.mean(finite))
        variance = float(np.var(finite, ddof=1))
    p = np.exp(finite)
    lo, hi, counts, sums = log10_histogram(finite, spec, p)
    # state_count may exceed the float range, so scale in log space
    with np.errstate(divide="ignore", over="ignore"):
        masses = np.exp(np.log(sums) + (math.log(net.state_count) - math.log(m)))

    degenerate = variance == 0.0 or (reference is not None and not reference.phi2 > 0)
    ks = None
    if reference is not None and reference.phi2 > 0:
        ks = ks_statistic(finite, lambda v: density_cdf(reference, v))
    return SampleSummary(m, seed, zero, mean, variance, lo, hi, counts, masses, ks, degenerate)
