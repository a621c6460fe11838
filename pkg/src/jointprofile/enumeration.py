"""Exact enumeration of every state of a network.

States are processed in fixed-size chunks of consecutive state indices.
Each chunk produces its own partial histogram; partials are combined in
chunk order with ``math.fsum`` so the result does not depend on how many
worker threads filled them.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .network import Assignment, Network

DEFAULT_CAP = 2**24
CHUNK = 1 << 16
_LN10 = math.log(10.0)


class CapExceededError(RuntimeError):
    def __init__(self, state_count: int, cap: int):
        self.state_count = state_count
        self.cap = cap
        super().__init__(
            f"network has {state_count} states, enumeration cap is {cap}; "
            f"raise the cap to at least {state_count} to enumerate it"
        )


@dataclass(frozen=True)
class HistogramSpec:
    """Bins over log10 p.  Bins are right-closed: ``(lo, lo + width]``.

    With ``range=None`` the bins are anchored at 0 and span exactly the
    occupied region.  Zero-probability states are never binned.
    """

    bin_width: float = 0.5
    range: tuple[float, float] | None = None
    zero_policy: str = "separate"  # or "error"

    def __post_init__(self) -> None:
        if not self.bin_width > 0:
            raise ValueError("bin width must be positive")
        if self.range is not None and not self.range[0] < self.range[1]:
            raise ValueError("histogram range needs min < max")
        if self.zero_policy not in ("separate", "error"):
            raise ValueError(f"unknown zero policy {self.zero_policy!r}")

    def to_dict(self) -> dict:
        return {
            "bin_width": self.bin_width,
            "range": list(self.range) if self.range else None,
            "zero_policy": self.zero_policy,
        }


class ZeroProbabilityStateError(ValueError):
    pass


@dataclass
class MassProfile:
    state_count: int
    zero_state_count: int
    bin_lo: np.ndarray
    bin_hi: np.ndarray
    counts: np.ndarray
    masses: np.ndarray
    underflow_count: int
    underflow_mass: float
    overflow_count: int
    overflow_mass: float
    total_mass: float
    max_prob: float
    min_positive_prob: float
    spread_orders: float
    coverage_ranks: np.ndarray
    coverage_probs: np.ndarray
    coverage_cumulative: np.ndarray
    # full descending order; kept in memory, not serialized
    sorted_index: np.ndarray = field(repr=False)
    sorted_logp: np.ndarray = field(repr=False)
    cumulative: np.ndarray = field(repr=False)

    @property
    def positive_count(self) -> int:
        return self.state_count - self.zero_state_count

    def to_dict(self) -> dict:
        return {
            "state_count": self.state_count,
            "zero_state_count": self.zero_state_count,
            "total_mass": self.total_mass,
            "max_prob": self.max_prob,
            "min_positive_prob": self.min_positive_prob,
            "spread_orders": self.spread_orders,
            "underflow": {"count": self.underflow_count, "mass": self.underflow_mass},
            "overflow": {"count": self.overflow_count, "mass": self.overflow_mass},
            "histogram": {
                "bin_lo_log10": self.bin_lo.tolist(),
                "bin_hi_log10": self.bin_hi.tolist(),
                "count": self.counts.tolist(),
                "mass": self.masses.tolist(),
            },
            "coverage": {
                "rank": self.coverage_ranks.tolist(),
                "state_prob": self.coverage_probs.tolist(),
                "cumulative_mass": self.coverage_cumulative.tolist(),
            },
        }


def _check_cap(net: Network, cap: int) -> None:
    if net.state_count > cap:
        raise CapExceededError(net.state_count, cap)


def _chunks(n: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + CHUNK, n)) for lo in range(0, n, CHUNK)]


def _run(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def enumerate_log_probs(net: Network, *, cap: int = DEFAULT_CAP, threads: int = 1) -> np.ndarray:
    """``ln p`` of every state, indexed by state index.

    Built one variable at a time: the array for the first ``d`` variables is
    extended by every outcome of variable ``d``.  Each state's factors are
    still added left to right, so values match :func:`state_log_prob` bit for
    bit.
    """
    _check_cap(net, cap)
    cards = net.cardinalities
    acc = np.zeros(1, dtype=np.float64)
    for d, table in enumerate(net.log_cpts):
        size = acc.size
        parents = net.parent_indices[d]
        out = np.empty((size, cards[d]), dtype=np.float64)

        def extend(bounds: tuple[int, int]) -> None:
            lo, hi = bounds
            if parents:
                prefix = np.arange(lo, hi, dtype=np.int64)
                cfg = np.zeros(hi - lo, dtype=np.int64)
                for p in parents:
                    stride = math.prod(cards[p + 1 : d])
                    cfg = cfg * cards[p] + (prefix // stride) % cards[p]
                entries = table[:, cfg].T
            else:
                entries = table[:, 0][None, :]
            np.add(acc[lo:hi, None], entries, out=out[lo:hi])

        _run(extend, _chunks(size), threads)
        acc = out.reshape(-1)
    return acc


def descending_order(logp: np.ndarray) -> np.ndarray:
    """State indices sorted by decreasing ``logp``, ties by increasing index."""
    n = logp.size
    order = np.argsort(-logp)
    ranked = logp[order]
    group = np.zeros(n, dtype=np.int64)
    if n > 1:
        np.cumsum(ranked[1:] != ranked[:-1], out=group[1:])
    key = group * n + order
    key.sort()
    return key % n


def _auto_bins(net: Network, width: float) -> tuple[int, int]:
    """Lowest and highest possible bin number for anchored bins."""
    floor = 0.0
    for v in net.variables:
        positive = v.cpt[v.cpt > 0]
        floor += math.log(float(positive.min())) / _LN10
    low = math.ceil(floor / width) - 2
    return low, -1


_EDGE_SNAP = 1e-10


def _bin_numbers(logp: np.ndarray, origin: float, width: float) -> np.ndarray:
    """Right-closed bin numbers of ``log10 p``; bin ``b`` is ``(origin + b w, origin + (b+1) w]``.

    A value within ``_EDGE_SNAP`` bin widths of an edge counts as lying on it,
    so decimal probabilities such as 0.01 fall in the bin below their edge
    regardless of how the double nearest to them rounds.
    """
    q = (logp / _LN10 - origin) / width
    nearest = np.round(q)
    q = np.where(np.abs(q - nearest) <= _EDGE_SNAP, nearest, q)
    return np.ceil(q).astype(np.int64) - 1


def compensated_cumsum(values: np.ndarray, block: int = 4096) -> np.ndarray:
    """Prefix sums whose error stays near one ulp of the running total."""
    n = values.size
    if n == 0:
        return values.astype(np.float64)
    pad = (-n) % block
    blocks = np.concatenate([values, np.zeros(pad)]).reshape(-1, block)
    local = np.cumsum(blocks, axis=1)
    offsets = np.empty(blocks.shape[0])
    running: list[float] = []
    partial = 0.0
    for j in range(blocks.shape[0]):
        offsets[j] = partial
        running.append(float(blocks[j].sum()))
        partial = math.fsum(running)
    return (local + offsets[:, None]).ravel()[:n]


def _coverage_ranks(n_positive: int) -> np.ndarray:
    ranks = set(range(1, min(n_positive, 100) + 1))
    r = 100.0
    while r < n_positive:
        r *= 1.05
        ranks.add(min(int(math.ceil(r)), n_positive))
    if n_positive:
        ranks.add(n_positive)
    return np.array(sorted(ranks), dtype=np.int64)


def profile_from_log_probs(
    logp: np.ndarray,
    spec: HistogramSpec = HistogramSpec(),
    *,
    bin_bounds: tuple[int, int] | None = None,
    threads: int = 1,
) -> MassProfile:
    """Build a :class:`MassProfile` from the log-probabilities of all states."""
    n = logp.size
    width = spec.bin_width
    zero_mask = np.isneginf(logp)
    zero_count = int(zero_mask.sum())
    if zero_count and spec.zero_policy == "error":
        raise ZeroProbabilityStateError(f"{zero_count} states have probability 0")
    positive = logp[~zero_mask]
    if spec.range is None:
        if bin_bounds is None:
            lowest = float(positive.min()) / _LN10 if positive.size else -width
            bin_bounds = (math.ceil(lowest / width) - 2, -1)
        b_lo, b_hi = bin_bounds
        origin = 0.0
    else:
        lo, hi = spec.range
        origin = lo
        b_lo, b_hi = 0, max(int(math.ceil((hi - lo) / width - 1e-9)), 1) - 1
    n_bins = b_hi - b_lo + 1

    def partial(bounds: tuple[int, int]):
        lo_i, hi_i = bounds
        chunk = logp[lo_i:hi_i]
        chunk = chunk[~np.isneginf(chunk)]
        b = _bin_numbers(chunk, origin, width)
        if spec.range is None:
            b = np.clip(b, b_lo, b_hi)
        p = np.exp(chunk)
        under = b < b_lo
        over = b > b_hi
        inside = ~(under | over)
        idx = b[inside] - b_lo
        return (
            np.bincount(idx, minlength=n_bins),
            np.bincount(idx, weights=p[inside], minlength=n_bins),
            int(under.sum()), float(p[under].sum()),
            int(over.sum()), float(p[over].sum()),
        )

    parts = _run(partial, _chunks(n), threads) if n else []
    counts = np.zeros(n_bins, dtype=np.int64)
    for part in parts:
        counts += part[0]
    if parts:
        stacked = np.stack([part[1] for part in parts])
        masses = np.array([math.fsum(stacked[:, j].tolist()) for j in range(n_bins)])
    else:
        masses = np.zeros(n_bins)
    under_count = sum(part[2] for part in parts)
    under_mass = math.fsum(part[3] for part in parts)
    over_count = sum(part[4] for part in parts)
    over_mass = math.fsum(part[5] for part in parts)

    edges_lo = origin + width * np.arange(b_lo, b_hi + 1, dtype=np.float64)
    edges_hi = edges_lo + width
    if spec.range is None and counts.any():
        occupied = np.flatnonzero(counts)
        keep = slice(occupied[0], occupied[-1] + 1)
        counts, masses, edges_lo, edges_hi = counts[keep], masses[keep], edges_lo[keep], edges_hi[keep]

    order = descending_order(logp)
    sorted_logp = logp[order]
    sorted_p = np.exp(sorted_logp)
    cumulative = compensated_cumsum(sorted_p)
    n_pos = n - zero_count
    ranks = _coverage_ranks(n_pos)
    total = math.fsum(masses.tolist() + [under_mass, over_mass])

    if n_pos:
        max_lp, min_lp = float(sorted_logp[0]), float(sorted_logp[n_pos - 1])
        spread = (max_lp - min_lp) / _LN10
        max_p, min_p = math.exp(max_lp), math.exp(min_lp)
    else:
        spread, max_p, min_p = 0.0, 0.0, 0.0
    return MassProfile(
        state_count=n,
        zero_state_count=zero_count,
        bin_lo=edges_lo,
        bin_hi=edges_hi,
        counts=counts,
        masses=masses,
        underflow_count=under_count,
        underflow_mass=under_mass,
        overflow_count=over_count,
        overflow_mass=over_mass,
        total_mass=total,
        max_prob=max_p,
        min_positive_prob=min_p,
        spread_orders=spread,
        coverage_ranks=ranks,
        coverage_probs=sorted_p[ranks - 1] if n_pos else np.zeros(0),
        coverage_cumulative=cumulative[ranks - 1] if n_pos else np.zeros(0),
        sorted_index=order,
        sorted_logp=sorted_logp,
        cumulative=cumulative,
    )


def enumerate_profile(
    net: Network,
    spec: HistogramSpec = HistogramSpec(),
    *,
    cap: int = DEFAULT_CAP,
    threads: int = 1,
) -> MassProfile:
    """Visit every state once and summarize the distribution of its probability."""
    logp = enumerate_log_probs(net, cap=cap, threads=threads)
    bounds = _auto_bins(net, spec.bin_width) if spec.range is None else None
    return profile_from_log_probs(logp, spec, bin_bounds=bounds, threads=threads)


def top_k_exact(
    net: Network, k: int, *, cap: int = DEFAULT_CAP, logp: np.ndarray | None = None
) -> list[tuple[Assignment, float]]:
    """The ``k`` most probable states, descending, ties by ascending state index."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if logp is None:
        logp = enumerate_log_probs(net, cap=cap)
    n = logp.size
    k = min(k, n)
    if k == 0:
        return []
    neg = -logp
    if k < n:
        kth = np.partition(neg, k - 1)[k - 1]
        candidates = np.flatnonzero(neg <= kth)
    else:
        candidates = np.arange(n)
    picked = candidates[np.argsort(neg[candidates], kind="stable")][:k]
    digits = net.digits(picked)
    probs = np.exp(logp[picked])
    return [(tuple(int(d) for d in row), float(p)) for row, p in zip(digits, probs)]


def coverage_at_mass(profile: MassProfile, f: float) -> int:
    """Smallest number of top states whose cumulative probability reaches ``f``."""
    if not 0.0 < f <= 1.0:
        raise ValueError("mass fraction must lie in (0, 1]")
    n_pos = profile.positive_count
    if n_pos == 0:
        return 0
    cum = profile.cumulative[:n_pos]
    k = int(np.searchsorted(cum, f, side="left")) + 1
    return min(k, n_pos)


# exporters


def _fmt(x: float) -> str:
    return repr(float(x))


def histogram_csv(profile: MassProfile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_lo_log10", "bin_hi_log10", "count", "mass"])
    for lo, hi, c, m in zip(profile.bin_lo, profile.bin_hi, profile.counts, profile.masses):
        w.writerow([_fmt(lo), _fmt(hi), int(c), _fmt(m)])
    return buf.getvalue()


def coverage_csv(profile: MassProfile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "state_prob", "cumulative_mass"])
    for r, p, c in zip(profile.coverage_ranks, profile.coverage_probs, profile.coverage_cumulative):
        w.writerow([int(r), _fmt(p), _fmt(c)])
    return buf.getvalue()


def summary_rows(profile: MassProfile, ranks: Sequence[int] = (1, 11, 49)) -> list[tuple[str, str]]:
    """Headline statistics in the style of a small report table."""
    rows = [
        ("states", str(profile.state_count)),
        ("zero-probability states", str(profile.zero_state_count)),
        ("most likely state", f"{profile.max_prob:.6g}"),
        ("spread (orders of magnitude)", f"{profile.spread_orders:.3f}"),
    ]
    for r in ranks:
        if r <= profile.positive_count:
            rows.append((f"mass of top {r}", f"{profile.cumulative[r - 1]:.6f}"))
    for f in (0.5, 0.9, 0.99):
        rows.append((f"states to cover {f}", str(coverage_at_mass(profile, f))))
    return rows
