"""Lognormal fits and probability thresholds.

Given a normal model of ``ln p`` with mean ``xi`` and variance ``phi2``, the
mass carried by states at log-probability ``x`` is again normal in ``x``,
centered at ``xi + phi2``.  :func:`mass_threshold` finds the probability
``t`` below which states jointly carry a fraction ``f`` of the mass, and the
fraction ``l`` of states that lie below ``t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .moments import NormalModel, contribution_cdf, contribution_log
from .network import DegenerateDistributionError
from .normal import log_norm_cdf, norm_cdf, norm_ppf, norm_ppf_upper, norm_sf


@dataclass(frozen=True)
class ThresholdResult:
    f: float
    ln_t: float
    t: float
    l: float
    l_untruncated: float
    truncated: bool
    iterations: int
    residual: float

    def to_dict(self) -> dict:
        return {
            "f": self.f,
            "ln_t": self.ln_t,
            "log10_t": self.ln_t / math.log(10.0),
            "t": self.t,
            "l": self.l,
            "l_untruncated": self.l_untruncated,
            "truncated": self.truncated,
            "solver": {"iterations": self.iterations, "residual": self.residual},
        }


@dataclass(frozen=True)
class RankEstimate:
    epsilon: float
    state_count: int
    estimate: float
    threshold: ThresholdResult

    @property
    def states(self) -> int | None:
        if not math.isfinite(self.estimate):
            return None
        return int(math.ceil(self.estimate - 1e-9))

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "state_count": self.state_count,
            "estimate": self.estimate if math.isfinite(self.estimate) else "inf",
            "states": self.states,
            "threshold": self.threshold.to_dict(),
        }


def fit_normal(lnp_values: Sequence[float] | np.ndarray, weights=None) -> NormalModel:
    """Moment fit: weighted mean and (population) variance of ``ln p``.

    Non-finite values (zero-probability states) are dropped.  With uniform
    weights over all states this estimates the state density; with weights
    ``p`` it estimates the mass-contribution curve instead.
    """
    x = np.asarray(lnp_values, dtype=float).ravel()
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float).ravel()
    if w.shape != x.shape:
        raise ValueError("weights and values differ in length")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    keep = np.isfinite(x)
    x, w = x[keep], w[keep]
    if x.size < 2:
        raise ValueError("need at least 2 finite log-probabilities")
    total = math.fsum(w.tolist())
    if not total > 0:
        raise ValueError("weights are all zero")
    if np.all(x == x[0]):
        return NormalModel(float(x[0]), 0.0, True)
    xi = math.fsum((w * x).tolist()) / total
    d = x - xi
    phi2 = math.fsum((w * d * d).tolist()) / total
    return NormalModel(xi, phi2, True)


def fit_mass_weighted(lnp_values) -> NormalModel:
    """Fit of the mass-contribution curve (weights ``p``), not of the state density."""
    x = np.asarray(lnp_values, dtype=float)
    return fit_normal(x, np.exp(x))


def _require(nm: NormalModel) -> None:
    if not nm.phi2 > 0:
        raise DegenerateDistributionError("threshold undefined for a zero-variance model")


def mass_threshold(nm: NormalModel, f: float, *, truncated: bool | None = None) -> ThresholdResult:
    """Probability ``t`` such that states below ``t`` carry mass fraction ``f``."""
    if not 0.0 < f < 1.0:
        raise ValueError(f"mass fraction must lie in (0, 1), got {f!r}")
    _require(nm)
    truncated = nm.truncated_at_zero if truncated is None else truncated
    model = NormalModel(nm.xi, nm.phi2, truncated)
    center, sd = model.contribution_mean, model.phi

    if truncated:
        b = -center / sd
        target = f * math.exp(log_norm_cdf(b))
        if target <= 0.5:
            z = norm_ppf(target)
        else:
            z = norm_ppf_upper(norm_sf(b) + (1.0 - f) * norm_cdf(b))
    else:
        z = norm_ppf(f)
    ln_t = center + sd * z

    # polish against the CDF itself
    iterations = 0
    for _ in range(4):
        g = contribution_cdf(model, ln_t) - f
        if g == 0.0:
            break
        dens = float(contribution_log(model, ln_t))
        if not dens > 0:
            break
        step = g / dens
        if abs(step) < 1e-15 * max(1.0, abs(ln_t)):
            break
        ln_t = min(ln_t - step, 0.0)
        iterations += 1
    residual = contribution_cdf(model, ln_t) - f

    zs = (ln_t - nm.xi) / sd
    l_untrunc = norm_cdf(zs)
    l_trunc = math.exp(log_norm_cdf(zs) - log_norm_cdf(-nm.xi / sd))
    return ThresholdResult(
        f=f,
        ln_t=ln_t,
        t=math.exp(ln_t),
        l=l_trunc if truncated else l_untrunc,
        l_untruncated=l_untrunc,
        truncated=truncated,
        iterations=iterations,
        residual=residual,
    )


def epsilon_rank_estimate(nm: NormalModel, epsilon: float, state_count: int) -> RankEstimate:
    """Predicted number of top states needed to cover mass ``1 - epsilon``."""
    if state_count < 1:
        raise ValueError("state count must be positive")
    res = mass_threshold(nm, epsilon)
    if res.l >= 1.0:
        return RankEstimate(epsilon, state_count, 0.0, res)
    try:
        estimate = (1.0 - res.l) * float(state_count)
    except OverflowError:
        # more states than a float can hold
        try:
            estimate = math.exp(math.log1p(-res.l) + math.log(state_count))
        except OverflowError:
            estimate = math.inf
    return RankEstimate(epsilon, state_count, estimate, res)
