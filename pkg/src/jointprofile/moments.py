"""Log-moments of CPT entries and the normal model of log state probability.

Drawing a state uniformly (one outcome per variable, each chosen with equal
probability) makes every CPT cell of a variable equally likely to be the
factor contributed by that variable.  The per-variable log-moments below are
taken over that uniform distribution of cells; summing them gives the mean
and variance of ``ln p`` that the central limit theorem predicts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .network import DegenerateDistributionError, Network
from .normal import log_norm_cdf, log_norm_cdf_array, norm_cdf, norm_cdf_array


@dataclass(frozen=True)
class LogMoments:
    mu: float
    sigma2: float
    omega3: float

    def __post_init__(self) -> None:
        if self.sigma2 < 0 or self.omega3 < 0:
            raise ValueError("sigma2 and omega3 must be nonnegative")


@dataclass(frozen=True)
class NormalModel:
    """Normal law of ``ln p``; support is ``(-inf, 0]`` when truncated."""

    xi: float
    phi2: float
    truncated_at_zero: bool = True

    def __post_init__(self) -> None:
        if not self.phi2 >= 0:
            raise ValueError(f"phi2 must be nonnegative, got {self.phi2!r}")

    @property
    def phi(self) -> float:
        return math.sqrt(self.phi2)

    @property
    def degenerate(self) -> bool:
        return self.phi2 == 0.0

    @property
    def contribution_mean(self) -> float:
        """Center of the mass-contribution curve, shifted up by the variance."""
        return self.xi + self.phi2

    @property
    def contribution_mode(self) -> float:
        return min(self.xi + self.phi2, 0.0)

    def to_dict(self) -> dict:
        return {
            "xi": self.xi,
            "phi2": self.phi2,
            "truncated_at_zero": self.truncated_at_zero,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class LiapounovReport:
    sigma2: tuple[float, ...]
    omega3: tuple[float, ...]
    ratio: float
    # the binary-variable argument does not cover multi-valued variables
    multi_valued: bool = False
    advisory: str = field(default="")

    def to_dict(self) -> dict:
        return {
            "n": len(self.sigma2),
            "sum_sigma2": math.fsum(self.sigma2),
            "sum_omega3": math.fsum(self.omega3),
            "ratio": self.ratio,
            "multi_valued": self.multi_valued,
            "advisory": self.advisory,
            "sigma2": list(self.sigma2),
            "omega3": list(self.omega3),
        }


def binary_log_moments(q: float) -> LogMoments:
    """Closed-form log-moments of a two-outcome distribution ``(q, 1 - q)``."""
    if not 0.0 < q < 1.0:
        raise DegenerateDistributionError(
            f"log-moments undefined for q={q!r}: both outcomes need positive probability"
        )
    r = 1.0 - q
    logit = math.log(q) - math.log(r)
    return LogMoments(
        mu=0.5 * (math.log(q) + math.log(r)),
        sigma2=0.25 * logit * logit,
        omega3=0.125 * abs(logit) ** 3,
    )


def log_moments(values: Sequence[float] | np.ndarray) -> LogMoments:
    """Mean, variance and third absolute central moment of equally likely log values."""
    xs = [float(x) for x in np.ravel(values)]
    if not xs:
        raise ValueError("no values")
    if any(not math.isfinite(x) for x in xs):
        raise DegenerateDistributionError("log values must be finite")
    if all(x == xs[0] for x in xs):
        return LogMoments(xs[0], 0.0, 0.0)
    n = len(xs)
    mu = math.fsum(xs) / n
    dev = [x - mu for x in xs]
    sigma2 = math.fsum(d * d for d in dev) / n
    omega3 = math.fsum(abs(d) ** 3 for d in dev) / n
    return LogMoments(mu, sigma2, omega3)


def variable_log_moments(net: Network, i: int | str) -> LogMoments:
    """Log-moments of a uniformly chosen CPT cell of variable ``i``."""
    var = net[i]
    zeros = np.argwhere(var.cpt == 0.0)
    if zeros.size:
        outcome, cfg = (int(v) for v in zeros[0])
        raise DegenerateDistributionError(
            f"variable {var.name!r}: zero probability at outcome {var.outcomes[outcome]!r}, "
            f"parent configuration {cfg}"
        )
    return log_moments(np.log(var.cpt))


def network_log_moments(net: Network) -> list[LogMoments]:
    return [variable_log_moments(net, i) for i in range(len(net))]


_MULTI_VALUED_NOTE = (
    "network has variables with more than two outcomes; the ratio is reported "
    "but the divergent-variance argument only covers binary variables"
)


def liapounov_ratio(moments: Sequence[LogMoments], *, multi_valued: bool = False) -> LiapounovReport:
    """Liapounov ratio ``sum(omega3) / sum(sigma2) ** 1.5`` at the given finite n."""
    sigma2 = tuple(m.sigma2 for m in moments)
    omega3 = tuple(m.omega3 for m in moments)
    total = math.fsum(sigma2)
    if not total > 0:
        raise DegenerateDistributionError(
            "Liapounov ratio undefined: every variable has zero log-variance "
            "(all distributions symmetric or deterministic)"
        )
    ratio = math.fsum(omega3) / total**1.5
    return LiapounovReport(
        sigma2, omega3, ratio, multi_valued, _MULTI_VALUED_NOTE if multi_valued else ""
    )


def clt_report(net: Network) -> LiapounovReport:
    multi = any(k > 2 for k in net.cardinalities)
    return liapounov_ratio(network_log_moments(net), multi_valued=multi)


def theoretical_normal(net: Network) -> NormalModel:
    moments = network_log_moments(net)
    return NormalModel(
        xi=math.fsum(m.mu for m in moments),
        phi2=math.fsum(m.sigma2 for m in moments),
        truncated_at_zero=True,
    )


# densities over ln p


def _require_spread(nm: NormalModel) -> None:
    if not nm.phi2 > 0:
        raise DegenerateDistributionError("normal model has zero variance (point mass)")


def _log_mass_below_zero(mean: float, sd: float) -> float:
    return log_norm_cdf(-mean / sd)


def _truncated_pdf(mean: float, sd: float, truncated: bool, lnp):
    x = np.asarray(lnp, dtype=float)
    z = (x - mean) / sd
    logpdf = -0.5 * z * z - math.log(sd) - 0.5 * math.log(2 * math.pi)
    if truncated:
        logpdf = logpdf - _log_mass_below_zero(mean, sd)
        logpdf = np.where(x <= 0.0, logpdf, -np.inf)
    out = np.exp(logpdf)
    return float(out) if out.ndim == 0 else out


def density_log(nm: NormalModel, lnp):
    """Density of ``ln p`` for a uniformly drawn state."""
    _require_spread(nm)
    return _truncated_pdf(nm.xi, nm.phi, nm.truncated_at_zero, lnp)


def contribution_log(nm: NormalModel, lnp):
    """Density of the probability mass carried by states at ``ln p``.

    Weighting the state density by ``p`` keeps the normal shape and moves its
    center from ``xi`` to ``xi + phi2``; the result is renormalized over the
    support.
    """
    _require_spread(nm)
    return _truncated_pdf(nm.contribution_mean, nm.phi, nm.truncated_at_zero, lnp)


def _truncated_cdf(mean: float, sd: float, truncated: bool, x):
    if np.ndim(x):
        z = (np.asarray(x, dtype=float) - mean) / sd
        if not truncated:
            return norm_cdf_array(z)
        out = np.exp(log_norm_cdf_array(z) - _log_mass_below_zero(mean, sd))
        return np.where(np.asarray(x) >= 0.0, 1.0, out)
    x = float(x)
    if truncated and x >= 0.0:
        return 1.0
    z = (x - mean) / sd
    if not truncated:
        return norm_cdf(z)
    return math.exp(log_norm_cdf(z) - _log_mass_below_zero(mean, sd))


def density_cdf(nm: NormalModel, lnp):
    """Fraction of states with log-probability at most ``lnp`` (scalar or array)."""
    _require_spread(nm)
    return _truncated_cdf(nm.xi, nm.phi, nm.truncated_at_zero, lnp)


def contribution_cdf(nm: NormalModel, lnp):
    """Fraction of probability mass carried by states with log-probability at most ``lnp``."""
    _require_spread(nm)
    return _truncated_cdf(nm.contribution_mean, nm.phi, nm.truncated_at_zero, lnp)


def skewness(nm: NormalModel) -> float:
    """Skewness of the (untruncated) lognormal distribution of ``p``."""
    _require_spread(nm)
    if nm.phi2 > 700:
        return math.inf
    return (math.exp(nm.phi2) + 2.0) * math.sqrt(math.expm1(nm.phi2))
