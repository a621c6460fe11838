import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from jointprofile import (
    DegenerateDistributionError,
    Network,
    NormalModel,
    Variable,
    binary_log_moments,
    clt_report,
    contribution_log,
    density_log,
    enumerate_log_probs,
    liapounov_ratio,
    skewness,
    theoretical_normal,
    variable_log_moments,
)
from jointprofile.moments import contribution_cdf, density_cdf, log_moments

from conftest import binary_chain


def _mp_binary(q):
    mpmath.mp.dps = 50
    q = mpmath.mpf(q)
    a, b = mpmath.log(q), mpmath.log(1 - q)
    mu = (a + b) / 2
    return mu, ((a - mu) ** 2 + (b - mu) ** 2) / 2, (abs(a - mu) ** 3 + abs(b - mu) ** 3) / 2


@pytest.mark.parametrize("q", [1e-9, 0.001, 0.1, 0.25, 0.5, 0.73, 0.999])
def test_binary_closed_form_matches_high_precision(q):
    m = binary_log_moments(q)
    mu, s2, w3 = _mp_binary(q)
    assert m.mu == pytest.approx(float(mu), rel=1e-13)
    assert m.sigma2 == pytest.approx(float(s2), rel=1e-13, abs=1e-300)
    assert m.omega3 == pytest.approx(float(w3), rel=1e-13, abs=1e-300)


def test_binary_moments_reference_values():
    m = binary_log_moments(0.1)
    assert (round(m.mu, 6), round(m.sigma2, 6)) == (-1.203973, 1.206949)
    # the third moment is |ln 9|^3 / 8, i.e. sigma^3
    assert round(m.omega3, 6) == 1.325969


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-12, 1 - 1e-12))
def test_binary_third_moment_is_sigma_cubed(q):
    m = binary_log_moments(q)
    assert m.omega3 == pytest.approx(m.sigma2**1.5, rel=1e-12, abs=1e-300)


def test_binary_degenerate_inputs():
    for q in (0.0, 1.0, -0.1):
        with pytest.raises(DegenerateDistributionError):
            binary_log_moments(q)


def test_general_moments_equal_closed_form_for_binary():
    v = Variable("X", ("a", "b"), (), [0.2, 0.8])
    net = Network((v,))
    g, c = variable_log_moments(net, 0), binary_log_moments(0.2)
    assert g.mu == pytest.approx(c.mu, rel=1e-15)
    assert g.sigma2 == pytest.approx(c.sigma2, rel=1e-14)


def test_zero_entry_is_named():
    v = Variable("Broken", ("a", "b", "c"), (), [0.5, 0.5, 0.0])
    with pytest.raises(DegenerateDistributionError, match="Broken.*'c'"):
        variable_log_moments(Network((v,)), 0)


def test_uniform_variable_has_exactly_zero_spread():
    m = log_moments(np.log(np.full(3, 1 / 3)))
    assert m.sigma2 == 0.0 and m.omega3 == 0.0


def test_xi_is_exact_mean_with_parents(sprinkler):
    logp = enumerate_log_probs(sprinkler)
    assert theoretical_normal(sprinkler).xi == pytest.approx(math.fsum(logp) / logp.size, abs=1e-12)


@pytest.mark.parametrize("n", [1, 10, 100, 10_000])
def test_liapounov_identical_binary(n):
    rep = liapounov_ratio([binary_log_moments(0.1)] * n)
    assert rep.ratio == pytest.approx(n**-0.5, rel=1e-12)


def test_liapounov_degenerate_and_multivalued(sprinkler):
    with pytest.raises(DegenerateDistributionError, match="zero log-variance"):
        clt_report(binary_chain(3, (0.5, 0.5)))
    rep = clt_report(sprinkler)
    assert rep.multi_valued and "binary" in rep.advisory


def test_densities_integrate_to_one_and_cdfs_agree():
    nm = NormalModel(-4.0, 6.0)
    for pdf, cdf in ((density_log, density_cdf), (contribution_log, contribution_cdf)):
        total, _ = integrate.quad(lambda x: pdf(nm, x), -np.inf, 0.0)
        assert total == pytest.approx(1.0, abs=1e-9)
        part, _ = integrate.quad(lambda x: pdf(nm, x), -np.inf, -3.0)
        assert cdf(nm, -3.0) == pytest.approx(part, abs=1e-9)
    assert density_log(nm, 0.5) == 0.0


def test_contribution_is_density_times_p():
    nm = NormalModel(-9.0, 4.0, truncated_at_zero=False)
    xs = np.linspace(-20, -1, 7)
    ratio = contribution_log(nm, xs) / (density_log(nm, xs) * np.exp(xs))
    assert np.allclose(ratio, ratio[0], rtol=1e-12)


def test_binary10_skewness_and_normal(binary10):
    nm = theoretical_normal(binary10)
    assert nm.xi == pytest.approx(-12.039728043, abs=1e-8)
    assert nm.phi2 == pytest.approx(12.069489608, abs=1e-8)
    assert 6.9e7 <= skewness(nm) <= 7.7e7
    assert skewness(NormalModel(0.0, 800.0)) == math.inf


def test_normal_model_validation():
    with pytest.raises(ValueError):
        NormalModel(0.0, -1.0)
    with pytest.raises(DegenerateDistributionError):
        density_log(NormalModel(-1.0, 0.0), -1.0)
