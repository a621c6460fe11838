import math

import numpy as np
import pytest
from scipy import stats

from jointprofile import HistogramSpec, sample_summary, theoretical_normal
from jointprofile.enumeration import enumerate_log_probs
from jointprofile.sampling import NoDataError, draw_state, draw_states, ks_statistic


def test_draws_depend_only_on_seed(sprinkler):
    a = draw_states(sprinkler, 200_000, seed=11, threads=1)
    b = draw_states(sprinkler, 200_000, seed=11, threads=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, draw_states(sprinkler, 200_000, seed=12))
    # whole blocks are shared between runs of different length
    assert np.array_equal(draw_states(sprinkler, 1 << 16, seed=11), a[: 1 << 16])


def test_states_are_equiprobable(sprinkler):
    states = draw_states(sprinkler, 120_000, seed=3)
    idx = np.ravel_multi_index(states.T, sprinkler.cardinalities)
    counts = np.bincount(idx, minlength=sprinkler.state_count)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_single_draw_is_in_range(sprinkler):
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = draw_state(sprinkler, rng)
        assert all(0 <= x < k for x, k in zip(a, sprinkler.cardinalities))


def test_binary10_sample_mean_and_variance(binary10):
    nm = theoretical_normal(binary10)
    s = sample_summary(binary10, 100_000, reference=nm, seed=2024)
    assert abs(s.mean - nm.xi) < 3 * math.sqrt(nm.phi2 / s.m)
    assert s.variance == pytest.approx(nm.phi2, rel=0.03)
    assert s.ks_statistic is not None


def test_estimated_mass_is_unbiased(sprinkler):
    s = sample_summary(sprinkler, 100_000, seed=5)
    assert s.masses.sum() == pytest.approx(1.0, rel=0.03)


def test_ks_with_ties_matches_exact_step():
    # one atom at 0 carrying all the mass: distance to a continuous cdf is max(F(0), 1 - F(0))
    cdf = stats.norm.cdf
    assert ks_statistic(np.zeros(10), cdf) == pytest.approx(0.5)
    x = np.random.default_rng(1).normal(size=500)
    assert ks_statistic(x, cdf) == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-14)


def test_ks_empty():
    with pytest.raises(NoDataError):
        ks_statistic(np.array([]), stats.norm.cdf)


def test_zero_variance_network_is_flagged():
    from conftest import binary_chain

    net = binary_chain(4, (0.5, 0.5))
    s = sample_summary(net, 1000, HistogramSpec(), reference=None, seed=1)
    assert s.degenerate and s.variance == 0.0


def test_sample_histogram_tracks_enumeration(binary10):
    logp = enumerate_log_probs(binary10)
    s = sample_summary(binary10, 50_000, seed=9)
    exact = np.bincount(np.round(-logp / math.log(10) / 0.5).astype(int))
    assert s.counts.sum() == 50_000
    assert len(s.counts) <= exact.size
