import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointprofile import (
    Network,
    StopRule,
    Variable,
    generate,
    parse_gen_spec,
    search_top_states,
    top_k_exact,
    verify_against_enumeration,
)
from jointprofile.enumeration import enumerate_log_probs

RULES = [
    StopRule.max_states(1),
    StopRule.max_states(17),
    StopRule.max_states(10**6),
    StopRule.residual_mass(0.5),
    StopRule.residual_mass(0.05),
    StopRule.residual_mass(1e-6),
    StopRule.probability_floor(0.01),
    StopRule.probability_floor(1e-5),
]


def test_binary10_stop_rules(binary10):
    eps = search_top_states(binary10, StopRule.residual_mass(0.5))
    assert len(eps) == 5 and eps.accounted_mass == pytest.approx(0.50364664, abs=1e-8)
    floor = search_top_states(binary10, StopRule.probability_floor(0.01))
    assert len(floor) == 11
    top56 = search_top_states(binary10, StopRule.max_states(56))
    assert top56.cumulative[[0, 10, 55]] == pytest.approx([0.34867844, 0.73609893, 0.92980917], abs=1e-8)


def test_matches_top_k_exact(sprinkler):
    res = search_top_states(sprinkler, StopRule.max_states(24))
    exact = top_k_exact(sprinkler, 24)
    assert res.states == [a for a, _ in exact]
    assert res.probs.tolist() == [p for _, p in exact]


def test_verified_on_corpus(small_corpus):
    for entry in small_corpus:
        logp = enumerate_log_probs(entry.network)
        for rule in RULES:
            report = verify_against_enumeration(entry.network, rule, node_cap=20_000, logp=logp)
            assert report.ok, (entry.spec, rule, report.failures)


def test_zero_probability_states_never_emitted():
    a = Variable("A", ("x", "y"), (), [0.0, 1.0])
    b = Variable("B", ("x", "y", "z"), ("A",), [[0.2, 0.0], [0.8, 0.5], [0.0, 0.5]])
    net = Network((a, b))
    res = search_top_states(net, StopRule.max_states(10))
    assert len(res) == 2 and res.exhausted
    assert res.accounted_mass == pytest.approx(1.0)
    assert verify_against_enumeration(net, StopRule.max_states(10)).ok


def test_node_cap_truncates_but_prefix_is_exact():
    net = generate(parse_gen_spec("dirichlet_random:n=12,k=3,concentration=5,seed=7"))
    res = search_top_states(net, StopRule.max_states(5000), node_cap=2000)
    assert res.truncated and 0 < len(res) < 5000
    report = verify_against_enumeration(net, StopRule.max_states(5000), node_cap=2000)
    assert report.ok and report.truncated
    logp = enumerate_log_probs(net)
    assert res.residual_bound >= 1.0 - math.fsum(np.sort(np.exp(logp))[::-1][: len(res)]) - 1e-12


def test_stop_rule_validation():
    with pytest.raises(ValueError):
        StopRule.residual_mass(0.0)
    with pytest.raises(ValueError):
        StopRule.max_states(2.5)
    with pytest.raises(ValueError):
        StopRule("bogus", 1)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(0, 2**31 - 1),
    st.integers(1, 8),
    st.integers(2, 3),
    st.integers(0, 2),
    st.sampled_from(RULES),
)
def test_property_search_equals_enumeration(seed, n, k, degree, rule):
    net = generate(parse_gen_spec(f"dirichlet_random:n={n},k={k},max_in_degree={degree},concentration=0.7,seed={seed}"))
    report = verify_against_enumeration(net, rule)
    assert report.ok, report.failures
