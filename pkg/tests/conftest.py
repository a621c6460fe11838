import numpy as np
import pytest

from jointprofile import Network, Variable, corpus


def binary_chain(n, p=(0.1, 0.9), name="binary"):
    return Network(tuple(Variable(f"V{i}", ("lo", "hi"), (), np.array(p)) for i in range(n)), name)


@pytest.fixture
def binary10():
    """Ten independent binary variables with entries 0.1 and 0.9."""
    return binary_chain(10)


@pytest.fixture
def sprinkler():
    cloudy = Variable("Cloudy", ("no", "yes"), (), [0.5, 0.5])
    sprinkler = Variable("Sprinkler", ("off", "on"), ("Cloudy",), [[0.5, 0.9], [0.5, 0.1]])
    rain = Variable("Rain", ("no", "yes"), ("Cloudy",), [[0.8, 0.2], [0.2, 0.8]])
    wet = Variable(
        "Wet",
        ("dry", "damp", "soaked"),
        ("Sprinkler", "Rain"),
        [[0.9, 0.1, 0.1, 0.01], [0.08, 0.6, 0.5, 0.09], [0.02, 0.3, 0.4, 0.9]],
    )
    return Network((cloudy, sprinkler, rain, wet), "sprinkler")


@pytest.fixture(scope="session")
def small_corpus():
    """Generated networks of up to about a million states (the acceptance run covers larger ones)."""
    return [e for e in corpus(seed=20240611, count=24) if e.network.state_count <= 1 << 20]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
