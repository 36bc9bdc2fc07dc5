import itertools

import numpy as np
import pytest

from localtime.closed_forms import complete_graph, star_graph
from localtime.graph_model import transition_from_adjacency, validate_stochastic


def enumerate_paths(P, va, n):
    """All positive-weight paths of n steps from va as (path, weight) pairs."""
    p = np.asarray(P)
    for tail in itertools.product(range(P.size), repeat=n):
        path = (va,) + tail
        w = 1.0
        for a, b in zip(path, path[1:]):
            w *= p[a, b]
            if w == 0.0:
                break
        if w > 0.0:
            yield path, w


def brute_average(P, va, vb, n, functional):
    """Unnormalized path-sum of functional(local_time_counts); vb=None sums all endpoints."""
    total = 0.0
    for path, w in enumerate_paths(P, va, n):
        if vb is not None and path[-1] != vb:
            continue
        counts = np.bincount(path[1:], minlength=P.size) if n else np.zeros(P.size, dtype=int)
        total += w * functional(counts)
    return total


def random_strong_graph(rng, size, density=0.5):
    a = rng.random((size, size)) * (rng.random((size, size)) < density)
    perm = rng.permutation(size)
    a[perm, np.roll(perm, -1)] += rng.random(size) + 0.05
    return validate_stochastic(a / a.sum(axis=1, keepdims=True))


def two_cycle():
    return validate_stochastic([[0.0, 1.0], [1.0, 0.0]])


def three_cycle():
    return transition_from_adjacency([[0, 1, 1], [1, 0, 1], [1, 1, 0]])


def small_graph_set():
    """Fixed test set of graphs with at most four vertices."""
    rng = np.random.default_rng(20240601)
    graphs = {
        "self-loop": validate_stochastic([[1.0]]),
        "two-cycle": two_cycle(),
        "complete3": complete_graph(3),
        "complete4": complete_graph(4),
        "star2": star_graph(2),
        "star3": star_graph(3),
        "path3": transition_from_adjacency([[0, 1, 0], [1, 0, 1], [0, 1, 0]]),
        "lazy-cycle": validate_stochastic([[0.5, 0.5, 0, 0], [0, 0.25, 0.75, 0], [0, 0, 0.1, 0.9], [1.0, 0, 0, 0]]),
        "absorbing": validate_stochastic([[0.3, 0.7, 0.0], [0.0, 0.4, 0.6], [0.0, 0.0, 1.0]]),
    }
    for i in range(4):
        graphs[f"random{i}"] = random_strong_graph(rng, int(rng.integers(2, 5)))
    return graphs


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance reporting ----------------------------------------------------

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion; reported in the terminal summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        _ACCEPTANCE.append((marker.args[0], report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}")
