import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_average, random_strong_graph, small_graph_set, three_cycle, two_cycle
from localtime.closed_forms import LineWindow, complete_graph
from localtime.errors import UnreachableEndpoint
from localtime.graph_model import FREE, Fixed, n_step_probability, validate_stochastic
from localtime.local_time_exact import (
    LocalTimeProfile,
    correlation,
    correlation_fixed,
    correlation_free,
    endpoint_weight,
    local_time_distribution_exact,
    mean_local_time,
    mean_local_time_fixed,
    mean_local_time_free,
    normalize_fixed,
    zero_visit_probability,
)

GRAPHS = small_graph_set()


def test_profile_sum_invariant():
    prof = LocalTimeProfile.from_path([0, 1, 2, 1, 0], 3)
    assert prof.counts == (1, 2, 1)
    with pytest.raises(ValueError):
        LocalTimeProfile(3, (1, 1))


def test_mean_zero_horizon():
    P = complete_graph(4)
    assert all(mean_local_time_free(P, 0, v, 0) == 0.0 for v in range(4))


def test_complete_graph_mean_matches_rational_value():
    assert mean_local_time_free(complete_graph(4), 0, 1, 5) == pytest.approx(319 / 243, abs=1e-12)


def test_three_cycle_mean_by_enumeration():
    P = three_cycle()
    oracle = brute_average(P, 0, None, 3, lambda c: c[1])
    assert mean_local_time_free(P, 0, 1, 3) == pytest.approx(oracle, abs=1e-12)


def test_fixed_single_step():
    P = complete_graph(3)
    p = np.asarray(P)
    for v1 in range(3):
        for vb in range(3):
            assert mean_local_time_fixed(P, 0, vb, v1, 1) == pytest.approx(p[0, v1] * (v1 == vb))


def test_three_cycle_fixed_mean_by_enumeration():
    P = three_cycle()
    oracle = brute_average(P, 0, 0, 4, lambda c: c[1])
    assert mean_local_time_fixed(P, 0, 0, 1, 4) == pytest.approx(oracle, abs=1e-12)


def test_correlation_small_cases():
    P = complete_graph(3)
    assert correlation_free(P, 0, 1, 2, 0) == 0.0
    assert correlation_fixed(P, 0, 1, 1, 2, 0) == 0.0
    assert correlation_free(P, 0, 1, 1, 1) == pytest.approx(0.5)
    oracle = brute_average(P, 0, None, 4, lambda c: c[1] * c[2])
    assert correlation_free(P, 0, 1, 2, 4) == pytest.approx(oracle, abs=1e-12)


def test_two_cycle_correlation_fixed():
    assert correlation_fixed(two_cycle(), 0, 0, 0, 1, 4) == pytest.approx(4.0)


def test_zero_visit_examples():
    assert zero_visit_probability(two_cycle(), 0, FREE, 1, 1) == 0.0
    P = complete_graph(3)
    oracle = brute_average(P, 0, None, 3, lambda c: float(c[1] == 0))
    assert zero_visit_probability(P, 0, FREE, 1, 3) == pytest.approx(oracle, abs=1e-12)


@pytest.mark.parametrize("m, expected", [(1, 0.5), (2, 0.375)])
def test_line_zero_visit(m, expected):
    win = LineWindow.for_horizon(2 * m)
    P = win.matrix()
    o = win.index(0)
    assert zero_visit_probability(P, o, FREE, o, 2 * m) == pytest.approx(expected, abs=1e-15)


def test_distribution_examples():
    table = local_time_distribution_exact(validate_stochastic([[1.0]]), 0, FREE, 0, 5)
    np.testing.assert_array_equal(table.mass, [0, 0, 0, 0, 0, 1])
    table = local_time_distribution_exact(two_cycle(), 0, FREE, 1, 4)
    np.testing.assert_array_equal(table.mass, [0, 0, 1, 0, 0])
    P = complete_graph(3)
    table = local_time_distribution_exact(P, 0, FREE, 0, 4)
    for ell in range(5):
        oracle = brute_average(P, 0, None, 4, lambda c: float(c[0] == ell))
        assert table.mass[ell] == pytest.approx(oracle, abs=1e-12)


def test_saturation_aggregates_the_tail():
    P = complete_graph(3)
    full = local_time_distribution_exact(P, 0, FREE, 1, 8)
    cut = local_time_distribution_exact(P, 0, FREE, 1, 8, lmax=2)
    assert cut.saturated and not full.saturated
    np.testing.assert_allclose(cut.mass[:2], full.mass[:2], atol=1e-15)
    assert cut.mass[2] == pytest.approx(full.mass[2:].sum(), abs=1e-15)
    with pytest.raises(ValueError):
        cut.moment(1)


def test_unreachable_endpoint():
    P = two_cycle()
    table = local_time_distribution_exact(P, 0, Fixed(1), 0, 2)
    assert table.weight == 0.0
    with pytest.raises(UnreachableEndpoint):
        table.normalized()
    with pytest.raises(UnreachableEndpoint):
        normalize_fixed(1.0, P, 0, 1, 2)


def test_endpoint_weight():
    P = three_cycle()
    assert endpoint_weight(P, 0, FREE, 3) == 1.0
    assert endpoint_weight(P, 0, Fixed(0), 2) == pytest.approx(0.5)


CASES = [(name, va, n) for name in GRAPHS for va in range(GRAPHS[name].size) for n in range(7) if va < 2]


@pytest.mark.parametrize("name, va, n", CASES)
def test_against_path_enumeration(name, va, n):
    P = GRAPHS[name]
    size = P.size
    for vb in [None, *range(size)]:
        endpoint = FREE if vb is None else Fixed(vb)
        for v1 in range(size):
            assert mean_local_time(P, va, endpoint, v1, n) == pytest.approx(
                brute_average(P, va, vb, n, lambda c: c[v1]), abs=1e-12)
            assert zero_visit_probability(P, va, endpoint, v1, n) == pytest.approx(
                brute_average(P, va, vb, n, lambda c: float(c[v1] == 0)), abs=1e-12)
            table = local_time_distribution_exact(P, va, endpoint, v1, n)
            for ell in range(n + 1):
                assert table.mass[ell] == pytest.approx(
                    brute_average(P, va, vb, n, lambda c: float(c[v1] == ell)), abs=1e-12)
            for v2 in range(size):
                assert correlation(P, va, endpoint, v1, v2, n) == pytest.approx(
                    brute_average(P, va, vb, n, lambda c: c[v1] * c[v2]), abs=1e-12)


graph_seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(graph_seeds, st.integers(2, 6), st.integers(0, 40))
def test_total_time_identity(seed, size, n):
    P = random_strong_graph(np.random.default_rng(seed), size)
    total = sum(mean_local_time_free(P, 0, v, n) for v in range(size))
    assert abs(total - n) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(graph_seeds, st.integers(2, 5), st.integers(0, 25), st.data())
def test_endpoint_marginalization(seed, size, n, data):
    P = random_strong_graph(np.random.default_rng(seed), size)
    v1 = data.draw(st.integers(0, size - 1))
    v2 = data.draw(st.integers(0, size - 1))
    ends = range(size)
    assert abs(sum(mean_local_time_fixed(P, 0, vb, v1, n) for vb in ends) - mean_local_time_free(P, 0, v1, n)) <= 1e-10
    assert abs(sum(correlation_fixed(P, 0, vb, v1, v2, n) for vb in ends) - correlation_free(P, 0, v1, v2, n)) <= 1e-10 * max(1, n * n)
    assert abs(sum(zero_visit_probability(P, 0, Fixed(vb), v1, n) for vb in ends) - zero_visit_probability(P, 0, FREE, v1, n)) <= 1e-10
    free = local_time_distribution_exact(P, 0, FREE, v1, n).mass
    fixed = sum(local_time_distribution_exact(P, 0, Fixed(vb), v1, n).mass for vb in ends)
    np.testing.assert_allclose(fixed, free, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(graph_seeds, st.integers(2, 5), st.integers(0, 30), st.data())
def test_distribution_normalization_and_moments(seed, size, n, data):
    P = random_strong_graph(np.random.default_rng(seed), size)
    v = data.draw(st.integers(0, size - 1))
    vb = data.draw(st.integers(0, size - 1))
    for endpoint, weight in ((FREE, 1.0), (Fixed(vb), n_step_probability(P, 0, vb, n))):
        table = local_time_distribution_exact(P, 0, endpoint, v, n)
        assert np.all(table.mass >= 0)
        assert abs(table.mass.sum() - weight) <= 1e-10
        assert abs(table.mass[0] - zero_visit_probability(P, 0, endpoint, v, n)) <= 1e-12
        assert abs(table.moment(1) - mean_local_time(P, 0, endpoint, v, n)) <= 1e-10 * max(1, n)
        assert abs(table.moment(2) - correlation(P, 0, endpoint, v, v, n)) <= 1e-10 * max(1, n * n)


@settings(max_examples=30, deadline=None)
@given(graph_seeds, st.integers(2, 5), st.integers(0, 20), st.data())
def test_correlation_symmetry_and_second_moment(seed, size, n, data):
    P = random_strong_graph(np.random.default_rng(seed), size)
    v1 = data.draw(st.integers(0, size - 1))
    v2 = data.draw(st.integers(0, size - 1))
    assert correlation_free(P, 0, v1, v2, n) == pytest.approx(correlation_free(P, 0, v2, v1, n), abs=1e-10)
    assert correlation_free(P, 0, v1, v1, n) >= mean_local_time_free(P, 0, v1, n) - 1e-12
