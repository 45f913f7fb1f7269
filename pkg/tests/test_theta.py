import math

import numpy as np
import pytest

from nbodybounds.graph import (complement, complete_graph, cycle_graph, empty_graph,
                               from_adjacency, independence_number, path_graph)
from nbodybounds.theta import (ThetaNotConverged, lovasz_theta, odd_cycle_theta,
                               product_identity_check)

Q2 = 2 + math.sqrt(2)


def random_graph(m, p, rng):
    a = np.triu(rng.random((m, m)) < p, 1)
    return from_adjacency(a | a.T)


@pytest.mark.parametrize("m", [1, 3, 6])
def test_empty_and_complete(m):
    assert lovasz_theta(empty_graph(m)).value == pytest.approx(m, abs=1e-6)
    assert lovasz_theta(complete_graph(m)).value == pytest.approx(1, abs=1e-6)


def test_c5_is_sqrt5():
    assert abs(lovasz_theta(cycle_graph(5)).value - math.sqrt(5)) <= 1e-6


@pytest.mark.parametrize("m", [5, 7, 9, 11])
def test_odd_cycles(m):
    assert abs(lovasz_theta(cycle_graph(m)).value - odd_cycle_theta(m)) <= 1e-6


def test_even_cycle_and_path():
    assert lovasz_theta(cycle_graph(6)).value == pytest.approx(3, abs=1e-6)
    assert lovasz_theta(path_graph(4)).value == pytest.approx(2, abs=1e-6)


def test_certificate_brackets_value():
    r = lovasz_theta(cycle_graph(7))
    assert r.lower <= r.value <= r.upper
    assert r.upper - r.lower <= 1e-6
    assert r.method == "ipm"


def test_sigma_graphs(sigma_graph):
    assert abs(lovasz_theta(sigma_graph(2)).value - Q2) <= 1e-5
    assert abs(lovasz_theta(sigma_graph(3)).value - 2 * Q2) <= 1e-3


@pytest.mark.parametrize("make", [lambda: cycle_graph(7), lambda: cycle_graph(9)])
def test_ipm_and_admm_agree(make):
    g = make()
    a = lovasz_theta(g, 1e-8, method="ipm").value
    b = lovasz_theta(g, 1e-7, method="admm").value
    assert abs(a - b) <= 1e-5


def test_admm_on_sigma2(sigma_graph):
    r = lovasz_theta(sigma_graph(2), 1e-7, method="admm")
    assert r.method == "admm" and abs(r.value - Q2) <= 1e-5


def test_sandwich_and_monotonicity(rng):
    for _ in range(100):
        g = random_graph(8, 0.4, rng)
        t = lovasz_theta(g, 1e-7).value
        assert independence_number(g).value <= t + 1e-6
        # adding an edge can only shrink theta
        non = np.argwhere(np.triu(~g.adjacency, 1))
        if len(non):
            u, v = non[rng.integers(len(non))]
            a = g.adjacency.copy()
            a[u, v] = a[v, u] = True
            assert lovasz_theta(from_adjacency(a), 1e-7).value <= t + 1e-6


def test_complement_product_bound(rng):
    # theta(G) * theta(complement) >= |V| for every graph
    for _ in range(10):
        g = random_graph(7, 0.5, rng)
        prod = lovasz_theta(g).value * lovasz_theta(complement(g)).value
        assert prod >= len(g) - 1e-6


@pytest.mark.parametrize("n", [2, 3])
def test_product_identity(n, sigma_graph):
    rep = product_identity_check(sigma_graph(n))
    assert rep.ok and abs(rep.ratio - 1) <= 1e-3


def test_identity_needs_transitive_graph():
    with pytest.raises(ValueError):
        product_identity_check(path_graph(3))


def test_input_errors():
    with pytest.raises(ValueError):
        lovasz_theta(empty_graph(0))
    with pytest.raises(ValueError):
        lovasz_theta(cycle_graph(5), tol=1e-12)
    with pytest.raises(ValueError):
        lovasz_theta(empty_graph(300))
    with pytest.raises(ValueError):
        lovasz_theta(cycle_graph(5), method="magic")


def test_not_converged_carries_bounds():
    with pytest.raises(ThetaNotConverged) as info:
        lovasz_theta(cycle_graph(9), method="ipm", max_iter=2)
    assert info.value.result.lower <= info.value.result.upper
