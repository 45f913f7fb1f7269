import itertools

import numpy as np
import pytest

from nbodybounds.graph import (ExclusivityGraph, build_graph, complement, complete_graph,
                               cycle_graph, empty_graph, find_automorphism, from_adjacency,
                               independence_number, is_vertex_transitive, path_graph,
                               vertex_orbits)
from nbodybounds.models import local_bound
from nbodybounds.scenario import Event, Scenario
from nbodybounds.sigma import build_sigma


def random_graph(m, p, rng):
    a = np.triu(rng.random((m, m)) < p, 1)
    return from_adjacency(a | a.T)


def brute_alpha(g):
    adj = g.adjacency
    best = 0
    for mask in range(1 << len(g)):
        vs = [v for v in range(len(g)) if mask >> v & 1]
        if len(vs) > best and not adj[np.ix_(vs, vs)].any():
            best = len(vs)
    return best


def brute_transitive(g):
    m = len(g)
    adj = g.adjacency
    images = set()
    for perm in itertools.permutations(range(m)):
        p = list(perm)
        if np.array_equal(adj[np.ix_(p, p)], adj):
            images.add(p[0])
            if len(images) == m:
                return True
    return False


def test_single_event():
    g = build_graph([Event.product(Scenario(2), (0, 0), (0, 0))])
    assert len(g) == 1 and g.edges() == []


def test_one_context_is_k4():
    scen = Scenario(2)
    g = build_graph(Event.product(scen, b, (1, 0)) for b in itertools.product((0, 1), repeat=2))
    assert np.array_equal(g.adjacency, complete_graph(4).adjacency)
    assert complement(g).adjacency.sum() == 0


def test_duplicates_rejected():
    e = Event.product(Scenario(2), (0, 0), (0, 0))
    with pytest.raises(ValueError):
        build_graph([e, e])


def test_vertices_sorted(sigma_graph):
    g = sigma_graph(3)
    assert list(g.vertices) == sorted(g.vertices)


def test_invalid_adjacency():
    with pytest.raises(ValueError):
        from_adjacency(np.eye(3))
    with pytest.raises(ValueError):
        from_adjacency(np.triu(np.ones((3, 3)), 1))


def test_complement_examples():
    assert complement(complete_graph(4)) == empty_graph(4)
    assert complement(empty_graph(5)) == complete_graph(5)


def test_complement_involution(rng):
    for _ in range(20):
        g = random_graph(9, 0.4, rng)
        assert complement(complement(g)) == g


def test_sigma2_regularity(sigma_graph):
    g = sigma_graph(2)
    assert len(g) == 8
    assert set(g.degrees.tolist()) == {3}
    assert set(complement(g).degrees.tolist()) == {4}


def test_sigma2_degree_against_predicate(sigma_graph):
    from nbodybounds.scenario import exclusive
    g = sigma_graph(2)
    for u, a in enumerate(g.events):
        assert g.degrees[u] == sum(exclusive(a, b) for b in g.events)


@pytest.mark.parametrize("g,expected", [
    (cycle_graph(5), True), (path_graph(3), False), (complete_graph(4), True),
    (empty_graph(3), True), (path_graph(4), False), (cycle_graph(6), True),
])
def test_transitivity_small(g, expected):
    assert is_vertex_transitive(g) is expected


def test_transitivity_matches_brute_force(rng):
    for m in (5, 6, 7):
        for _ in range(8):
            g = random_graph(m, 0.5, rng)
            assert is_vertex_transitive(g) == brute_transitive(g)


def test_transitivity_brute_force_sigma2(sigma_graph):
    g = sigma_graph(2)
    assert brute_transitive(g) and is_vertex_transitive(g)


@pytest.mark.parametrize("n", [2, 3])
def test_sigma_graphs_transitive(n, sigma_graph):
    g = sigma_graph(n)
    assert is_vertex_transitive(g)
    assert is_vertex_transitive(complement(g))


def test_automorphism_is_valid(sigma_graph):
    g = sigma_graph(3)
    perm = find_automorphism(g, 0, len(g) - 1)
    assert perm is not None and perm[0] == len(g) - 1
    assert np.array_equal(g.adjacency[np.ix_(perm, perm)], g.adjacency)


def test_orbits_of_path():
    assert sorted(map(sorted, vertex_orbits(path_graph(3)))) == [[0, 2], [1]]


def test_alpha_examples(sigma_graph):
    assert independence_number(cycle_graph(5)).value == 2
    assert independence_number(sigma_graph(2)).value == 3 == brute_alpha(sigma_graph(2))


def test_alpha_matches_brute_force(rng):
    for _ in range(30):
        g = random_graph(8, rng.random(), rng)
        res = independence_number(g)
        assert res.exact and res.value == brute_alpha(g)
        w = res.witness
        assert len(w) == res.value and not g.adjacency[np.ix_(w, w)].any()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_alpha_equals_local_bound(n, sigma_graph):
    res = independence_number(sigma_graph(n))
    assert res.exact
    assert res.value == local_bound(n).sigma == 3 * 2 ** (n - 2)


def test_alpha_fallback_interval(rng):
    g = random_graph(30, 0.3, rng)
    res = independence_number(g, max_vertices=10)
    assert not res.exact and res.value is None
    assert res.lower <= independence_number(g).value <= res.upper


def test_json_and_dot(sigma_graph):
    g = sigma_graph(2)
    doc = g.to_json(alpha=3)
    assert doc["alpha"] == 3 and len(doc["edges"]) == 12
    assert ExclusivityGraph.from_json(doc) == g
    dot = g.to_dot()
    assert dot.startswith("graph G {") and dot.count("--") == 12
