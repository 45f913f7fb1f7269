"""Exclusivity graphs: construction, complement, vertex transitivity, alpha."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .scenario import Event, exclusive

MAX_TRANSITIVITY_VERTICES = 4096
MAX_EXACT_ALPHA_VERTICES = 512


@dataclass(frozen=True, eq=False)
class ExclusivityGraph:
    vertices: tuple[str, ...]
    adjacency: np.ndarray
    events: tuple[Event, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        m = len(self.vertices)
        if adj.shape != (m, m):
            raise ValueError(f"adjacency shape {adj.shape} does not match {m} vertices")
        if adj.diagonal().any():
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ExclusivityGraph) and self.vertices == other.vertices
                and np.array_equal(self.adjacency, other.adjacency))

    __hash__ = None

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def edges(self) -> list[tuple[int, int]]:
        iu, ju = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    def to_json(self, **extra) -> dict:
        out = {"vertices": list(self.vertices), "edges": [list(e) for e in self.edges()]}
        out.update(extra)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ExclusivityGraph":
        vertices = [str(v) for v in data["vertices"]]
        adj = np.zeros((len(vertices), len(vertices)), dtype=bool)
        index = {v: k for k, v in enumerate(vertices)}
        for u, v in data["edges"]:
            u = index[u] if isinstance(u, str) else int(u)
            v = index[v] if isinstance(v, str) else int(v)
            adj[u, v] = adj[v, u] = True
        return cls(tuple(vertices), adj)

    def to_dot(self, name: str = "G") -> str:
        lines = [f"graph {name} {{"]
        for k, v in enumerate(self.vertices):
            lines.append(f'  {k} [label="({v})"];')
        for u, v in self.edges():
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_graph(events: Iterable[Event]) -> ExclusivityGraph:
    """Exclusivity graph of ``events``; vertices sorted by token."""
    events = list(events)
    if len(set(events)) != len(events):
        raise ValueError("duplicate events")
    if len({e.scenario for e in events}) > 1:
        raise ValueError("events span several scenarios")
    events.sort(key=lambda e: e.token())
    m = len(events)
    adj = np.zeros((m, m), dtype=bool)
    for a in range(m):
        for b in range(a + 1, m):
            if exclusive(events[a], events[b]):
                adj[a, b] = adj[b, a] = True
    return ExclusivityGraph(tuple(e.token() for e in events), adj, tuple(events))


def from_adjacency(adj, labels: Sequence[str] | None = None) -> ExclusivityGraph:
    adj = np.asarray(adj, dtype=bool)
    labels = tuple(labels) if labels is not None else tuple(str(k) for k in range(len(adj)))
    return ExclusivityGraph(labels, adj)


def cycle_graph(m: int) -> ExclusivityGraph:
    adj = np.zeros((m, m), dtype=bool)
    for k in range(m):
        adj[k, (k + 1) % m] = adj[(k + 1) % m, k] = True
    return from_adjacency(adj)


def path_graph(m: int) -> ExclusivityGraph:
    adj = np.zeros((m, m), dtype=bool)
    for k in range(m - 1):
        adj[k, k + 1] = adj[k + 1, k] = True
    return from_adjacency(adj)


def complete_graph(m: int) -> ExclusivityGraph:
    return from_adjacency(~np.eye(m, dtype=bool))


def empty_graph(m: int) -> ExclusivityGraph:
    return from_adjacency(np.zeros((m, m), dtype=bool))


def complement(g: ExclusivityGraph) -> ExclusivityGraph:
    adj = ~g.adjacency
    np.fill_diagonal(adj, False)
    return ExclusivityGraph(g.vertices, adj, g.events)


# -- automorphisms ------------------------------------------------------------

def _joint_refine(adj: np.ndarray, left: np.ndarray, right: np.ndarray):
    """Refine two colourings in lockstep with shared, label-free colour names.

    Returns the refined pair, or None as soon as the two sides disagree on the
    number of vertices carrying some colour (no colour-preserving isomorphism).
    """
    while True:
        k = int(max(left.max(), right.max())) + 1
        sig_l = [(int(left[v]),) + tuple(np.bincount(left[adj[v]], minlength=k))
                 for v in range(len(left))]
        sig_r = [(int(right[v]),) + tuple(np.bincount(right[adj[v]], minlength=k))
                 for v in range(len(right))]
        names = {s: c for c, s in enumerate(sorted(set(sig_l) | set(sig_r)))}
        new_l = np.array([names[s] for s in sig_l])
        new_r = np.array([names[s] for s in sig_r])
        if not np.array_equal(np.bincount(new_l, minlength=len(names)),
                              np.bincount(new_r, minlength=len(names))):
            return None
        if len(names) == len(set(left.tolist()) | set(right.tolist())):
            return new_l, new_r
        left, right = new_l, new_r


def _find_isomorphism(adj: np.ndarray, left: np.ndarray, right: np.ndarray):
    refined = _joint_refine(adj, left, right)
    if refined is None:
        return None
    left, right = refined
    counts = np.bincount(left)
    if counts.max() == 1:
        perm = np.empty(len(left), dtype=np.int64)
        perm[np.argsort(left)] = np.argsort(right)
        if np.array_equal(adj[np.ix_(perm, perm)], adj):
            return perm
        return None
    cell = int(np.flatnonzero(counts > 1)[0])
    w = int(np.flatnonzero(left == cell)[0])
    fresh = int(counts.size)
    for z in np.flatnonzero(right == cell):
        nl, nr = left.copy(), right.copy()
        nl[w] = fresh
        nr[z] = fresh
        perm = _find_isomorphism(adj, nl, nr)
        if perm is not None:
            return perm
    return None


def find_automorphism(g: ExclusivityGraph, u: int, v: int) -> np.ndarray | None:
    """An automorphism ``perm`` with ``perm[u] == v`` (vertex k -> perm[k]), or None."""
    adj = g.adjacency
    m = len(g)
    left = np.zeros(m, dtype=np.int64)
    right = np.zeros(m, dtype=np.int64)
    left[u] = 1
    right[v] = 1
    return _find_isomorphism(adj, left, right)


def vertex_orbits(g: ExclusivityGraph) -> list[list[int]]:
    """Orbits of the automorphism group, each sorted, ordered by first vertex."""
    m = len(g)
    if m > MAX_TRANSITIVITY_VERTICES:
        raise ValueError(f"graph has {m} vertices; limit is {MAX_TRANSITIVITY_VERTICES}")
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def absorb(perm):
        for a, b in enumerate(perm):
            ra, rb = find(a), find(int(b))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    tried = set()
    for u in range(m):
        if find(u) != u:
            continue
        for v in range(u + 1, m):
            if find(v) == find(u) or (find(u), find(v)) in tried:
                continue
            perm = find_automorphism(g, u, v)
            if perm is None:
                tried.add((find(u), find(v)))
            else:
                absorb(perm)
    orbits: dict[int, list[int]] = {}
    for k in range(m):
        orbits.setdefault(find(k), []).append(k)
    return sorted(orbits.values())


def is_vertex_transitive(g: ExclusivityGraph) -> bool:
    m = len(g)
    if m > MAX_TRANSITIVITY_VERTICES:
        raise ValueError(f"graph has {m} vertices; limit is {MAX_TRANSITIVITY_VERTICES}")
    if m <= 1:
        return True
    if len(set(g.degrees.tolist())) > 1:
        return False
    return len(vertex_orbits(g)) == 1


# -- independence number ---------------------------------------------------------

@dataclass
class IndependenceResult:
    value: int | None
    lower: int
    upper: int
    witness: list[int]
    exact: bool
    nodes: int = 0


def _greedy_independent(g: ExclusivityGraph) -> list[int]:
    adj = g.adjacency
    chosen, blocked = [], np.zeros(len(g), dtype=bool)
    for v in np.argsort(g.degrees, kind="stable"):
        if not blocked[v]:
            chosen.append(int(v))
            blocked |= adj[v]
            blocked[v] = True
    return sorted(chosen)


def _clique_cover_bound(g: ExclusivityGraph) -> int:
    """Greedy partition of the vertices into cliques of ``g``."""
    adj = g.adjacency
    cliques: list[list[int]] = []
    for v in range(len(g)):
        for c in cliques:
            if adj[v, c].all():
                c.append(v)
                break
        else:
            cliques.append([v])
    return len(cliques)


def independence_number(g: ExclusivityGraph,
                        max_vertices: int = MAX_EXACT_ALPHA_VERTICES) -> IndependenceResult:
    """Exact alpha(G) by branch and bound (maximum clique of the complement).

    Candidates are ordered by decreasing complement degree (index breaks ties)
    and each node is bounded by a greedy colouring of the complement, i.e. a
    clique cover of ``g``. Above ``max_vertices`` only a greedy interval is
    returned.
    """
    m = len(g)
    if m == 0:
        return IndependenceResult(0, 0, 0, [], True)
    if m > max_vertices:
        lo = _greedy_independent(g)
        return IndependenceResult(None, len(lo), _clique_cover_bound(g), lo, False)

    comp = ~g.adjacency
    np.fill_diagonal(comp, False)
    order = sorted(range(m), key=lambda v: (-int(comp[v].sum()), v))
    pos = {v: k for k, v in enumerate(order)}
    # bit k stands for vertex order[k]
    nbr = [0] * m
    for v in range(m):
        mask = 0
        for w in np.flatnonzero(comp[v]):
            mask |= 1 << pos[int(w)]
        nbr[pos[v]] = mask

    best: list[int] = []
    nodes = 0

    def colour_sort(p: int) -> tuple[list[int], list[int]]:
        verts, cols = [], []
        colour = 0
        uncoloured = p
        while uncoloured:
            colour += 1
            q = uncoloured
            while q:
                low = q & -q
                v = low.bit_length() - 1
                q &= ~nbr[v] & ~low
                uncoloured &= ~low
                verts.append(v)
                cols.append(colour)
        return verts, cols

    def expand(current: list[int], p: int) -> None:
        nonlocal best, nodes
        nodes += 1
        verts, cols = colour_sort(p)
        for k in range(len(verts) - 1, -1, -1):
            if len(current) + cols[k] <= len(best):
                return
            v = verts[k]
            current.append(v)
            newp = p & nbr[v]
            if newp:
                expand(current, newp)
            elif len(current) > len(best):
                best = list(current)
            current.pop()
            p &= ~(1 << v)

    expand([], (1 << m) - 1)
    witness = sorted(order[k] for k in best)
    sub = g.adjacency[np.ix_(witness, witness)]
    if sub.any():
        raise AssertionError("branch and bound returned a non-independent set")
    return IndependenceResult(len(witness), len(witness), len(witness), witness, True, nodes)
