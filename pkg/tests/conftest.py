"""Shared fixtures and independent oracles.

The oracles deliberately avoid the package's refinement machinery.  Colours
are signature strings built from the previous round's colours; after each
round every signature is replaced by a short name from a dictionary the caller
may share between graphs, which keeps the strings small and stays injective.
"""
from __future__ import annotations

from collections import Counter
from itertools import combinations, permutations, product
from pathlib import Path

import numpy as np
import pytest

from wlforge.graph import Graph, cycle_graph

DATA = Path(__file__).parent / "data"


def triangle_plus_c4() -> Graph:
    return Graph(7, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (5, 6), (3, 6)])


def two_triangles() -> Graph:
    return Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


def seeded_graphs(count: int, seed: int, n_range=(3, 8), p=(0.3, 0.5), max_labels: int = 2) -> list[Graph]:
    from wlforge.graph import random_graph

    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        out.append(random_graph(n, p[i % len(p)], rng, int(rng.integers(1, max_labels + 1))))
    return out


def partition(colors) -> frozenset:
    """The partition of indices induced by a colour sequence."""
    classes: dict = {}
    for i, c in enumerate(colors):
        classes.setdefault(c, []).append(i)
    return frozenset(frozenset(x) for x in classes.values())


class Namer:
    """Injective renaming of signatures, one table per round."""

    def __init__(self):
        self.tables: dict[int, dict[str, str]] = {}

    def __call__(self, t: int, sigs: list[str]) -> list[str]:
        table = self.tables.setdefault(t, {})
        return [table.setdefault(x, f"c{t}.{len(table)}") for x in sigs]


# --- 1-WL oracle --------------------------------------------------------------


def oracle_wl1(g: Graph, iters: int, init=None, namer: Namer | None = None) -> list[list[str]]:
    namer = namer or Namer()
    adj = [[] for _ in range(g.n)]
    for u, v in g.edges:
        adj[u].append(v)
        adj[v].append(u)
    cur = namer(0, [f"L{x}" for x in (g.labels if init is None else init)])
    out = [cur]
    for t in range(1, iters + 1):
        cur = namer(t, [f"({cur[v]}|{','.join(sorted(cur[w] for w in adj[v]))})" for v in range(g.n)])
        out.append(cur)
    return out


# --- automorphism orbits ------------------------------------------------------


def automorphisms(g: Graph) -> list[tuple[int, ...]]:
    edges = {frozenset(e) for e in g.edges}
    out = []
    for pi in permutations(range(g.n)):
        if any(g.labels[v] != g.labels[pi[v]] for v in range(g.n)):
            continue
        if all(frozenset((pi[u], pi[v])) in edges for u, v in g.edges):
            out.append(pi)
    return out


def orbit_partition(g: Graph, items, act) -> frozenset:
    """Orbits of ``items`` under the automorphism group; ``act(pi, item)`` applies pi."""
    auts = automorphisms(g)
    index = {x: i for i, x in enumerate(items)}
    orbit_of = {}
    for x in items:
        if x in orbit_of:
            continue
        orb = frozenset(index[act(pi, x)] for pi in auts)
        for i in orb:
            orbit_of[items[i]] = orb
    return frozenset(orbit_of.values())


# --- higher-order oracles -----------------------------------------------------


def _iso_code(g: Graph, nodes) -> str:
    k = len(nodes)
    best = None
    for order in permutations(range(k)):
        s = [nodes[i] for i in order]
        code = (tuple(g.labels[v] for v in s), tuple(int(g.has_edge(s[i], s[j])) for i, j in combinations(range(k), 2)))
        best = code if best is None or code < best else best
    return repr(best)


def oracle_set_kwl(g: Graph, k: int, iters: int, mode: str) -> list[list[str]]:
    sets = list(combinations(range(g.n), k))
    idx = {s: i for i, s in enumerate(sets)}
    loc, glo = [], []
    for s in sets:
        lo, gl = [], []
        for v in s:
            for w in range(g.n):
                if w in s:
                    continue
                t = idx[tuple(sorted((set(s) - {v}) | {w}))]
                (lo if g.has_edge(v, w) else gl).append(t)
        loc.append(lo)
        glo.append(gl)
    namer = Namer()
    cur = namer(0, [_iso_code(g, s) for s in sets])
    out = [cur]
    for t in range(1, iters + 1):
        nxt = []
        for i in range(len(sets)):
            ml = ",".join(sorted(cur[j] for j in loc[i]))
            mg = ",".join(sorted(cur[j] for j in glo[i]))
            if mode == "split":
                nxt.append(f"({cur[i]}|{ml}|{mg})")
            elif mode == "local":
                nxt.append(f"({cur[i]}|{ml})")
            else:
                nxt.append(f"({cur[i]}|{','.join(sorted(cur[j] for j in loc[i] + glo[i]))})")
        cur = namer(t, nxt)
        out.append(cur)
    return out


def oracle_tuple_kwl(g: Graph, k: int, iters: int) -> list[list[str]]:
    tuples = list(product(range(g.n), repeat=k))
    idx = {s: i for i, s in enumerate(tuples)}

    def atomic(s):
        return repr(
            (
                tuple(g.labels[v] for v in s),
                tuple(s[i] == s[j] for i, j in combinations(range(k), 2)),
                tuple(g.has_edge(s[i], s[j]) for i, j in combinations(range(k), 2)),
            )
        )

    namer = Namer()
    cur = namer(0, [atomic(s) for s in tuples])
    out = [cur]
    for t in range(1, iters + 1):
        nxt = []
        for s in tuples:
            parts = [cur[idx[s]]]
            for j in range(k):
                parts.append(",".join(sorted(cur[idx[s[:j] + (r,) + s[j + 1 :]]] for r in range(g.n))))
            nxt.append("(" + "|".join(parts) + ")")
        cur = namer(t, nxt)
        out.append(cur)
    return out


def folklore_2wl_distinguishes(g: Graph, h: Graph, iters: int = 12) -> bool:
    """Folklore 2-WL on ordered pairs, run on both graphs under one shared namer."""
    namer = Namer()

    def run(x: Graph):
        pairs = list(product(range(x.n), repeat=2))
        sigs = [repr((x.labels[u], x.labels[v], u == v, x.has_edge(u, v))) for u, v in pairs]
        cur = dict(zip(pairs, namer(0, sigs)))
        hist = [Counter(cur.values())]
        for t in range(1, iters + 1):
            sigs = [
                f"({cur[(u, v)]}|{','.join(sorted(f'<{cur[(w, v)]};{cur[(u, w)]}>' for w in range(x.n)))})"
                for u, v in pairs
            ]
            cur = dict(zip(pairs, namer(t, sigs)))
            hist.append(Counter(cur.values()))
        return hist

    return run(g) != run(h)


@pytest.fixture
def c6_and_2c3():
    return cycle_graph(6), two_triangles()


@pytest.fixture
def shortcoming():
    return triangle_plus_c4()
