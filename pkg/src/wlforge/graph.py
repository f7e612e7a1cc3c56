"""Immutable simple undirected labeled graphs and the combinatorics around them."""
from __future__ import annotations

from functools import cached_property
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

KSet = tuple[int, ...]
KTuple = tuple[int, ...]


class Graph:
    """Simple undirected graph on nodes ``0..n-1`` with integer node labels.

    Edges are stored as sorted pairs ``(u, v)`` with ``u < v``.  Self-loops and
    repeated edges (in either orientation) are rejected, so multigraphs and
    directed inputs cannot be built.
    """

    __slots__ = ("n", "edges", "labels", "__dict__")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = (), labels: Sequence[int] | None = None):
        n = int(n)
        if n < 0:
            raise DomainError(f"node count must be non-negative, got {n}")
        seen: set[tuple[int, int]] = set()
        for e in edges:
            if len(e) != 2:
                raise DomainError(f"edge {tuple(e)!r} is not a pair")
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                raise DomainError(f"self-loop at node {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise DomainError(f"duplicate edge {key}")
            seen.add(key)
        if labels is None:
            labels = (0,) * n
        labels = tuple(int(x) for x in labels)
        if len(labels) != n:
            raise DomainError(f"expected {n} labels, got {len(labels)}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", frozenset(seen))
        object.__setattr__(self, "labels", labels)

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges}, labels={self.labels!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges and self.labels == other.labels

    def __hash__(self) -> int:
        return hash((self.n, self.edges, self.labels))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def sorted_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def _adjacency_lists(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    def neighbors(self, v: int) -> tuple[int, ...]:
        """Neighbours of ``v`` in ascending order."""
        if not 0 <= v < self.n:
            raise DomainError(f"node {v} out of range 0..{self.n - 1}")
        return self._adjacency_lists[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edges or (v, u) in self.edges

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self._adjacency_lists)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` of the adjacency structure, neighbours ascending."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in self._adjacency_lists])
        indices = np.fromiter(
            (w for a in self._adjacency_lists for w in a), dtype=np.int64, count=int(indptr[-1])
        )
        indptr.flags.writeable = False
        indices.flags.writeable = False
        return indptr, indices

    def adjacency_matrix(self, dtype=np.int64) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=dtype)
        for u, v in self.edges:
            a[u, v] = 1
            a[v, u] = 1
        return a

    def induced_subgraph(self, s: Sequence[int]) -> Graph:
        """Subgraph induced by the k-set ``s``; node ``i`` of the result is ``sorted(s)[i]``."""
        s = check_kset(self, s, min_size=1)
        pos = {v: i for i, v in enumerate(s)}
        edges = [(pos[u], pos[v]) for u, v in combinations(s, 2) if self.has_edge(u, v)]
        return Graph(len(s), edges, [self.labels[v] for v in s])

    def permute(self, pi: Sequence[int]) -> Graph:
        """Relabel node ``v`` as ``pi[v]``."""
        pi = tuple(int(x) for x in pi)
        if sorted(pi) != list(range(self.n)):
            raise DomainError(f"{pi!r} is not a permutation of 0..{self.n - 1}")
        labels = [0] * self.n
        for v in range(self.n):
            labels[pi[v]] = self.labels[v]
        return Graph(self.n, [(pi[u], pi[v]) for u, v in self.edges], labels)

    def relabel(self, labels: Sequence[int]) -> Graph:
        return Graph(self.n, self.edges, labels)

    def disjoint_union(self, other: Graph) -> Graph:
        """``self`` followed by ``other`` with its nodes shifted by ``self.n``."""
        off = self.n
        edges = list(self.edges) + [(u + off, v + off) for u, v in other.edges]
        return Graph(self.n + other.n, edges, self.labels + other.labels)


def check_kset(g: Graph, s: Sequence[int], min_size: int = 2) -> KSet:
    s = tuple(int(x) for x in s)
    if len(s) < min_size:
        raise DomainError(f"k-set {s!r} has fewer than {min_size} members")
    if any(b <= a for a, b in zip(s, s[1:])):
        raise DomainError(f"k-set {s!r} is not strictly increasing")
    if s and not (0 <= s[0] and s[-1] < g.n):
        raise DomainError(f"k-set {s!r} has members outside 0..{g.n - 1}")
    return s


def neighbors(g: Graph, v: int) -> tuple[int, ...]:
    return g.neighbors(v)


def induced_subgraph(g: Graph, s: Sequence[int]) -> Graph:
    return g.induced_subgraph(s)


def permute(g: Graph, pi: Sequence[int]) -> Graph:
    return g.permute(pi)


def enumerate_ksets(g: Graph | int, k: int) -> list[KSet]:
    """All k-subsets of the node set in lexicographic order.

    This order fixes the row index of every k-set feature matrix.
    """
    n = g if isinstance(g, int) else g.n
    if not 2 <= k <= n:
        raise DomainError(f"k must satisfy 2 <= k <= n={n}, got {k}")
    return list(combinations(range(n), k))


def kset_index(n: int, k: int) -> dict[KSet, int]:
    return {s: i for i, s in enumerate(combinations(range(n), k))}


def _num_ksets(n: int, k: int) -> int:
    return comb(n, k)


def is_isomorphic_bruteforce(g1: Graph, g2: Graph) -> bool:
    """Exhaustive search for a label- and edge-preserving bijection.

    Cheap invariants (edge count, label histogram, label/degree pairs) are
    compared first; the backtracking search then only tries images with the
    same label and degree.  Meant for small graphs (n <= 10).
    """
    if g1.n != g2.n or g1.num_edges != g2.num_edges:
        return False
    sig1 = sorted(zip(g1.labels, g1.degrees))
    sig2 = sorted(zip(g2.labels, g2.degrees))
    if sig1 != sig2:
        return False
    n = g1.n
    if n == 0:
        return True
    # Map high-degree nodes first; it prunes earlier.
    order = sorted(range(n), key=lambda v: (-g1.degrees[v], v))
    candidates = {
        v: [w for w in range(n) if g2.labels[w] == g1.labels[v] and g2.degrees[w] == g1.degrees[v]]
        for v in range(n)
    }
    phi = [-1] * n
    used = [False] * n

    def extend(i: int) -> bool:
        if i == n:
            return True
        v = order[i]
        for w in candidates[v]:
            if used[w]:
                continue
            ok = True
            for j in range(i):
                u = order[j]
                if g1.has_edge(u, v) != g2.has_edge(phi[u], w):
                    ok = False
                    break
            if not ok:
                continue
            phi[v] = w
            used[w] = True
            if extend(i + 1):
                return True
            used[w] = False
            phi[v] = -1
        return False

    return extend(0)


def product_graph(g: Graph, k: int) -> Graph:
    """The k-set graph: nodes are k-sets, adjacent when they share k-1 members.

    Node labels are atomic-type ids of the induced labeled subgraphs, numbered by
    first occurrence in k-set order.  Node ``i`` is ``enumerate_ksets(g, k)[i]``.
    """
    from .higher_order import atomic_type_set

    sets = enumerate_ksets(g, k)
    index = {s: i for i, s in enumerate(sets)}
    ids: dict[tuple, int] = {}
    labels = []
    for s in sets:
        labels.append(ids.setdefault(atomic_type_set(g, s), len(ids)))
    edges = []
    for i, s in enumerate(sets):
        members = set(s)
        for v in s:
            rest = members - {v}
            for w in range(g.n):
                if w in members:
                    continue
                j = index[tuple(sorted(rest | {w}))]
                if i < j:
                    edges.append((i, j))
    return Graph(len(sets), edges, labels)


def write_edge_list(g: Graph) -> str:
    """Canonical text form: ``n m L`` header, ``v label`` lines, ``u v`` lines (u < v, sorted)."""
    num_labels = max(g.labels, default=0) + 1
    lines = [f"{g.n} {g.num_edges} {num_labels}"]
    lines += [f"{v} {g.labels[v]}" for v in range(g.n)]
    lines += [f"{u} {v}" for u, v in g.sorted_edges]
    return "\n".join(lines) + "\n"


# Standard fixtures used in tests, docs and the CLI.

def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph(n, combinations(range(n), 2))


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def random_graph(n: int, p: float, rng: np.random.Generator, num_labels: int = 1) -> Graph:
    """Erdos-Renyi G(n, p) with uniformly random labels from ``0..num_labels-1``."""
    edges = [(u, v) for u, v in combinations(range(n), 2) if rng.random() < p]
    labels = rng.integers(0, num_labels, size=n).tolist() if num_labels > 1 else None
    return Graph(n, edges, labels)
