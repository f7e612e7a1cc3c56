"""Atomic types, tuple k-WL and set-based k-WL.

Tuples of ``V^k`` are indexed in lexicographic order of their entry
sequences; k-sets in ``enumerate_ksets`` order.  Atomic types are computed by
explicit minimisation over orderings (k! <= 6 for the supported k), no
canonical-labelling shortcuts.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import Sequence

import numpy as np

from . import _backend
from .errors import ConfigurationError, DomainError
from .graph import Graph, KSet, KTuple, check_kset, enumerate_ksets, kset_index
from .refinement import Coloring, Domain, RefinementTrace, canonicalize, run_refinement

VARIANTS = ("tuple", "set-combined", "set-split", "set-local")

AtomicType = tuple


def atomic_type_tuple(g: Graph, s: Sequence[int]) -> AtomicType:
    """Code of a k-tuple: labels, equality pattern and adjacency, all in entry order."""
    s = _check_tuple(g, s)
    k = len(s)
    labels = tuple(g.labels[v] for v in s)
    eq = tuple(int(s[i] == s[j]) for i in range(k) for j in range(i + 1, k))
    adj = tuple(int(g.has_edge(s[i], s[j])) for i in range(k) for j in range(i + 1, k))
    return ("tuple", labels, eq, adj)


def _set_code(labels: Sequence[int], adj: dict[tuple[int, int], int]) -> AtomicType:
    k = len(labels)
    best = None
    for order in permutations(range(k)):
        cand = (
            tuple(labels[i] for i in order),
            tuple(adj[(min(order[a], order[b]), max(order[a], order[b]))] for a, b in combinations(range(k), 2)),
        )
        if best is None or cand < best:
            best = cand
    return ("set",) + best


def atomic_type_set(g: Graph, s: Sequence[int]) -> AtomicType:
    """Isomorphism type of the labeled induced subgraph ``G[s]``.

    The code is the lexicographic minimum over all orderings of ``s`` of
    (label sequence, adjacency bits), so two k-sets share a code exactly when
    their induced labeled subgraphs are isomorphic.
    """
    s = check_kset(g, s, min_size=1)
    labels = [g.labels[v] for v in s]
    adj = {(i, j): int(g.has_edge(s[i], s[j])) for i, j in combinations(range(len(s)), 2)}
    return _set_code(labels, adj)


@lru_cache(maxsize=None)
def atomic_type_vocabulary(k: int, num_labels: int) -> tuple[AtomicType, ...]:
    """Every k-set atomic type possible with labels ``0..num_labels-1``, sorted."""
    pairs = list(combinations(range(k), 2))
    codes = set()
    for labels in product(range(num_labels), repeat=k):
        for bits in product((0, 1), repeat=len(pairs)):
            codes.add(_set_code(labels, dict(zip(pairs, bits))))
    return tuple(sorted(codes))


def _check_tuple(g: Graph, s: Sequence[int]) -> KTuple:
    s = tuple(int(x) for x in s)
    if not s or any(not 0 <= v < g.n for v in s):
        raise DomainError(f"tuple {s!r} is not a tuple of nodes of a {g.n}-node graph")
    return s


def j_neighborhood(s: Sequence[int], j: int, n: int) -> list[KTuple]:
    """Tuples obtained by replacing entry ``j`` (1-based) of ``s`` by every node."""
    s = tuple(s)
    if not 1 <= j <= len(s):
        raise DomainError(f"j={j} outside 1..{len(s)}")
    return [s[: j - 1] + (r,) + s[j:] for r in range(n)]


def set_neighborhood(g: Graph, s: Sequence[int]) -> tuple[list[KSet], list[KSet]]:
    """Local and global neighbours of a k-set (both ascending).

    ``t`` neighbours ``s`` when they share ``k-1`` members; it is local when the
    swapped-out node and the swapped-in node are adjacent.
    """
    s = check_kset(g, s)
    members = set(s)
    local, glob = [], []
    for v in s:
        rest = members - {v}
        for w in range(g.n):
            if w in members:
                continue
            t = tuple(sorted(rest | {w}))
            (local if g.has_edge(v, w) else glob).append(t)
    return sorted(local), sorted(glob)


# ---------------------------------------------------------------------------
# Neighbourhood structures as CSR arrays.


def _csr_from_lists(lists: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    indptr = np.zeros(len(lists) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(x) for x in lists])
    indices = np.fromiter((i for x in lists for i in x), dtype=np.int64, count=int(indptr[-1]))
    return indptr, indices


@lru_cache(maxsize=256)
def set_neighborhood_csr(g: Graph, k: int) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """``(local_csr, global_csr)`` over ``enumerate_ksets(g, k)``, rows sorted."""
    sets = enumerate_ksets(g, k)
    index = kset_index(g.n, k)
    local, glob = [], []
    for s in sets:
        members = set(s)
        lo, gl = [], []
        for v in s:
            rest = members - {v}
            for w in range(g.n):
                if w in members:
                    continue
                j = index[tuple(sorted(rest | {w}))]
                (lo if g.has_edge(v, w) else gl).append(j)
        local.append(sorted(lo))
        glob.append(sorted(gl))
    return _csr_from_lists(local), _csr_from_lists(glob)


def _merge_csr(a, b):
    lists = []
    for i in range(len(a[0]) - 1):
        lists.append(sorted(a[1][a[0][i]:a[0][i + 1]].tolist() + b[1][b[0][i]:b[0][i + 1]].tolist()))
    return _csr_from_lists(lists)


@lru_cache(maxsize=256)
def tuple_neighborhood_csrs(n: int, k: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """One CSR per position ``j``: row ``i`` lists the ``n`` tuples of ``N_j``."""
    size = n**k
    idx = np.arange(size, dtype=np.int64)
    out = []
    for j in range(k):
        w = n ** (k - 1 - j)
        digit = (idx // w) % n
        base = idx - digit * w
        indices = (base[:, None] + np.arange(n, dtype=np.int64)[None, :] * w).reshape(-1)
        indptr = np.arange(0, size * n + 1, n, dtype=np.int64)
        out.append((indptr, indices))
    return tuple(out)


def enumerate_tuples(n: int, k: int) -> list[KTuple]:
    return list(product(range(n), repeat=k))


def kwl_domain(g: Graph, k: int, variant: str) -> Domain:
    if variant == "tuple":
        tokens = [atomic_type_tuple(g, s) for s in enumerate_tuples(g.n, k)]
        return Domain(tokens, list(tuple_neighborhood_csrs(g.n, k)))
    if variant not in VARIANTS:
        raise ConfigurationError(f"unknown k-WL variant {variant!r}")
    tokens = [atomic_type_set(g, s) for s in enumerate_ksets(g, k)]
    local, glob = set_neighborhood_csr(g, k)
    if variant == "set-split":
        csrs = [local, glob]
    elif variant == "set-local":
        csrs = [local]
    else:
        csrs = [_merge_csr(local, glob)]
    return Domain(tokens, csrs)


# ---------------------------------------------------------------------------
# k-colorings and single steps.


@dataclass(frozen=True)
class KColoring:
    """Coloring over ``V^k`` (``kind="tuple"``) or ``[V]^k`` (``kind="set"``)."""

    coloring: Coloring
    kind: str
    k: int

    @property
    def colors(self) -> np.ndarray:
        return self.coloring.colors

    @property
    def num_colors(self) -> int:
        return self.coloring.num_colors


def initial_kcoloring(g: Graph, k: int, kind: str) -> KColoring:
    if kind == "tuple":
        return KColoring(canonicalize([atomic_type_tuple(g, s) for s in enumerate_tuples(g.n, k)]), "tuple", k)
    if kind == "set":
        return KColoring(canonicalize([atomic_type_set(g, s) for s in enumerate_ksets(g, k)]), "set", k)
    raise DomainError(f"unknown kind {kind!r}")


def kwl_tuple_step(g: Graph, c: KColoring) -> KColoring:
    """Own colour plus, per position ``j``, the multiset of colours over ``N_j``."""
    if c.kind != "tuple":
        raise DomainError(f"expected a tuple coloring, got kind={c.kind!r}")
    if c.coloring.domain_size != g.n**c.k:
        raise DomainError("coloring does not cover V^k")
    csrs = tuple_neighborhood_csrs(g.n, c.k)
    return KColoring(Coloring(_backend.refine_ids(c.colors, c.colors, csrs, {})), "tuple", c.k)


def kwl_set_step(g: Graph, c: KColoring, mode: str = "split") -> KColoring:
    """Set-based step; ``mode`` is ``"combined"``, ``"split"`` or ``"local"``."""
    if c.kind != "set":
        raise DomainError(f"expected a set coloring, got kind={c.kind!r}")
    variant = {"combined": "set-combined", "split": "set-split", "local": "set-local"}.get(mode)
    if variant is None:
        raise DomainError(f"unknown mode {mode!r}")
    dom = kwl_domain(g, c.k, variant)
    if c.coloring.domain_size != dom.size:
        raise DomainError("coloring does not cover the k-sets")
    return KColoring(Coloring(_backend.refine_ids(c.colors, c.colors, dom.csrs, {})), "set", c.k)


def kwl_run(
    g: Graph,
    k: int,
    variant: str = "set-split",
    max_iters: int | None = None,
    max_k: int = 3,
) -> RefinementTrace:
    """Iterate a k-WL variant from atomic types until the colour count is stable.

    ``max_iters`` defaults to the domain size, which bounds the lattice height.
    """
    if variant not in VARIANTS:
        raise ConfigurationError(f"unknown k-WL variant {variant!r}")
    if not 2 <= k <= min(g.n, max_k):
        raise ConfigurationError(f"k={k} outside supported range 2..min(n={g.n}, {max_k})")
    dom = kwl_domain(g, k, variant)
    init = canonicalize(dom.initial_tokens)
    if max_iters is None:
        max_iters = dom.size
    return run_refinement(init, dom.csrs, max_iters)
