"""Colorings, the refinement order, and 1-WL colour refinement.

Three update rules are provided.  ``wl1_step`` hashes the own colour together
with the multiset of neighbour colours; ``wl1_step_tilde`` drops the own
colour; ``wl1_step_anchored`` replaces it with the node's initial colour.
Hashing is exact: every distinct signature gets a fresh compact id, so no two
different signatures can collide.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import _backend
from .errors import ConfigurationError, DomainError
from .graph import Graph

Csr = tuple[np.ndarray, np.ndarray]


class Coloring:
    """Total assignment of compact colour ids ``0..num_colors-1`` to a domain.

    Ids are always stored in canonical form: the first occurrence of id ``i``
    precedes the first occurrence of id ``i+1``.  Two colorings therefore
    induce the same partition exactly when their id sequences are equal.
    """

    __slots__ = ("colors", "num_colors")

    def __init__(self, colors: Iterable[int]):
        arr = np.asarray(list(colors) if not isinstance(colors, np.ndarray) else colors, dtype=np.int64)
        if arr.ndim != 1:
            raise DomainError("colors must be one-dimensional")
        self.colors = _canonical_ids(arr)
        self.colors.flags.writeable = False
        self.num_colors = int(self.colors.max()) + 1 if len(self.colors) else 0

    @property
    def domain_size(self) -> int:
        return len(self.colors)

    def __len__(self) -> int:
        return len(self.colors)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Coloring):
            return NotImplemented
        return np.array_equal(self.colors, other.colors)

    def __hash__(self) -> int:
        return hash(self.colors.tobytes())

    def __repr__(self) -> str:
        return f"Coloring({self.colors.tolist()})"

    def tolist(self) -> list[int]:
        return self.colors.tolist()

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_colors)]
        for i, c in enumerate(self.colors.tolist()):
            out[c].append(i)
        return out

    def histogram(self) -> Counter:
        return Counter(self.colors.tolist())

    def refines(self, other: Coloring) -> bool:
        return refines(self, other)

    def equivalent(self, other: Coloring) -> bool:
        return equivalent(self, other)


def _canonical_ids(arr: np.ndarray) -> np.ndarray:
    if len(arr) == 0:
        return arr.copy()
    _, first, inverse = np.unique(arr, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first), dtype=np.int64)
    return rank[inverse.reshape(-1)]


def canonicalize(raw: Sequence[Hashable]) -> Coloring:
    """Injectively re-index arbitrary hashable tokens to canonical colour ids."""
    ids: dict[Hashable, int] = {}
    return Coloring([ids.setdefault(tok, len(ids)) for tok in raw])


def _check_same_domain(c: Coloring, d: Coloring) -> None:
    if c.domain_size != d.domain_size:
        raise DomainError(f"domain sizes differ: {c.domain_size} vs {d.domain_size}")


def refines(c: Coloring, d: Coloring) -> bool:
    """``c ⊑ d``: equal colour under ``c`` implies equal colour under ``d``."""
    _check_same_domain(c, d)
    pairs = set(zip(c.colors.tolist(), d.colors.tolist()))
    return len(pairs) == c.num_colors


def equivalent(c: Coloring, d: Coloring) -> bool:
    _check_same_domain(c, d)
    return c == d


def partition_of_rows(F, atol: float | None = None) -> Coloring:
    """Coloring that groups equal rows of a matrix.

    With ``atol=None`` rows are grouped by exact equality (works for float
    arrays and for lists of ``Fraction`` rows).  With a tolerance, rows within
    ``atol`` in the max norm of an earlier group representative join it; this
    is weaker and only meant as a diagnostic.
    """
    if isinstance(F, np.ndarray) and atol is None:
        if F.shape[0] == 0:
            return Coloring([])
        _, inverse = np.unique(np.ascontiguousarray(F) + 0.0, axis=0, return_inverse=True)
        # np.unique orders by value; re-canonicalize by first occurrence
        return Coloring(inverse.reshape(-1))
    if atol is None:
        return canonicalize([tuple(row) for row in F])
    F = np.asarray(F, dtype=np.float64)
    reps: list[np.ndarray] = []
    ids = []
    for row in F:
        for j, r in enumerate(reps):
            if np.max(np.abs(r - row), initial=0.0) <= atol:
                ids.append(j)
                break
        else:
            ids.append(len(reps))
            reps.append(row)
    return Coloring(ids)


def label_coloring(g: Graph) -> Coloring:
    return Coloring(g.labels)


def _check_over(g: Graph, c: Coloring) -> None:
    if c.domain_size != g.n:
        raise DomainError(f"coloring has {c.domain_size} entries but graph has {g.n} nodes")


def wl1_step(g: Graph, c: Coloring) -> Coloring:
    _check_over(g, c)
    return Coloring(_backend.refine_ids(c.colors, c.colors, [g.csr], {}))


def wl1_step_tilde(g: Graph, c: Coloring) -> Coloring:
    _check_over(g, c)
    own = np.zeros(g.n, dtype=np.int64)
    return Coloring(_backend.refine_ids(own, c.colors, [g.csr], {}))


def wl1_step_anchored(g: Graph, c0: Coloring, c: Coloring) -> Coloring:
    _check_over(g, c0)
    _check_over(g, c)
    return Coloring(_backend.refine_ids(c0.colors, c.colors, [g.csr], {}))


@dataclass(frozen=True)
class RefinementTrace:
    """Colorings ``per_iteration[t]`` for ``t = 0, 1, ...``.

    ``converged_at`` is the first ``t`` whose colour count equals that of
    ``t - 1``; ``None`` if the iteration cap was hit first.
    """

    per_iteration: tuple[Coloring, ...]
    converged_at: int | None

    def __len__(self) -> int:
        return len(self.per_iteration)

    def __getitem__(self, t: int) -> Coloring:
        return self.per_iteration[t]

    @property
    def final(self) -> Coloring:
        return self.per_iteration[-1]

    def at(self, t: int) -> Coloring:
        """Coloring at iteration ``t``, extended past convergence by the stable partition."""
        if t < len(self.per_iteration):
            return self.per_iteration[t]
        if self.converged_at is None:
            raise DomainError(f"trace stops at t={len(self.per_iteration) - 1} without converging")
        return self.per_iteration[-1]


def run_refinement(
    init: Coloring,
    csrs: Sequence[Csr],
    max_iters: int,
    own: str = "previous",
) -> RefinementTrace:
    """Iterate a refinement step until the colour count stops changing.

    ``own`` selects the first signature component: the previous colour
    (``"previous"``), the initial colour (``"initial"``) or nothing (``"none"``).
    """
    if own not in ("previous", "initial", "none"):
        raise ConfigurationError(f"unknown own-colour mode {own!r}")
    trace = [init]
    zeros = np.zeros(init.domain_size, dtype=np.int64)
    converged = None
    for t in range(1, max_iters + 1):
        prev = trace[-1]
        own_ids = {"previous": prev.colors, "initial": init.colors, "none": zeros}[own]
        nxt = Coloring(_backend.refine_ids(own_ids, prev.colors, csrs, {}))
        trace.append(nxt)
        if nxt.num_colors == prev.num_colors:
            converged = t
            break
    return RefinementTrace(tuple(trace), converged)


def wl1_run(
    g: Graph,
    c0: Coloring | None = None,
    max_iters: int | None = None,
    rule: str = "standard",
) -> RefinementTrace:
    """1-WL from ``c0`` (default: node labels), capped at ``max_iters`` (default ``n``).

    ``rule`` picks the update: ``"standard"``, ``"tilde"`` or ``"anchored"``.
    """
    if c0 is None:
        c0 = label_coloring(g)
    _check_over(g, c0)
    if max_iters is None:
        max_iters = g.n
    own = {"standard": "previous", "tilde": "none", "anchored": "initial"}.get(rule)
    if own is None:
        raise ConfigurationError(f"unknown 1-WL rule {rule!r}")
    return run_refinement(c0, [g.csr], max_iters, own=own)


# ---------------------------------------------------------------------------
# Shared-dictionary refinement over several domains (graphs) in lockstep.


@dataclass(frozen=True)
class Refiner:
    """Which refinement to run: ``kind="wl1"`` or ``kind="kwl"`` with ``k`` and ``variant``."""

    kind: str = "wl1"
    k: int = 2
    variant: str = "set-split"
    max_k: int = 3

    def __post_init__(self):
        if self.kind not in ("wl1", "kwl"):
            raise ConfigurationError(f"unknown refiner kind {self.kind!r}")
        if self.kind == "kwl":
            from .higher_order import VARIANTS

            if self.variant not in VARIANTS:
                raise ConfigurationError(f"unknown k-WL variant {self.variant!r}")
            if not 2 <= self.k <= self.max_k:
                raise ConfigurationError(f"k={self.k} outside supported range 2..{self.max_k}")

    def as_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "kwl":
            d.update(k=self.k, variant=self.variant)
        return d


@dataclass
class Domain:
    """Initial tokens plus neighbourhood structure of one refinement domain."""

    initial_tokens: list
    csrs: list[Csr]

    @property
    def size(self) -> int:
        return len(self.initial_tokens)


def build_domain(g: Graph, refiner: Refiner) -> Domain:
    if refiner.kind == "wl1":
        return Domain([("label", l) for l in g.labels], [g.csr])
    from .higher_order import kwl_domain

    if refiner.k > g.n:
        raise ConfigurationError(f"k={refiner.k} exceeds node count {g.n}")
    return kwl_domain(g, refiner.k, refiner.variant)


@dataclass
class ColorDictionary:
    """Per-iteration signature tables shared by every graph refined with it.

    Iteration 0 maps initial tokens (labels or atomic types); iteration ``t``
    maps refinement keys built from iteration ``t-1`` ids.
    """

    tables: list[dict] = field(default_factory=lambda: [{}])

    def table(self, t: int) -> dict:
        while len(self.tables) <= t:
            self.tables.append({})
        return self.tables[t]

    def initial_ids(self, tokens: Sequence[Hashable]) -> np.ndarray:
        table = self.table(0)
        return np.fromiter((table.setdefault(tok, len(table)) for tok in tokens), dtype=np.int64, count=len(tokens))


def lockstep(
    domains: Sequence[Domain],
    iters: int,
    dictionary: ColorDictionary | None = None,
    stop_when_stable: bool = False,
) -> list[list[np.ndarray]]:
    """Refine several domains in parallel with shared colour ids.

    Returns ``out[t][i]``: raw shared ids of domain ``i`` at iteration ``t``.
    Within an iteration, ids are assigned in domain order, so the result is
    deterministic.  With ``stop_when_stable`` the run ends once the number of
    colours over all domains stops changing.
    """
    if dictionary is None:
        dictionary = ColorDictionary()
    current = [dictionary.initial_ids(d.initial_tokens) for d in domains]
    out = [current]
    prev_count = _count(current)
    for t in range(1, iters + 1):
        table = dictionary.table(t)
        current = [_backend.refine_ids(ids, ids, d.csrs, table) for ids, d in zip(current, domains)]
        out.append(current)
        count = _count(current)
        if stop_when_stable and count == prev_count:
            break
        prev_count = count
    return out


def _count(ids: Sequence[np.ndarray]) -> int:
    arrs = [a for a in ids if len(a)]
    return len(np.unique(np.concatenate(arrs))) if arrs else 0


@dataclass(frozen=True)
class Verdict:
    distinguished: bool
    iteration: int | None = None

    def __str__(self) -> str:
        if self.distinguished:
            return f"distinguished at iteration {self.iteration}"
        return "not distinguished"


def distinguish(g1: Graph, g2: Graph, refiner: Refiner | None = None, max_iters: int | None = None) -> Verdict:
    """Run the refinement on both graphs with one colour dictionary and compare histograms."""
    refiner = refiner or Refiner()
    d1, d2 = build_domain(g1, refiner), build_domain(g2, refiner)
    if max_iters is None:
        max_iters = d1.size + d2.size
    rounds = lockstep([d1, d2], max_iters, stop_when_stable=True)
    for t, (a, b) in enumerate(rounds):
        if Counter(a.tolist()) != Counter(b.tolist()):
            return Verdict(True, t)
    return Verdict(False, None)
