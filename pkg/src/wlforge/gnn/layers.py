"""Dense GNN layers over nodes and over k-sets.

Every layer has two evaluation modes.  With ``deterministic=True`` neighbour
rows are summed in lexicographic order of their values and products are
accumulated column by column without BLAS, so equal inputs (as multisets)
give bitwise-equal rows wherever they sit in the matrix.  With
``deterministic=False`` sparse/BLAS products are used; that is the training
default.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .. import _backend
from ..errors import DomainError, UnsupportedConfigurationError
from ..graph import Graph, enumerate_ksets, kset_index
from ..higher_order import atomic_type_set, set_neighborhood_csr, _merge_csr

ACTIVATIONS = ("sigmoid", "relu", "sign", "identity", "tanh")


def activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "sigmoid":
        return expit(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sign":
        return np.where(z > 0, 1.0, -1.0)
    if name == "identity":
        return z
    if name == "tanh":
        return np.tanh(z)
    raise DomainError(f"unknown activation {name!r}")


def activation_grad(name: str, z: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Derivative of the activation at ``z`` (``h`` is its value there)."""
    if name == "sigmoid":
        return h * (1.0 - h)
    if name == "relu":
        return (z > 0).astype(np.float64)
    if name == "identity":
        return np.ones_like(z)
    if name == "tanh":
        return 1.0 - h * h
    if name == "sign":
        raise UnsupportedConfigurationError("sign activation has no usable gradient")
    raise DomainError(f"unknown activation {name!r}")


def det_matmul(X: np.ndarray, W: np.ndarray) -> np.ndarray:
    """``X @ W`` accumulated over the inner index in a fixed order.

    Each output entry depends only on its own input row, never on the row's
    position or the number of rows, which BLAS does not guarantee.
    """
    X = np.asarray(X, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if X.shape[1] != W.shape[0]:
        raise DomainError(f"shape mismatch: {X.shape} @ {W.shape}")
    out = np.zeros((X.shape[0], W.shape[1]), dtype=np.float64)
    for k in range(X.shape[1]):
        out += X[:, k : k + 1] * W[k]
    return out


def lex_rank(F: np.ndarray) -> np.ndarray:
    """Position of every row in the lexicographic order of the rows."""
    if F.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    order = np.lexsort(F.T[::-1]) if F.shape[1] else np.arange(F.shape[0])
    rank = np.empty(F.shape[0], dtype=np.int64)
    rank[order] = np.arange(F.shape[0], dtype=np.int64)
    return rank


def sorted_row_sum(rows: np.ndarray) -> np.ndarray:
    """Sum of a multiset of rows, added in lexicographic order starting from zero."""
    rows = np.asarray(rows, dtype=np.float64)
    out = np.zeros(rows.shape[1], dtype=np.float64)
    for i in np.lexsort(rows.T[::-1]) if len(rows) else []:
        out = out + rows[i]
    return out


class Aggregator:
    """A 0/1 matrix in CSR form: row ``i`` sums the input rows listed for it."""

    def __init__(self, indptr: np.ndarray, indices: np.ndarray, num_cols: int):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.num_rows = len(self.indptr) - 1
        self.num_cols = int(num_cols)
        self._sparse = None

    @property
    def sparse(self) -> sp.csr_matrix:
        if self._sparse is None:
            data = np.ones(len(self.indices), dtype=np.float64)
            self._sparse = sp.csr_matrix((data, self.indices, self.indptr), shape=(self.num_rows, self.num_cols))
        return self._sparse

    def counts(self) -> np.ndarray:
        return np.diff(self.indptr)

    def __call__(self, F: np.ndarray, deterministic: bool = True) -> np.ndarray:
        if F.shape[0] != self.num_cols:
            raise DomainError(f"aggregator expects {self.num_cols} input rows, got {F.shape[0]}")
        if deterministic:
            return _backend.sorted_sum(self.indptr, self.indices, lex_rank(F), F)
        return np.asarray(self.sparse @ F)

    def transpose_apply(self, G: np.ndarray) -> np.ndarray:
        return np.asarray(self.sparse.T @ G)

    @staticmethod
    def block_diag(parts: Sequence["Aggregator"]) -> "Aggregator":
        indptr = [np.zeros(1, dtype=np.int64)]
        indices = []
        row_off = col_off = 0
        for a in parts:
            indptr.append(a.indptr[1:] + row_off)
            indices.append(a.indices + col_off)
            row_off += len(a.indices)
            col_off += a.num_cols
        return Aggregator(np.concatenate(indptr), np.concatenate(indices) if indices else np.zeros(0, np.int64), col_off)


@dataclass
class GnnLayerParams:
    """``act(F W1 + (sum of neighbour rows) W2 + bias)``.

    ``W_global``, when set, weights the global k-set neighbours separately from
    the local ones (``W2``).
    """

    W1: np.ndarray
    W2: np.ndarray
    bias: np.ndarray
    activation: str = "relu"
    W_global: np.ndarray | None = None

    def __post_init__(self):
        self.W1 = np.asarray(self.W1, dtype=np.float64)
        self.W2 = np.asarray(self.W2, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64).reshape(-1)
        if self.W1.shape != self.W2.shape:
            raise DomainError(f"W1 {self.W1.shape} and W2 {self.W2.shape} differ in shape")
        if self.bias.shape[0] != self.W1.shape[1]:
            raise DomainError(f"bias has {self.bias.shape[0]} entries, expected {self.W1.shape[1]}")
        if self.W_global is not None:
            self.W_global = np.asarray(self.W_global, dtype=np.float64)
            if self.W_global.shape != self.W2.shape:
                raise DomainError("W_global must have the shape of W2")
        if self.activation not in ACTIVATIONS:
            raise DomainError(f"unknown activation {self.activation!r}")

    @property
    def in_width(self) -> int:
        return self.W1.shape[0]

    @property
    def out_width(self) -> int:
        return self.W1.shape[1]

    @classmethod
    def random(cls, d: int, e: int, rng: np.random.Generator, activation: str = "relu", scale: float = 1.0):
        return cls(
            rng.normal(0, scale, (d, e)),
            rng.normal(0, scale, (d, e)),
            rng.normal(0, scale, e),
            activation,
        )


def _check_width(F: np.ndarray, p: GnnLayerParams) -> None:
    if F.ndim != 2 or F.shape[1] != p.in_width:
        raise DomainError(f"features have shape {F.shape}, layer expects width {p.in_width}")


def _preactivation(F, S, p: GnnLayerParams, deterministic: bool, S_global=None) -> np.ndarray:
    if deterministic:
        blocks, weights = [F, S], [p.W1, p.W2]
        if S_global is not None:
            blocks.append(S_global)
            weights.append(p.W_global)
        return det_matmul(np.hstack(blocks), np.vstack(weights)) + p.bias
    Z = F @ p.W1 + S @ p.W2 + p.bias
    if S_global is not None:
        Z = Z + S_global @ p.W_global
    return Z


def node_aggregator(g: Graph) -> Aggregator:
    indptr, indices = g.csr
    return Aggregator(indptr, indices, g.n)


def gnn_layer_basic(g: Graph, F: np.ndarray, p: GnnLayerParams, deterministic: bool = True) -> np.ndarray:
    """One 1-GNN layer: own row times ``W1`` plus summed neighbour rows times ``W2``."""
    F = np.asarray(F, dtype=np.float64)
    if F.shape[0] != g.n:
        raise DomainError(f"features have {F.shape[0]} rows, graph has {g.n} nodes")
    _check_width(F, p)
    S = node_aggregator(g)(F, deterministic)
    return activate(p.activation, _preactivation(F, S, p, deterministic))


def basic_merge(p: GnnLayerParams) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """The merge function under which :func:`gnn_layer_general` equals :func:`gnn_layer_basic`."""

    def merge(own: np.ndarray, agg: np.ndarray) -> np.ndarray:
        return activate(p.activation, _preactivation(own[None, :], agg[None, :], p, True))[0]

    return merge


def gnn_layer_general(
    g: Graph,
    F: np.ndarray,
    aggregate: Callable[[np.ndarray], np.ndarray],
    merge: Callable[[np.ndarray, np.ndarray], np.ndarray],
) -> np.ndarray:
    """Row ``v`` = ``merge(F[v], aggregate(neighbour rows of v))``.

    ``aggregate`` receives a ``(deg, d)`` array in ascending neighbour order and
    must not depend on that order.
    """
    F = np.asarray(F, dtype=np.float64)
    if F.shape[0] != g.n:
        raise DomainError(f"features have {F.shape[0]} rows, graph has {g.n} nodes")
    rows = [np.asarray(merge(F[v], aggregate(F[list(g.neighbors(v))])), dtype=np.float64) for v in range(g.n)]
    if not rows:
        return np.zeros((0, 0))
    return np.vstack(rows)


# ---------------------------------------------------------------------------
# k-set structures.


@lru_cache(maxsize=512)
def kset_aggregators(g: Graph, k: int) -> tuple[Aggregator, Aggregator, Aggregator]:
    """``(local, global, full)`` neighbour aggregators over ``enumerate_ksets(g, k)``."""
    local, glob = set_neighborhood_csr(g, k)
    full = _merge_csr(local, glob)
    size = len(local[0]) - 1
    return Aggregator(*local, size), Aggregator(*glob, size), Aggregator(*full, size)


@lru_cache(maxsize=512)
def subset_pooling(g: Graph, k: int) -> Aggregator:
    """Row ``s`` lists the (k-1)-subsets of the k-set ``s`` (nodes when ``k = 2``)."""
    sets = enumerate_ksets(g, k)
    if k == 2:
        lists = [list(s) for s in sets]
        prev = g.n
    else:
        index = kset_index(g.n, k - 1)
        lists = [sorted(index[s[:i] + s[i + 1 :]] for i in range(k)) for s in sets]
        prev = len(index)
    indptr = np.arange(0, k * len(sets) + 1, k, dtype=np.int64)
    indices = np.array([i for x in lists for i in x], dtype=np.int64)
    return Aggregator(indptr, indices, prev)


def kgnn_layer(
    g: Graph,
    k: int,
    F: np.ndarray,
    p: GnnLayerParams,
    scope: str = "full",
    deterministic: bool = True,
) -> np.ndarray:
    """k-GNN layer over k-sets; ``scope="local"`` drops the global neighbours.

    With ``p.W_global`` set (full scope only) local and global sums get
    separate weights.
    """
    F = np.asarray(F, dtype=np.float64)
    local, glob, full = kset_aggregators(g, k)
    if F.shape[0] != full.num_rows:
        raise DomainError(f"features have {F.shape[0]} rows, expected {full.num_rows} k-sets")
    _check_width(F, p)
    if scope == "local":
        S, Sg = local(F, deterministic), None
    elif scope == "full":
        if p.W_global is not None:
            S, Sg = local(F, deterministic), glob(F, deterministic)
        else:
            S, Sg = full(F, deterministic), None
    else:
        raise DomainError(f"unknown scope {scope!r}")
    return activate(p.activation, _preactivation(F, S, p, deterministic, Sg))


def iso_one_hot(g: Graph, k: int, vocabulary: Sequence | None = None) -> np.ndarray:
    """One-hot atomic types of the k-sets; columns follow ``vocabulary`` (default: sorted codes present)."""
    codes = [atomic_type_set(g, s) for s in enumerate_ksets(g, k)]
    vocab = sorted(set(codes)) if vocabulary is None else list(vocabulary)
    col = {c: i for i, c in enumerate(vocab)}
    out = np.zeros((len(codes), len(vocab)), dtype=np.float64)
    for i, c in enumerate(codes):
        if c not in col:
            raise DomainError(f"atomic type {c!r} missing from the vocabulary")
        out[i, col[c]] = 1.0
    return out


def hierarchical_init(
    g: Graph,
    k: int,
    F_prev: np.ndarray,
    W: np.ndarray,
    activation: str = "relu",
    vocabulary: Sequence | None = None,
    deterministic: bool = True,
) -> np.ndarray:
    """``act([one-hot atomic type, sum of F_prev over the (k-1)-subsets] @ W)``.

    For ``k = 2`` the (k-1)-subsets are nodes, so ``F_prev`` has one row per node.
    """
    F_prev = np.asarray(F_prev, dtype=np.float64)
    pool = subset_pooling(g, k)
    if F_prev.shape[0] != pool.num_cols:
        raise DomainError(f"F_prev has {F_prev.shape[0]} rows, expected {pool.num_cols}")
    X = np.hstack([iso_one_hot(g, k, vocabulary), pool(F_prev, deterministic)])
    W = np.asarray(W, dtype=np.float64)
    if X.shape[1] != W.shape[0]:
        raise DomainError(f"concatenated width {X.shape[1]} does not match W {W.shape}")
    Z = det_matmul(X, W) if deterministic else X @ W
    return activate(activation, Z)


def readout(F: np.ndarray, mode: str = "sum") -> np.ndarray:
    F = np.asarray(F, dtype=np.float64)
    if F.ndim != 2 or F.shape[0] == 0:
        raise DomainError("readout of an empty feature matrix")
    if mode == "sum":
        return F.sum(axis=0)
    if mode == "mean":
        return F.mean(axis=0)
    raise DomainError(f"unknown readout {mode!r}")


def one_hot(labels: Sequence[int], width: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) and (labels.min() < 0 or labels.max() >= width):
        raise DomainError(f"labels must lie in 0..{width - 1}")
    out = np.zeros((len(labels), width), dtype=np.float64)
    out[np.arange(len(labels)), labels] = 1.0
    return out
