"""Exact GNN weights that reproduce 1-WL, built instance by instance.

Everything here runs in exact rational arithmetic: the strict inequalities
the constructions rely on must not be disturbed by rounding.

The sign path uses layers ``sgn(F W1 + A F W2 - J)`` whose output is
concatenated with the one-hot initial labels.  The ReLU path replaces every
sign layer by two ReLU layers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import exact
from .errors import DomainError
from .exact import Fraction, Matrix
from .graph import Graph
from .refinement import Coloring, partition_of_rows, wl1_run


def _base(n: int) -> int:
    return max(n, 2)


def _witness(b_sorted: list[int]) -> list[Fraction]:
    """``x`` with ``b_i x_j < 1`` for ``i >= j`` and ``> 1`` for ``i < j`` (``b`` strictly decreasing)."""
    s = len(b_sorted)
    x = [Fraction(1, 2 * b_sorted[0]) if b_sorted[0] > 0 else Fraction(1)]
    for j in range(1, s):
        # harmonic midpoint of 1/b_{j-1} and 1/b_j; for b_j = 0 only the lower bound binds
        x.append(Fraction(2, b_sorted[j - 1] + b_sorted[j]))
    return x


def dist2lu(B: Sequence[Sequence[int]], n: int | None = None) -> Matrix:
    """``X`` (t x s) such that ``sgn(B X - J)`` is non-singular.

    ``B`` is s x t with integer entries in ``0..n-1`` and pairwise distinct rows.
    Rows are encoded as base-``n`` numbers ``b = B z``; column ``j`` of ``X`` is
    ``z * x_i`` where row ``i`` of ``B`` is the ``j``-th largest code, so
    ``sgn(B X - J)`` is the triangular +-1 pattern up to a row/column permutation.
    """
    B = [[int(v) for v in row] for row in B]
    s = len(B)
    if s == 0:
        raise DomainError("B has no rows")
    t = len(B[0])
    if n is None:
        n = _base(max((v for row in B for v in row), default=0) + 1)
    for row in B:
        if len(row) != t:
            raise DomainError("B is ragged")
        if any(not 0 <= v <= n - 1 for v in row):
            raise DomainError(f"entries of B must lie in 0..{n - 1}")
    if len(set(map(tuple, B))) != s:
        raise DomainError("rows of B are not pairwise distinct")
    z = [n**i for i in range(t)]
    b = [sum(v * zi for v, zi in zip(row, z)) for row in B]
    order = sorted(range(s), key=lambda i: -b[i])
    x_sorted = _witness([b[i] for i in order])
    x = [Fraction(0)] * s
    for j, i in enumerate(order):
        x[i] = x_sorted[j]
    return [[Fraction(zi) * xj for xj in x] for zi in z]


def sign_pattern(B: Sequence[Sequence], X: Matrix) -> list[list[int]]:
    """``sgn(B X - J)``."""
    C = exact.matmul(exact.to_matrix(B), X)
    return [[exact.sgn(c - 1) for c in row] for row in C]


# ---------------------------------------------------------------------------
# Layers and their exact evaluation.


@dataclass
class ExactLayer:
    """``act(F W1 + A F W2 + bias)``, optionally prefixed by the initial features."""

    W2: Matrix
    bias: list[Fraction]
    activation: str
    W1: Matrix | None = None
    concat_initial: bool = False

    @property
    def width(self) -> int:
        return len(self.bias)

    def to_json(self) -> dict:
        return {
            "activation": self.activation,
            "concat_initial": self.concat_initial,
            "W1": exact.to_json(self.W1) if self.W1 is not None else None,
            "W2": exact.to_json(self.W2),
            "bias": [[int(b.numerator), int(b.denominator)] for b in self.bias],
        }


def _act(name: str, x: Fraction) -> Fraction:
    if name == "sign":
        return Fraction(exact.sgn(x))
    if name == "relu":
        return x if x > 0 else Fraction(0)
    if name == "identity":
        return x
    raise DomainError(f"activation {name!r} not available in exact mode")


def _adj(g: Graph) -> list[tuple[int, ...]]:
    return [g.neighbors(v) for v in range(g.n)]


def preactivation(g: Graph, F: Matrix, layer: ExactLayer) -> Matrix:
    P = exact.matmul(exact.neighbor_sum(_adj(g), F), layer.W2)
    if layer.W1 is not None:
        P = exact.add(P, exact.matmul(F, layer.W1))
    return [[p + b for p, b in zip(row, layer.bias)] for row in P]


def apply_layer(g: Graph, F: Matrix, layer: ExactLayer, initial: Matrix | None = None) -> Matrix:
    out = [[_act(layer.activation, p) for p in row] for row in preactivation(g, F, layer)]
    if layer.concat_initial:
        if initial is None:
            raise DomainError("layer concatenates the initial features but none were given")
        out = exact.hstack(initial, out)
    return out


def run_network(g: Graph, F0: Matrix, layers: Sequence[ExactLayer]) -> list[Matrix]:
    """Forward pass; returns the features after every layer, ``F0`` first."""
    traces = [F0]
    for layer in layers:
        traces.append(apply_layer(g, traces[-1], layer, F0))
    return traces


# ---------------------------------------------------------------------------
# Uncolored step.


def _class_decomposition(F: Matrix) -> Matrix:
    reps, _ = exact.distinct_rows(F)
    reps = [list(r) for r in reps]
    if exact.rank(reps) != len(reps):
        raise DomainError("distinct rows of F are linearly dependent")
    return exact.right_inverse(reps)


def _pad_columns(M: Matrix, width: int) -> Matrix:
    return [row + [Fraction(0)] * (width - len(row)) for row in M]


def simulate_step_uncolored(g: Graph, F: Matrix) -> tuple[Matrix, Matrix]:
    """One sign layer ``sgn(A F W - J)`` whose rows group nodes like the own-colour-free 1-WL step.

    Returns ``(W, F_next)`` with ``W`` of shape ``d x n``; ``F_next`` is the
    layer output (the zero columns of ``W`` give constant -1 columns).
    """
    F = exact.to_matrix(F)
    if len(F) != g.n:
        raise DomainError(f"F has {len(F)} rows, graph has {g.n} nodes")
    M = _class_decomposition(F)
    D = exact.neighbor_sum(_adj(g), exact.matmul(F, M))
    Dreps, _ = exact.distinct_rows(D)
    X = dist2lu([[int(v) for v in r] for r in Dreps], _base(g.n))
    W = _pad_columns(exact.matmul(M, X), g.n)
    layer = ExactLayer(W2=W, bias=[Fraction(-1)] * g.n, activation="sign")
    return W, apply_layer(g, F, layer)


# ---------------------------------------------------------------------------
# Colored graphs.


def one_hot_labels(labels: Sequence[int]) -> Matrix:
    alphabet = sorted(set(labels))
    col = {l: i for i, l in enumerate(alphabet)}
    return [[Fraction(int(col[l] == j)) for j in range(len(alphabet))] for l in labels]


def _anchored_layer(g: Graph, F: Matrix, F0: Matrix) -> ExactLayer:
    """Sign layer whose rows group nodes by (initial label, neighbour classes of ``F``).

    ``F``'s first ``L`` columns must be ``F0``.  The own term ``F W1`` reads the
    one-hot label, the neighbour term ``A F W2`` the class counts; ``dist2lu``
    on the distinct rows of ``[F0 | A F M]`` makes the output independent.
    """
    L = len(F0[0])
    M = _class_decomposition(F)
    D = exact.neighbor_sum(_adj(g), exact.matmul(F, M))
    B = exact.hstack(F0, D)
    Breps, _ = exact.distinct_rows(B)
    X = dist2lu([[int(v) for v in r] for r in Breps], _base(g.n))
    d = len(F[0])
    W1 = _pad_columns(X[:L], g.n) + exact.zeros(d - L, g.n)
    W2 = _pad_columns(exact.matmul(M, X[L:]), g.n)
    return ExactLayer(W2=W2, W1=W1, bias=[Fraction(-1)] * g.n, activation="sign", concat_initial=True)


def _concat_layer(g: Graph, F: Matrix) -> ExactLayer:
    W, _ = simulate_step_uncolored(g, F)
    return ExactLayer(W2=W, bias=[Fraction(-1)] * g.n, activation="sign", concat_initial=True)


@dataclass
class SimulationResult:
    initial: Matrix
    layers: list[ExactLayer]
    traces: list[Matrix]
    construction: str
    deltas: list[Fraction] = field(default_factory=list)

    @property
    def widths(self) -> list[int]:
        return [len(F[0]) for F in self.traces]

    def partitions(self) -> list[Coloring]:
        return [partition_of_rows(F) for F in self.traces]

    def to_json(self) -> dict:
        return {
            "construction": self.construction,
            "initial": exact.to_json(self.initial),
            "layers": [layer.to_json() for layer in self.layers],
            "deltas": [[int(d.numerator), int(d.denominator)] for d in self.deltas],
        }


def simulate_wl_colored(
    g: Graph,
    labels: Sequence[int] | None = None,
    T: int | None = None,
    construction: str = "anchored",
) -> SimulationResult:
    """Sign-activation GNN with ``partition(F^(t)) == 1-WL colouring at t`` for ``t <= T``.

    ``construction="anchored"`` (default) feeds the one-hot label into the own
    term of each layer, so every feature matrix stays row-independent modulo
    equality.  ``construction="concat"`` only concatenates the labels to the
    uncolored step's output; it raises :class:`DomainError` as soon as that
    concatenation produces linearly dependent distinct rows.
    """
    labels = list(g.labels if labels is None else labels)
    if len(labels) != g.n:
        raise DomainError("one label per node required")
    T = g.n if T is None else T
    if not 0 <= T <= max(g.n, 1):
        raise DomainError(f"T must lie in 0..{g.n}")
    F0 = one_hot_labels(labels)
    layers: list[ExactLayer] = []
    traces = [F0]
    for _ in range(T):
        F = traces[-1]
        layer = _anchored_layer(g, F, F0) if construction == "anchored" else _concat_layer(g, F)
        layers.append(layer)
        traces.append(apply_layer(g, F, layer, F0))
    return SimulationResult(F0, layers, traces, construction)


def _shift_matrix(L: int, n: int) -> Matrix:
    """``K`` with ``[F0 | C] K = [F0 | C - J]`` whenever rows of ``F0`` sum to one."""
    K = exact.identity(L + n)
    for i in range(L):
        for j in range(L, L + n):
            K[i][j] = Fraction(-1)
    return K


def relu_simulation(g: Graph, labels: Sequence[int] | None = None, T: int | None = None) -> SimulationResult:
    """ReLU network with 2T layers whose even-layer partitions follow 1-WL.

    Each sign layer ``sgn(C - J)`` becomes ``H = relu(J - C)`` followed by
    ``relu(-(2/delta) H + 2J)``, with ``delta`` the smallest positive entry of
    ``H`` on this instance.  The result equals ``sgn(C - J) + J``; the ``-J``
    is folded into the next layer through the one-hot label block.
    """
    labels = list(g.labels if labels is None else labels)
    T = g.n if T is None else T
    if not 0 <= T <= max(g.n, 1):
        raise DomainError(f"T must lie in 0..{g.n}")
    F0 = one_hot_labels(labels)
    L, n = len(F0[0]), g.n
    S = F0  # sign-path features the weights are derived from
    G = F0  # actual ReLU features
    layers: list[ExactLayer] = []
    deltas: list[Fraction] = []
    traces = [F0]
    for _ in range(T):
        d = len(G[0])
        sign_layer = _anchored_layer(g, S, F0)
        K = exact.identity(d) if d == L else _shift_matrix(L, n)
        KW1 = exact.matmul(K, sign_layer.W1)
        KW2 = exact.matmul(K, sign_layer.W2)
        keep = [[Fraction(int(i == j)) for j in range(L)] for i in range(d)]
        layer_a = ExactLayer(
            W1=exact.hstack(keep, exact.scale(KW1, -1)),
            W2=exact.hstack(exact.zeros(d, L), exact.scale(KW2, -1)),
            bias=[Fraction(0)] * L + [Fraction(1)] * n,
            activation="relu",
        )
        H = apply_layer(g, G, layer_a)
        positive = [v for row in H for v in row[L:] if v > 0]
        if not positive:
            raise DomainError("no positive entry after the first ReLU layer")
        delta = min(positive)
        W1b = exact.identity(L + n)
        for i in range(L, L + n):
            W1b[i][i] = Fraction(-2) / delta
        layer_b = ExactLayer(
            W1=W1b,
            W2=exact.zeros(L + n, L + n),
            bias=[Fraction(0)] * L + [Fraction(2)] * n,
            activation="relu",
        )
        G = apply_layer(g, H, layer_b)
        S = apply_layer(g, S, sign_layer, F0)
        layers += [layer_a, layer_b]
        deltas.append(delta)
        traces += [H, G]
    return SimulationResult(F0, layers, traces, "relu", deltas)


# ---------------------------------------------------------------------------
# Checks.


@dataclass
class EquivalenceReport:
    per_iteration: list[bool]
    row_independent: list[bool]
    max_width: int

    @property
    def ok(self) -> bool:
        return all(self.per_iteration) and all(self.row_independent)


def check_against_wl(g: Graph, result: SimulationResult, labels: Sequence[int] | None = None) -> EquivalenceReport:
    """Compare the simulated partitions with 1-WL, replaying the weights from scratch.

    For the ReLU path, iteration ``t`` is the feature matrix after layer ``2t``.
    """
    labels = list(g.labels if labels is None else labels)
    replay = run_network(g, result.initial, result.layers)
    step = 2 if result.construction == "relu" else 1
    wl = wl1_run(g, Coloring(labels))
    verdicts, indep = [], []
    L = len(result.initial[0])
    for t in range(0, len(replay), step):
        F = replay[t]
        verdicts.append(partition_of_rows(F) == wl.at(t // step))
        if result.construction == "relu" and t > 0:
            # the sign features the next layer pair reads are [F0 | C - J]
            F = exact.matmul(F, _shift_matrix(L, g.n))
        indep.append(exact.is_row_independent_mod_equality(F))
    return EquivalenceReport(verdicts, indep, max(len(F[0]) for F in replay))
