"""Small exact linear algebra over rationals (matrices are lists of rows).

Entries are ``gmpy2.mpq`` when gmpy2 is installed, ``fractions.Fraction``
otherwise; both are exact and expose ``numerator``/``denominator``.
"""
from __future__ import annotations

from typing import Sequence

try:
    from gmpy2 import mpq as Fraction
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction

Q = Fraction
Matrix = list[list[Fraction]]


def to_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[_q(x) for x in row] for row in rows]


def _q(x):
    if hasattr(x, "numerator") and not isinstance(x, int):
        return Fraction(int(x.numerator), int(x.denominator))
    return Fraction(x)


def zeros(r: int, c: int) -> Matrix:
    return [[Fraction(0)] * c for _ in range(r)]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def shape(M: Matrix, cols: int | None = None) -> tuple[int, int]:
    return len(M), (len(M[0]) if M else (cols or 0))


def transpose(M: Matrix) -> Matrix:
    return [list(col) for col in zip(*M)] if M else []


def matmul(A: Matrix, B: Matrix) -> Matrix:
    if not A:
        return []
    if len(A[0]) != len(B):
        raise ValueError(f"shape mismatch: {len(A)}x{len(A[0])} @ {len(B)}x{len(B[0]) if B else 0}")
    if not B:
        return [[] for _ in A]
    cols = list(zip(*B))
    out = []
    for row in A:
        nz = [(k, a) for k, a in enumerate(row) if a]
        out.append([sum((a * col[k] for k, a in nz), Fraction(0)) for col in cols])
    return out


def add(A: Matrix, B: Matrix) -> Matrix:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def scale(A: Matrix, s) -> Matrix:
    s = Fraction(s)
    return [[a * s for a in row] for row in A]


def hstack(*blocks: Matrix) -> Matrix:
    blocks = [b for b in blocks if b is not None]
    return [sum((b[i] for b in blocks), []) for i in range(len(blocks[0]))]


def vstack(*blocks: Matrix) -> Matrix:
    return [list(r) for b in blocks for r in b]


def neighbor_sum(adj: Sequence[Sequence[int]], F: Matrix) -> Matrix:
    """``A @ F`` for a 0/1 adjacency given as neighbour lists."""
    width = len(F[0]) if F else 0
    out = []
    for nbrs in adj:
        acc = [Fraction(0)] * width
        for w in nbrs:
            acc = [a + b for a, b in zip(acc, F[w])]
        out.append(acc)
    return out


def rank(M: Matrix) -> int:
    A = [list(r) for r in M]
    if not A:
        return 0
    rows, cols = len(A), len(A[0])
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        p = A[r][c]
        for i in range(r + 1, rows):
            if A[i][c] != 0:
                f = A[i][c] / p
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        r += 1
        if r == rows:
            break
    return r


def inverse(M: Matrix) -> Matrix:
    n = len(M)
    A = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        A[c], A[piv] = A[piv], A[c]
        p = A[c][c]
        A[c] = [a / p for a in A[c]]
        for i in range(n):
            if i != c and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return [row[n:] for row in A]


def right_inverse(R: Matrix) -> Matrix:
    """``M`` with ``R @ M = I`` for ``R`` of full row rank (``M = R^T (R R^T)^-1``)."""
    Rt = transpose(R)
    return matmul(Rt, inverse(matmul(R, Rt)))


def distinct_rows(F: Sequence[Sequence]) -> tuple[list[tuple], list[int]]:
    """Distinct rows in first-occurrence order and the class index of every row."""
    index: dict[tuple, int] = {}
    cls = []
    for row in F:
        cls.append(index.setdefault(tuple(row), len(index)))
    return list(index), cls


def is_row_independent_mod_equality(F: Sequence[Sequence]) -> bool:
    reps, _ = distinct_rows(F)
    return rank([list(r) for r in reps]) == len(reps)


def sgn(x) -> int:
    return 1 if x > 0 else -1


def to_json(M: Matrix) -> list[list[list[int]]]:
    return [[[int(x.numerator), int(x.denominator)] for x in row] for row in M]
