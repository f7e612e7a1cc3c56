"""Pure-Python/numpy implementations of the hot kernels.

Both functions here have compiled twins in ``_core.pyx`` with identical
results, bit for bit.  Refinement keys are the native-endian int64 bytes of
``[own, len_1, *sorted_1, len_2, *sorted_2, ...]``, so a table filled by one
backend can be reused by the other.
"""
from array import array

import numpy as np


def _sorted_segments(indptr, indices, colors):
    vals = colors[indices]
    seg = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    order = np.lexsort((vals, seg))
    return vals[order].tolist()


def refine_ids(own, colors, csrs, table):
    """Map every element's (own colour, sorted neighbour-colour multisets) to an id.

    ``table`` is updated in place; unseen keys get id ``len(table)``.
    """
    own = np.asarray(own, dtype=np.int64)
    colors = np.asarray(colors, dtype=np.int64)
    n = len(own)
    flat = [(indptr.tolist(), _sorted_segments(indptr, indices, colors)) for indptr, indices in csrs]
    own_l = own.tolist()
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        parts = [own_l[i]]
        for ptr, vals in flat:
            a, b = ptr[i], ptr[i + 1]
            parts.append(b - a)
            parts.extend(vals[a:b])
        key = array("q", parts).tobytes()
        cid = table.get(key)
        if cid is None:
            cid = len(table)
            table[key] = cid
        out[i] = cid
    return out


def sorted_sum(indptr, indices, rank, F):
    """Row ``i`` = sum of ``F[w]`` over the neighbours ``w`` of ``i``, added in ``rank`` order."""
    F = np.ascontiguousarray(F, dtype=np.float64)
    n = len(indptr) - 1
    out = np.zeros((n, F.shape[1]), dtype=np.float64)
    if len(indices) == 0:
        return out
    deg = np.diff(indptr)
    seg = np.repeat(np.arange(n), deg)
    order = np.lexsort((indices, rank[indices], seg))
    nbrs = indices[order]
    for p in range(int(deg.max())):
        rows = np.nonzero(deg > p)[0]
        out[rows] += F[nbrs[indptr[rows] + p]]
    return out
