# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled refinement and aggregation kernels (see ``_pycore`` for the reference)."""
import numpy as np
cimport numpy as cnp
from cpython.bytes cimport PyBytes_FromStringAndSize

cnp.import_array()

ctypedef cnp.int64_t i64


cdef void _isort(i64* a, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef i64 x
    for i in range(1, n):
        x = a[i]
        j = i - 1
        while j >= 0 and a[j] > x:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = x


def refine_ids(own, colors, csrs, dict table):
    cdef const i64[::1] own_v = np.ascontiguousarray(own, dtype=np.int64)
    cdef const i64[::1] col_v = np.ascontiguousarray(colors, dtype=np.int64)
    cdef Py_ssize_t n = own_v.shape[0]
    cdef Py_ssize_t nc = len(csrs)
    ptrs = [np.ascontiguousarray(pair[0], dtype=np.int64) for pair in csrs]
    idxs = [np.ascontiguousarray(pair[1], dtype=np.int64) for pair in csrs]
    cdef Py_ssize_t width = 1 + nc
    cdef Py_ssize_t c, i, p, a, b, pos
    cdef const i64[::1] ptr
    cdef const i64[::1] idx
    for c in range(nc):
        if n > 0:
            width += max(int(np.max(np.diff(ptrs[c]))), 0)
    buf_arr = np.empty(width, dtype=np.int64)
    cdef i64[::1] buf = buf_arr
    out_arr = np.empty(n, dtype=np.int64)
    cdef i64[::1] out = out_arr
    cdef object key, cid
    for i in range(n):
        buf[0] = own_v[i]
        pos = 1
        for c in range(nc):
            ptr = ptrs[c]
            idx = idxs[c]
            a = ptr[i]
            b = ptr[i + 1]
            buf[pos] = b - a
            pos += 1
            for p in range(a, b):
                buf[pos + p - a] = col_v[idx[p]]
            _isort(&buf[pos], b - a)
            pos += b - a
        key = PyBytes_FromStringAndSize(<char*>&buf[0], pos * sizeof(i64))
        cid = table.get(key)
        if cid is None:
            cid = len(table)
            table[key] = cid
        out[i] = cid
    return out_arr


def sorted_sum(indptr, indices, rank, F):
    cdef const i64[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const i64[::1] rk = np.ascontiguousarray(rank, dtype=np.int64)
    cdef const double[:, ::1] f = np.ascontiguousarray(F, dtype=np.float64)
    cdef Py_ssize_t n = ptr.shape[0] - 1
    cdef Py_ssize_t d = f.shape[1]
    out_arr = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t maxdeg = 0
    cdef Py_ssize_t i, j, p, q, a, b, m
    for i in range(n):
        if ptr[i + 1] - ptr[i] > maxdeg:
            maxdeg = ptr[i + 1] - ptr[i]
    tmp_arr = np.empty(max(maxdeg, 1), dtype=np.int64)
    cdef i64[::1] tmp = tmp_arr
    cdef i64 w, kr, kw
    with nogil:
        for i in range(n):
            a = ptr[i]
            b = ptr[i + 1]
            m = b - a
            # insertion sort of the neighbours by (rank, index)
            for p in range(m):
                w = idx[a + p]
                q = p - 1
                while q >= 0 and (rk[tmp[q]] > rk[w] or (rk[tmp[q]] == rk[w] and tmp[q] > w)):
                    tmp[q + 1] = tmp[q]
                    q -= 1
                tmp[q + 1] = w
            for p in range(m):
                w = tmp[p]
                for j in range(d):
                    out[i, j] += f[w, j]
    return out_arr
