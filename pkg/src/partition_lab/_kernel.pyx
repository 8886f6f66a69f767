# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled counting kernel.

Rows of restricted partition counts are accumulated as fixed-width
little-endian multi-limb unsigned integers, then handed back as Python ints.
The caller supplies per-total limb widths large enough for every entry.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()

NAME = "cython"


cdef inline void _add_into(uint64_t* dst, const uint64_t* src, Py_ssize_t w) noexcept nogil:
    cdef uint64_t carry = 0, carry_out, a, s
    cdef Py_ssize_t t
    for t in range(w):
        a = dst[t]
        s = a + src[t]
        carry_out = s < a
        s = s + carry
        carry = carry_out | (s < carry)
        dst[t] = s


cdef list _to_ints(const uint64_t[:, ::1] buf, Py_ssize_t n):
    cdef bytes raw = bytes(memoryview(buf))
    cdef Py_ssize_t stride = buf.shape[1] * 8
    from_bytes = int.from_bytes
    return [from_bytes(raw[i * stride:(i + 1) * stride], "little") for i in range(n)]


def at_most_rows(Py_ssize_t n_max, Py_ssize_t m, bint keep_all=False, widths=None):
    """Rows of |P_N(k)| for N = 0..n_max; see the pure-Python twin."""
    if n_max < 0 or m < 0:
        raise ValueError("n_max and m must be nonnegative")
    if widths is None:
        raise ValueError("compiled kernel needs per-total limb widths")
    cdef cnp.ndarray[cnp.int64_t, ndim=1] w_arr = np.ascontiguousarray(widths, dtype=np.int64)
    if w_arr.shape[0] != n_max + 1:
        raise ValueError("widths must have n_max + 1 entries")
    cdef Py_ssize_t W = max(1, int(w_arr.max()))
    cdef cnp.ndarray[cnp.uint64_t, ndim=2] arr = np.zeros((n_max + 1, W), dtype=np.uint64)
    cdef uint64_t[:, ::1] view = arr
    cdef const cnp.int64_t[::1] wv = w_arr
    cdef Py_ssize_t k, i
    view[0, 0] = 1
    out = [_to_ints(view, n_max + 1)] if keep_all else None
    for k in range(1, m + 1):
        with nogil:
            for i in range(k, n_max + 1):
                _add_into(&view[i, 0], &view[i - k, 0], wv[i])
        if keep_all:
            out.append(_to_ints(view, n_max + 1))
    if keep_all:
        return out
    return [_to_ints(view, n_max + 1)]
