# cython: boundscheck=False, wraparound=False, initializedcheck=False
# distutils: language = c++
"""Compiled multiset hash join over integer-encoded rows.

Mirrors _pyjoin.hash_join exactly, including output row order. Buckets are
keyed by an FNV-1a hash of the key columns; probe hits verify the actual
key values, so hash collisions cannot produce wrong joins.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector


cdef inline uint64_t _row_hash(const int64_t[:, ::1] rows, Py_ssize_t i,
                               const Py_ssize_t[::1] keys) nogil:
    cdef uint64_t h = 14695981039346656037ULL
    cdef Py_ssize_t k
    for k in range(keys.shape[0]):
        h ^= <uint64_t> rows[i, keys[k]]
        h *= 1099511628211ULL
    return h


cdef inline bint _keys_equal(const int64_t[:, ::1] left, Py_ssize_t li,
                             const Py_ssize_t[::1] lkeys,
                             const int64_t[:, ::1] right, Py_ssize_t ri,
                             const Py_ssize_t[::1] rkeys) nogil:
    cdef Py_ssize_t k
    for k in range(lkeys.shape[0]):
        if left[li, lkeys[k]] != right[ri, rkeys[k]]:
            return False
    return True


def hash_join(left, right, left_keys, right_keys, right_carry):
    """Join two int64 row tables on paired key columns.

    Output rows are each matching left row followed by the right row's carry
    columns; right rows are scanned in order and bucket entries kept in
    ascending left-row order, matching the pure-Python backend.
    """
    if len(left_keys) != len(right_keys):
        raise ValueError("key column lists must pair up")

    cdef cnp.ndarray[cnp.int64_t, ndim=2, mode="c"] left_arr = \
        np.ascontiguousarray(left, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2, mode="c"] right_arr = \
        np.ascontiguousarray(right, dtype=np.int64)

    cdef Py_ssize_t n_left = left_arr.shape[0]
    cdef Py_ssize_t w_left = left_arr.shape[1]
    cdef Py_ssize_t n_right = right_arr.shape[0]
    cdef Py_ssize_t n_carry = len(right_carry)
    cdef Py_ssize_t out_width = w_left + n_carry

    out_empty = np.empty((0, out_width), dtype=np.int64)
    if n_left == 0 or n_right == 0:
        return out_empty

    cdef cnp.ndarray[Py_ssize_t, ndim=1, mode="c"] lkeys = \
        np.array(left_keys, dtype=np.intp).reshape(-1)
    cdef cnp.ndarray[Py_ssize_t, ndim=1, mode="c"] rkeys = \
        np.array(right_keys, dtype=np.intp).reshape(-1)
    cdef cnp.ndarray[Py_ssize_t, ndim=1, mode="c"] carry = \
        np.array(right_carry, dtype=np.intp).reshape(-1)

    cdef const int64_t[:, ::1] lview = left_arr
    cdef const int64_t[:, ::1] rview = right_arr
    cdef const Py_ssize_t[::1] lkview = lkeys
    cdef const Py_ssize_t[::1] rkview = rkeys
    cdef const Py_ssize_t[::1] cview = carry

    cdef unordered_map[uint64_t, vector[Py_ssize_t]] buckets
    cdef Py_ssize_t i, j, k, li
    cdef uint64_t h

    with nogil:
        buckets.reserve(<size_t> n_left * 2)
        for i in range(n_left):
            h = _row_hash(lview, i, lkview)
            buckets[h].push_back(i)

    # Pass 1: count output rows.
    cdef Py_ssize_t n_out = 0
    cdef unordered_map[uint64_t, vector[Py_ssize_t]].iterator it
    with nogil:
        for j in range(n_right):
            h = _row_hash(rview, j, rkview)
            it = buckets.find(h)
            if it == buckets.end():
                continue
            for k in range(<Py_ssize_t> deref_size(it)):
                li = deref_at(it, k)
                if _keys_equal(lview, li, lkview, rview, j, rkview):
                    n_out += 1

    if n_out == 0:
        return out_empty

    out = np.empty((n_out, out_width), dtype=np.int64)
    cdef int64_t[:, ::1] oview = out
    cdef Py_ssize_t row = 0, c

    # Pass 2: fill.
    with nogil:
        for j in range(n_right):
            h = _row_hash(rview, j, rkview)
            it = buckets.find(h)
            if it == buckets.end():
                continue
            for k in range(<Py_ssize_t> deref_size(it)):
                li = deref_at(it, k)
                if not _keys_equal(lview, li, lkview, rview, j, rkview):
                    continue
                for c in range(w_left):
                    oview[row, c] = lview[li, c]
                for c in range(n_carry):
                    oview[row, w_left + c] = rview[j, cview[c]]
                row += 1

    return out


cdef extern from *:
    """
    #include <unordered_map>
    #include <vector>
    #include <cstdint>
    typedef std::unordered_map<uint64_t, std::vector<Py_ssize_t>>::iterator _bucket_it;
    static inline size_t deref_size(_bucket_it it) { return it->second.size(); }
    static inline Py_ssize_t deref_at(_bucket_it it, Py_ssize_t k) { return it->second[k]; }
    """
    size_t deref_size(unordered_map[uint64_t, vector[Py_ssize_t]].iterator) nogil
    Py_ssize_t deref_at(unordered_map[uint64_t, vector[Py_ssize_t]].iterator, Py_ssize_t) nogil
