# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of negfact.matching.pykernel.

Same trigger-table layout and the same left-to-right, longest-match-first
semantics; kept in lockstep with the pure kernel by tests.  Only the inner
loops differ: token ids and the trigger table arrive as typed int arrays.
"""

from cpython.mem cimport PyMem_Free, PyMem_Malloc


cdef int _extent_at(const int[:] ids, Py_ssize_t n, Py_ssize_t pos,
                    const int[:] flat, Py_ssize_t p_start, Py_ssize_t p_end,
                    bint unordered, int window, int* scratch) noexcept:
    cdef Py_ssize_t k = p_end - p_start
    cdef Py_ssize_t i, j, limit
    cdef int token, remaining, n_uniq, found
    if k == 0 or pos + k > n:
        return 0
    if not unordered:
        for j in range(k):
            if ids[pos + j] != flat[p_start + j]:
                return 0
        return <int> k

    # scratch holds k unique ids followed by k needed-counts.
    n_uniq = 0
    for j in range(k):
        token = flat[p_start + j]
        found = 0
        for i in range(n_uniq):
            if scratch[i] == token:
                scratch[k + i] += 1
                found = 1
                break
        if not found:
            scratch[n_uniq] = token
            scratch[k + n_uniq] = 1
            n_uniq += 1

    limit = window
    if n - pos < limit:
        limit = n - pos
    remaining = <int> k
    for j in range(limit):
        token = ids[pos + j]
        found = 0
        for i in range(n_uniq):
            if scratch[i] == token and scratch[k + i] > 0:
                scratch[k + i] -= 1
                remaining -= 1
                found = 1
                break
        if not found and j == 0:
            return 0
        if remaining == 0:
            return <int> (j + 1)
    return 0


def find_matches(const int[:] ids, const int[:] offsets, const int[:] flat,
                 const int[:] unordered, const int[:] windows, const int[:] ranks):
    """See pykernel.find_matches; returns [(trigger_index, start, end), ...]."""
    cdef Py_ssize_t n = ids.shape[0]
    cdef Py_ssize_t n_triggers = offsets.shape[0] - 1
    cdef Py_ssize_t pos = 0, t
    cdef Py_ssize_t max_k = 0, k
    cdef int extent, best_extent, best_rank
    cdef Py_ssize_t best_trigger
    cdef int* scratch

    for t in range(n_triggers):
        k = offsets[t + 1] - offsets[t]
        if k > max_k:
            max_k = k
    if max_k == 0:
        return []
    scratch = <int*> PyMem_Malloc(2 * max_k * sizeof(int))
    if scratch == NULL:
        raise MemoryError()

    matches = []
    try:
        while pos < n:
            best_extent = 0
            best_rank = -1
            best_trigger = -1
            for t in range(n_triggers):
                extent = _extent_at(ids, n, pos, flat, offsets[t], offsets[t + 1],
                                    unordered[t] != 0, windows[t], scratch)
                if extent == 0:
                    continue
                if extent > best_extent or (extent == best_extent and ranks[t] < best_rank):
                    best_extent = extent
                    best_rank = ranks[t]
                    best_trigger = t
            if best_trigger >= 0:
                matches.append((<int> best_trigger, <int> pos, <int> (pos + best_extent)))
                pos += best_extent
            else:
                pos += 1
    finally:
        PyMem_Free(scratch)
    return matches
