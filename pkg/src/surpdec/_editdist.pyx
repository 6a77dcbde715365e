# cython: boundscheck=False, wraparound=False
"""Compiled restricted Damerau-Levenshtein kernel.

Same contract as `_editdist_py` (the pure-Python twin selected when this
extension is not built): unit-cost insertions, deletions, substitutions
and adjacent transpositions, characters compared by Unicode scalar
value.  The two modules must agree exactly on every input.
"""

from libc.stdlib cimport free, malloc


cdef int _dl(const unsigned int[::1] a, const unsigned int[::1] b) except -1:
    cdef Py_ssize_t la = a.shape[0]
    cdef Py_ssize_t lb = b.shape[0]
    if la == 0:
        return <int> lb
    if lb == 0:
        return <int> la
    cdef Py_ssize_t width = lb + 1
    cdef int *rows = <int *> malloc(3 * width * sizeof(int))
    if rows == NULL:
        raise MemoryError()
    cdef int *two_ago = rows
    cdef int *one_ago = rows + width
    cdef int *cur = rows + 2 * width
    cdef int *tmp
    cdef Py_ssize_t i, j
    cdef int cost, best
    try:
        for j in range(width):
            one_ago[j] = <int> j
        for i in range(la):
            cur[0] = <int> i + 1
            for j in range(1, width):
                cost = 0 if a[i] == b[j - 1] else 1
                best = one_ago[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                if one_ago[j - 1] + cost < best:
                    best = one_ago[j - 1] + cost
                if i > 0 and j > 1 and a[i] == b[j - 2] and a[i - 1] == b[j - 1]:
                    if two_ago[j - 2] + 1 < best:
                        best = two_ago[j - 2] + 1
                cur[j] = best
            tmp = two_ago
            two_ago = one_ago
            one_ago = cur
            cur = tmp
        return one_ago[lb]
    finally:
        free(rows)


def char_dl_distance(a: str, b: str) -> int:
    """Restricted Damerau-Levenshtein distance between two strings."""
    return _dl(memoryview(a.encode("utf-32-le")).cast("I"),
               memoryview(b.encode("utf-32-le")).cast("I"))


def char_dl_distance_many(a: str, bs) -> list:
    """Distances from `a` to every string in `bs`."""
    cdef const unsigned int[::1] av = memoryview(a.encode("utf-32-le")).cast("I")
    return [_dl(av, memoryview(b.encode("utf-32-le")).cast("I")) for b in bs]
