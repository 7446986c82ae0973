# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled zone-arithmetic core.

Bounds are encoded as ``(value << 1) | weak`` so that the usual integer
order is the difference-bound order (strict is tighter than weak at the
same value).  Infinity is the sentinel ``1 << 40``; values stay small
enough that sums of two encoded bounds never reach it.
"""

INF = 1 << 40

cdef long long C_INF = 1 << 40
cdef long long ZERO_WEAK = 1


def close(long long[:, ::1] m):
    """In-place shortest-path closure.  Returns False when the zone is
    empty (some diagonal entry drops below (0, <=))."""
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t i, j, k
    cdef long long a, b, s
    for k in range(n):
        for i in range(n):
            a = m[i, k]
            if a >= C_INF:
                continue
            for j in range(n):
                b = m[k, j]
                if b >= C_INF:
                    continue
                s = a + b - ((a | b) & 1)
                if s < m[i, j]:
                    m[i, j] = s
    for i in range(n):
        if m[i, i] < ZERO_WEAK:
            return False
    return True


def close_many(long long[:, :, ::1] ms, unsigned char[::1] ok):
    """Closure of a batch of matrices; ok[t] set to 1 when non-empty."""
    cdef Py_ssize_t count = ms.shape[0]
    cdef Py_ssize_t n = ms.shape[1]
    cdef Py_ssize_t t, i, j, k
    cdef long long a, b, s
    for t in range(count):
        ok[t] = 1
        for k in range(n):
            for i in range(n):
                a = ms[t, i, k]
                if a >= C_INF:
                    continue
                for j in range(n):
                    b = ms[t, k, j]
                    if b >= C_INF:
                        continue
                    s = a + b - ((a | b) & 1)
                    if s < ms[t, i, j]:
                        ms[t, i, j] = s
        for i in range(n):
            if ms[t, i, i] < ZERO_WEAK:
                ok[t] = 0
                break
