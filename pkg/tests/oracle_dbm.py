"""Naive concrete difference-bound matrices used as the test oracle.

Deliberately independent of the package implementation: bounds are plain
(value, strict) tuples with None for infinity, the closure is a textbook
triple loop, and every operation is written from its definition.
"""

INF = None


def lt(a, b):
    """Strict order on bounds: smaller value first, strict before weak."""
    if b is INF:
        return a is not INF
    if a is INF:
        return False
    return a[0] < b[0] or (a[0] == b[0] and a[1] and not b[1])


def add(a, b):
    if a is INF or b is INF:
        return INF
    return (a[0] + b[0], a[1] or b[1])


def minimum(a, b):
    return a if lt(a, b) else b


def from_valuation(cpdbm, v):
    """Evaluate a constrained parametric matrix at one valuation, on the
    oracle's own representation."""
    n = cpdbm.n
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            b = cpdbm.mat[i][j]
            if b.expr is None:
                row.append(INF)
            else:
                row.append((b.expr.eval(v), b.strict))
        out.append(row)
    return out


def clone(m):
    return [list(row) for row in m]


def close(m):
    """Shortest-path closure; returns False when the zone is empty."""
    n = len(m)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                cand = add(m[i][k], m[k][j])
                if lt(cand, m[i][j]):
                    m[i][j] = cand
    for i in range(n):
        if lt(m[i][i], (0, False)):
            return False
    return True


def constrain(m, i, j, bound):
    if lt(bound, m[i][j]):
        m[i][j] = bound


def up(m):
    for i in range(1, len(m)):
        m[i][0] = INF


def reset(m, clocks):
    n = len(m)
    for r in sorted(clocks):
        for j in range(n):
            if j != r:
                m[r][j] = m[0][j]
        for i in range(n):
            if i != r:
                m[i][r] = m[i][0]


def extrapolate(m, maxima):
    """Per-entry widening against the per-clock maxima."""
    n = len(m)
    for i in range(n):
        for j in range(n):
            if i == j or m[i][j] is INF:
                continue
            val = m[i][j][0]
            if val > maxima[i]:
                m[i][j] = INF
            elif val < -maxima[j]:
                m[i][j] = (-maxima[j], True)


def equal(m1, m2):
    return m1 == m2
