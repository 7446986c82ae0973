"""Pure-Python fallback for the zone-arithmetic core.

Same contract as the compiled module; the closure loops are vectorized per
pivot row/column with numpy, which keeps the fallback usable for the whole
test suite (just slower on the per-state call pattern of the enumeration
engine).
"""

import numpy as np

INF = 1 << 40

_ZERO_WEAK = 1


def close(m):
    for k in range(m.shape[0]):
        col = m[:, k, None]
        row = m[None, k, :]
        s = col + row - ((col | row) & 1)
        np.copyto(s, INF, where=(col >= INF) | (row >= INF))
        np.minimum(m, s, out=m)
    return bool((np.diagonal(m) >= _ZERO_WEAK).all())


def close_many(ms, ok):
    for k in range(ms.shape[1]):
        col = ms[:, :, k, None]
        row = ms[:, None, k, :]
        s = col + row - ((col | row) & 1)
        np.copyto(s, INF, where=(col >= INF) | (row >= INF))
        np.minimum(ms, s, out=ms)
    good = (np.diagonal(ms, axis1=1, axis2=2) >= _ZERO_WEAK).all(axis=1)
    ok[:] = good.astype(np.uint8)
