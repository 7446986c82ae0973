"""Concrete difference-bound matrices over integers.

A zone over ``n`` clock slots (index 0 is the constant-zero clock) is an
``(n, n)`` int64 array whose entry ``(i, j)`` encodes the bound on
``x_i - x_j``.  Encoding: ``(value << 1) | weak`` with ``weak = 1`` for
``<=``; infinity is a large sentinel.  Smaller encoded value = tighter
bound, and bound addition is ``a + b - ((a | b) & 1)``.

The hot closure loops live in a compiled extension when available; set
``PTASYNTH_PURE=1`` to force the pure fallback.
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("PTASYNTH_PURE"):
    from . import _zonecore_py as _core

    BACKEND = "python"
else:
    try:
        from . import _zonecore as _core

        BACKEND = "compiled"
    except ImportError:
        from . import _zonecore_py as _core

        BACKEND = "python"

INF = _core.INF
ZERO_WEAK = 1


def encode(value: int, strict: bool) -> int:
    return (value << 1) | (0 if strict else 1)


def decode(enc: int) -> tuple[int, bool] | None:
    if enc >= INF:
        return None
    return (enc >> 1, not (enc & 1))


def zero_zone(n: int) -> np.ndarray:
    """All clocks equal to zero."""
    return np.full((n, n), ZERO_WEAK, dtype=np.int64)


def close(m: np.ndarray) -> bool:
    return _core.close(m)


def close_many(ms: np.ndarray) -> np.ndarray:
    """Close a (count, n, n) batch in place; returns a boolean non-empty mask."""
    ok = np.empty(ms.shape[0], dtype=np.uint8)
    if ms.shape[0]:
        _core.close_many(np.ascontiguousarray(ms), ok)
    return ok.astype(bool)


def up(m: np.ndarray) -> None:
    """Remove upper bounds on all clocks (time successor)."""
    m[1:, 0] = INF


def reset(m: np.ndarray, clocks) -> None:
    """Reset ``clocks`` to zero; requires a closed matrix."""
    for r in sorted(clocks):
        m[r, :] = m[0, :]
        m[:, r] = m[:, 0]
        m[r, r] = ZERO_WEAK


def tighten(m: np.ndarray, i: int, j: int, enc: int) -> None:
    if enc < m[i, j]:
        m[i, j] = enc


def extrapolate(m: np.ndarray, bounds: np.ndarray) -> bool:
    """Widen entries past the per-clock maxima: entries above the row
    clock's maximum become infinite, entries below minus the column clock's
    maximum are floored to a strict bound there.  Returns True if anything
    changed (caller re-closes)."""
    finite = m < INF
    vals = m >> 1
    hi = finite & (vals > bounds[:, None])
    lo = finite & ~hi & (vals < -bounds[None, :])
    if not (hi.any() or lo.any()):
        return False
    m[hi] = INF
    floor = np.broadcast_to((-bounds) << 1, m.shape)
    m[lo] = floor[lo]
    return True


def zone_key(m: np.ndarray) -> bytes:
    return m.tobytes()


def is_nonempty(m: np.ndarray) -> bool:
    return bool((np.diagonal(m) >= ZERO_WEAK).all())


def dump(m: np.ndarray, names) -> str:
    """One line per finite off-diagonal entry, ``xi - xj <op> value``."""
    n = m.shape[0]
    lines = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = decode(int(m[i, j]))
            if d is None:
                continue
            v, strict = d
            lines.append(f"{names[i]} - {names[j]} {'<' if strict else '<='} {v}")
    return "\n".join(lines)
