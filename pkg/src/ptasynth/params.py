"""Integer affine expressions over parameters, bound boxes, constraint sets
and exact valuation-set arithmetic.

Parameters range over a finite integer box, so every entailment question is
decided exactly by looking at the integer points of the box.  Extensions of
constraints are bitsets indexed by the row-major position of a point in the
box grid; they are memoized aggressively because the zone machinery asks the
same questions over and over.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping

import numpy as np

from .errors import CapacityError, EvaluationError, InputError, SynthError

MAX_BOX_POINTS = int(os.environ.get("PTASYNTH_MAX_BOX_POINTS", 1 << 24))


@dataclass(frozen=True)
class ParamBox:
    """Finite integer bounds for every parameter.

    ``params`` fixes the canonical parameter order; valuation-set bit indices
    and all serialized output follow it (row-major, last parameter fastest).
    """

    params: tuple[str, ...]
    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.params)) != len(self.params):
            raise InputError("duplicate parameter name", kind="duplicate-parameter")
        if len(self.lo) != len(self.params) or len(self.hi) != len(self.params):
            raise SynthError("bounds do not match parameter list")
        for p, a, b in zip(self.params, self.lo, self.hi):
            if a > b:
                raise SynthError(f"empty range for parameter {p}: {a}..{b}")
        if self.size > MAX_BOX_POINTS:
            raise CapacityError(
                f"parameter box has {self.size} points (limit {MAX_BOX_POINTS})"
            )

    @classmethod
    def of(cls, bounds: Mapping[str, tuple[int, int]]) -> "ParamBox":
        names = tuple(bounds)
        return cls(names, tuple(bounds[p][0] for p in names),
                   tuple(bounds[p][1] for p in names))

    @property
    def size(self) -> int:
        n = 1
        for a, b in zip(self.lo, self.hi):
            n *= b - a + 1
        return n

    def lower(self, p: str) -> int:
        return self.lo[self.params.index(p)]

    def upper(self, p: str) -> int:
        return self.hi[self.params.index(p)]

    @cached_property
    def grid(self) -> np.ndarray:
        """(num_params, size) int64 array of all points, row-major order."""
        if not self.params:
            return np.zeros((0, 1), dtype=np.int64)
        axes = [np.arange(a, b + 1, dtype=np.int64)
                for a, b in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh])

    @cached_property
    def _full_bits(self) -> int:
        return (1 << self.size) - 1

    @cached_property
    def _cbits(self) -> dict:
        return {}

    def constraint_bits(self, c: "Constraint") -> int:
        """Bitset of the points satisfying ``c``, memoized per box."""
        got = self._cbits.get(c)
        if got is not None:
            return got
        vals = np.full(self.size, c.lhs.const, dtype=np.int64)
        for p, z in c.lhs.coeffs:
            vals += z * self.grid[self.params.index(p)]
        mask = vals < 0 if c.strict else vals <= 0
        bits = int.from_bytes(
            np.packbits(mask, bitorder="little").tobytes(), "little")
        self._cbits[c] = bits
        return bits

    def point(self, index: int) -> dict[str, int]:
        """Valuation at a row-major grid index."""
        col = self.grid[:, index]
        return {p: int(v) for p, v in zip(self.params, col)}

    def index(self, v: Mapping[str, int]) -> int:
        idx = 0
        for p, a, b in zip(self.params, self.lo, self.hi):
            x = v[p]
            if not a <= x <= b:
                raise EvaluationError(f"{p}={x} outside {a}..{b}")
            idx = idx * (b - a + 1) + (x - a)
        return idx


@dataclass(frozen=True, eq=False)
class AffineExpr:
    """Normal-form integer affine expression: constant plus integer-scaled
    parameters; zero coefficients are never stored."""

    const: int = 0
    coeffs: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.const, self.coeffs)))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return (self is other
                or (isinstance(other, AffineExpr)
                    and self.const == other.const
                    and self.coeffs == other.coeffs))

    @classmethod
    def of(cls, const: int = 0, coeffs: Mapping[str, int] | None = None) -> "AffineExpr":
        items = tuple(sorted((p, int(z)) for p, z in (coeffs or {}).items() if z))
        return cls(int(const), items)

    @classmethod
    def var(cls, name: str, coeff: int = 1) -> "AffineExpr":
        return cls.of(0, {name: coeff})

    def eval(self, v: Mapping[str, int]) -> int:
        total = self.const
        for p, z in self.coeffs:
            if p not in v:
                raise EvaluationError(f"valuation missing parameter {p}")
            total += z * v[p]
        return total

    def max_bound(self, box: ParamBox) -> int:
        """Largest value over the box: positive coefficients take the upper
        bound, negative ones the lower bound."""
        total = self.const
        for p, z in self.coeffs:
            total += z * (box.upper(p) if z > 0 else box.lower(p))
        return total

    def min_bound(self, box: ParamBox) -> int:
        return -(-self).max_bound(box)

    @property
    def is_const(self) -> bool:
        return not self.coeffs

    def __add__(self, other):
        if isinstance(other, int):
            other = AffineExpr(other)
        d = dict(self.coeffs)
        for p, z in other.coeffs:
            d[p] = d.get(p, 0) + z
        return AffineExpr.of(self.const + other.const, d)

    def __neg__(self):
        return AffineExpr(-self.const, tuple((p, -z) for p, z in self.coeffs))

    def __sub__(self, other):
        if isinstance(other, int):
            other = AffineExpr(other)
        return self + (-other)

    def __mul__(self, k: int):
        return AffineExpr.of(self.const * k, {p: z * k for p, z in self.coeffs})

    __rmul__ = __mul__

    @cached_property
    def key(self) -> str:
        return str(self)

    def __str__(self):
        parts = []
        for p, z in self.coeffs:
            if z == 1:
                term = p
            elif z == -1:
                term = f"-{p}"
            else:
                term = f"{z}*{p}"
            if parts and not term.startswith("-"):
                parts.append(f"+ {term}")
            elif parts:
                parts.append(f"- {term[1:]}")
            else:
                parts.append(term)
        if self.const or not parts:
            c = self.const
            if parts:
                parts.append(f"+ {c}" if c > 0 else f"- {-c}")
            else:
                parts.append(str(c))
        return " ".join(parts)


ZERO = AffineExpr()


@dataclass(frozen=True, eq=False)
class Constraint:
    """Normalized parameter constraint ``lhs < 0`` or ``lhs <= 0``."""

    lhs: AffineExpr
    strict: bool

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.lhs, self.strict)))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return (self is other
                or (isinstance(other, Constraint)
                    and self.strict == other.strict
                    and self.lhs == other.lhs))

    @classmethod
    def le(cls, a: AffineExpr | int, b: AffineExpr | int) -> "Constraint":
        return cls(_expr(a) - _expr(b), strict=False)

    @classmethod
    def lt(cls, a: AffineExpr | int, b: AffineExpr | int) -> "Constraint":
        return cls(_expr(a) - _expr(b), strict=True)

    def negated(self) -> "Constraint":
        return Constraint(-self.lhs, not self.strict)

    def holds(self, v: Mapping[str, int]) -> bool:
        x = self.lhs.eval(v)
        return x < 0 if self.strict else x <= 0

    @property
    def is_trivially_true(self) -> bool:
        return self.lhs.is_const and (
            self.lhs.const < 0 if self.strict else self.lhs.const <= 0)

    @cached_property
    def key(self) -> str:
        return str(self)

    def __str__(self):
        return f"{self.lhs} {'<' if self.strict else '<='} 0"


TRUE_CONSTRAINT = Constraint(ZERO, strict=False)
FALSE_CONSTRAINT = Constraint(ZERO, strict=True)


def _expr(x) -> AffineExpr:
    return AffineExpr(x) if isinstance(x, int) else x


class ConstraintSet:
    """Immutable finite set of constraints with a memoized exact extension.

    The extension is computed once per box by intersecting the per-constraint
    bitsets; children built through :meth:`extended` reuse the parent's bits.
    """

    __slots__ = ("constraints", "_ext", "_hash")

    def __init__(self, constraints=()):
        self.constraints = frozenset(constraints)
        self._ext = None
        self._hash = None

    def __eq__(self, other):
        return isinstance(other, ConstraintSet) and self.constraints == other.constraints

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.constraints)
        return self._hash

    def __len__(self):
        return len(self.constraints)

    def __iter__(self):
        return iter(sorted(self.constraints, key=lambda c: (c.key, c.strict)))

    def extension(self, box: ParamBox) -> "ValuationSet":
        ext = self._ext
        if ext is not None and (ext.box is box or ext.box == box):
            return ext
        bits = box._full_bits
        for c in self.constraints:
            bits &= box.constraint_bits(c)
        ext = ValuationSet(box, bits)
        self._ext = ext
        return ext

    def extended(self, c: Constraint, box: ParamBox | None = None) -> "ConstraintSet":
        """Set with ``c`` added; extension derived incrementally when known."""
        if c in self.constraints:
            return self
        child = ConstraintSet.__new__(ConstraintSet)
        child.constraints = self.constraints | {c}
        child._hash = None
        child._ext = None
        if box is not None and self._ext is not None and \
                (self._ext.box is box or self._ext.box == box):
            child._ext = ValuationSet(box, self._ext.bits & box.constraint_bits(c))
        return child

    def __repr__(self):
        return "{" + ", ".join(str(c) for c in self) + "}"


EMPTY_CONSTRAINTS = ConstraintSet()


@dataclass(frozen=True)
class ValuationSet:
    """Set of integer parameter valuations inside a box, as a bitset over the
    row-major grid order."""

    box: ParamBox
    bits: int

    def _same(self, other: "ValuationSet"):
        if self.box is not other.box and self.box != other.box:
            raise SynthError("valuation sets over different boxes")

    @classmethod
    def full(cls, box: ParamBox) -> "ValuationSet":
        return cls(box, box._full_bits)

    @classmethod
    def empty(cls, box: ParamBox) -> "ValuationSet":
        return cls(box, 0)

    def union(self, other: "ValuationSet") -> "ValuationSet":
        self._same(other)
        return ValuationSet(self.box, self.bits | other.bits)

    def intersect(self, other: "ValuationSet") -> "ValuationSet":
        self._same(other)
        return ValuationSet(self.box, self.bits & other.bits)

    def subset(self, other: "ValuationSet") -> bool:
        self._same(other)
        return self.bits & other.bits == self.bits

    def complement(self) -> "ValuationSet":
        return ValuationSet(self.box, self.box._full_bits & ~self.bits)

    def difference(self, other: "ValuationSet") -> "ValuationSet":
        self._same(other)
        return ValuationSet(self.box, self.bits & ~other.bits)

    @property
    def is_empty(self) -> bool:
        return self.bits == 0

    def __len__(self):
        return self.bits.bit_count()

    def __contains__(self, v: Mapping[str, int]) -> bool:
        return bool(self.bits >> self.box.index(v) & 1)

    def indices(self) -> np.ndarray:
        size = self.box.size
        raw = np.frombuffer(
            self.bits.to_bytes((size + 7) // 8, "little"), dtype=np.uint8)
        mask = np.unpackbits(raw, bitorder="little")[:size]
        return np.nonzero(mask)[0]

    def __iter__(self) -> Iterator[dict[str, int]]:
        for i in self.indices():
            yield self.box.point(int(i))

    def to_json_objs(self) -> list[dict[str, int]]:
        return list(self)


class Cover(enum.Enum):
    COVERS = "covers"
    COVERS_NEGATION = "covers-negation"
    SPLIT = "split"


def covers(cset: ConstraintSet, c: Constraint, box: ParamBox) -> Cover:
    """Decide whether every point of the extension satisfies ``c``, none do,
    or the answer depends on the valuation.  An empty extension counts as
    covered (vacuous truth); callers prune such branches."""
    ext = cset.extension(box).bits
    cb = box.constraint_bits(c)
    if ext & cb == ext:
        return Cover.COVERS
    if ext & cb == 0:
        return Cover.COVERS_NEGATION
    return Cover.SPLIT


@dataclass(frozen=True, eq=False)
class StrictBound:
    """Upper bound on a clock difference: an affine expression (or infinity)
    plus a strictness flag.  strict=True means ``<``; infinity is always
    strict."""

    expr: AffineExpr | None
    strict: bool

    def __post_init__(self):
        if self.expr is None and not self.strict:
            raise SynthError("infinite bounds are strict")
        object.__setattr__(self, "_hash", hash((self.expr, self.strict)))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return (self is other
                or (isinstance(other, StrictBound)
                    and self.strict == other.strict
                    and self.expr == other.expr))

    @property
    def is_inf(self) -> bool:
        return self.expr is None

    def __str__(self):
        if self.is_inf:
            return "inf"
        return f"({self.expr}, {'<' if self.strict else '<='})"


INF_BOUND = StrictBound(None, True)
ZERO_LE = StrictBound(ZERO, False)


def bound(e: AffineExpr | int, strict: bool = False) -> StrictBound:
    return StrictBound(_expr(e), strict)


_ADD_CACHE: dict = {}
_LE_CACHE: dict = {}


def bound_add(b1: StrictBound, b2: StrictBound) -> StrictBound:
    """Sum of bounds; infinity absorbs, the sum is weak only when both are."""
    if b1.expr is None or b2.expr is None:
        return INF_BOUND
    if b1 is ZERO_LE:
        return b2
    if b2 is ZERO_LE:
        return b1
    row = _ADD_CACHE.get(b1)
    if row is None:
        row = _ADD_CACHE[b1] = {}
    got = row.get(b2)
    if got is None:
        got = row[b2] = StrictBound(b1.expr + b2.expr, b1.strict or b2.strict)
    return got


def bound_le_constraint(b1: StrictBound, b2: StrictBound) -> Constraint:
    """Constraint over parameters expressing "b1 is at most b2" in the
    lexicographic bound order (value first, weak before strict)."""
    if b2.expr is None:
        return TRUE_CONSTRAINT
    if b1.expr is None:
        return FALSE_CONSTRAINT
    row = _LE_CACHE.get(b1)
    if row is None:
        row = _LE_CACHE[b1] = {}
    got = row.get(b2)
    if got is None:
        # weak1 implies weak2 yields a weak comparison, otherwise strict
        weak_cmp = b1.strict or not b2.strict
        got = row[b2] = Constraint(b1.expr - b2.expr, strict=not weak_cmp)
    return got


def bound_eval(b: StrictBound, v: Mapping[str, int]) -> tuple[int, bool] | None:
    """Concrete (value, strict) pair, or None for infinity."""
    if b.is_inf:
        return None
    return b.expr.eval(v), b.strict
