import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptasynth.errors import CapacityError, EvaluationError, SynthError
from ptasynth.params import (
    AffineExpr,
    Constraint,
    ConstraintSet,
    Cover,
    EMPTY_CONSTRAINTS,
    FALSE_CONSTRAINT,
    INF_BOUND,
    ParamBox,
    StrictBound,
    TRUE_CONSTRAINT,
    ValuationSet,
    ZERO_LE,
    bound,
    bound_add,
    bound_eval,
    bound_le_constraint,
    covers,
)

P = AffineExpr.var("p")
Q = AffineExpr.var("q")


def cset(*cs):
    return ConstraintSet(cs)


class TestAffineExpr:
    def test_eval(self):
        e = AffineExpr.of(3, {"p": 2, "q": -1})
        assert e.eval({"p": 2, "q": 5}) == 2

    def test_eval_empty(self):
        assert AffineExpr().eval({"p": 7}) == 0

    def test_eval_var_at_lower_bound(self):
        box = ParamBox.of({"p": (2, 9)})
        assert P.eval({"p": box.lower("p")}) == 2

    def test_eval_missing_param(self):
        with pytest.raises(EvaluationError):
            P.eval({"q": 1})

    def test_max_bound(self):
        box = ParamBox.of({"p": (0, 7), "q": (1, 3)})
        assert AffineExpr.of(0, {"p": 2, "q": -1}).max_bound(box) == 13

    def test_max_bound_const(self):
        box = ParamBox.of({"p": (0, 7)})
        assert AffineExpr(5).max_bound(box) == 5

    def test_max_bound_negated_var(self):
        box = ParamBox.of({"p": (2, 9)})
        assert (-P).max_bound(box) == -2

    def test_normal_form_drops_zeros(self):
        assert (P - P) == AffineExpr()
        assert AffineExpr.of(1, {"p": 0}).coeffs == ()

    def test_str_round_trip_stable(self):
        assert str(AffineExpr.of(3, {"p": 2, "q": -1})) == "2*p - q + 3"


class TestExtension:
    def test_empty_constraint_set_is_box(self):
        box = ParamBox.of({"p": (0, 2)})
        ext = EMPTY_CONSTRAINTS.extension(box)
        assert sorted(v["p"] for v in ext) == [0, 1, 2]

    def test_le_constraint(self):
        box = ParamBox.of({"p": (0, 1), "q": (0, 1)})
        ext = cset(Constraint.le(P, Q)).extension(box)
        assert [(v["p"], v["q"]) for v in ext] == [(0, 0), (0, 1), (1, 1)]

    def test_matches_pointwise_recheck(self, rng):
        # the definition is a brute-force filter; re-derive it with an
        # independent evaluator over all points
        box = ParamBox.of({"p": (0, 10), "q": (0, 10)})
        for _ in range(25):
            cs = []
            for _ in range(rng.randrange(0, 4)):
                e = AffineExpr.of(rng.randrange(-10, 11),
                                  {"p": rng.randrange(-2, 3),
                                   "q": rng.randrange(-2, 3)})
                cs.append(Constraint(e, rng.random() < 0.5))
            got = {tuple(v.values()) for v in cset(*cs).extension(box)}
            want = set()
            for p in range(11):
                for q in range(11):
                    ok = True
                    for c in cs:
                        val = (c.lhs.const
                               + sum(z * {"p": p, "q": q}[n]
                                     for n, z in c.lhs.coeffs))
                        ok = ok and (val < 0 if c.strict else val <= 0)
                    if ok:
                        want.add((p, q))
            assert got == want

    def test_box_capacity_guard(self):
        with pytest.raises(CapacityError):
            ParamBox.of({"a": (0, 4095), "b": (0, 4095), "c": (0, 1)})

    def test_extension_cached(self):
        box = ParamBox.of({"p": (0, 3)})
        cs = cset(Constraint.le(P, 2))
        assert cs.extension(box) is cs.extension(box)


class TestCovers:
    BOX = ParamBox.of({"p": (0, 10), "q": (0, 10)})

    def test_covers(self):
        c = cset(Constraint.le(P, Q))
        assert covers(c, Constraint.le(P - Q, 1), self.BOX) is Cover.COVERS

    def test_covers_negation(self):
        c = cset(Constraint.le(5, P))
        assert covers(c, Constraint.lt(P, 3), self.BOX) is Cover.COVERS_NEGATION

    def test_split(self):
        assert covers(EMPTY_CONSTRAINTS, Constraint.le(P, Q),
                      self.BOX) is Cover.SPLIT

    def test_empty_extension_covers_vacuously(self):
        c = cset(Constraint.lt(P, 0))  # impossible in the box
        assert covers(c, FALSE_CONSTRAINT, self.BOX) is Cover.COVERS

    def test_covers_iff_extension_unchanged(self, rng):
        # covers == COVERS exactly when adding the constraint keeps the
        # extension; COVERS_NEGATION exactly when it empties a non-empty one
        box = ParamBox.of({"p": (0, 6), "q": (0, 6)})
        for _ in range(40):
            base = cset(*[
                Constraint(AffineExpr.of(rng.randrange(-6, 7),
                                         {"p": rng.randrange(-2, 3),
                                          "q": rng.randrange(-2, 3)}),
                           rng.random() < 0.5)
                for _ in range(rng.randrange(0, 3))])
            c = Constraint(AffineExpr.of(rng.randrange(-6, 7),
                                         {"p": rng.randrange(-2, 3)}),
                           rng.random() < 0.5)
            got = covers(base, c, box)
            before = base.extension(box)
            after = base.extended(c, box).extension(box)
            if got is Cover.COVERS:
                assert after.bits == before.bits
            elif got is Cover.COVERS_NEGATION:
                assert after.is_empty and not before.is_empty
            else:
                assert not after.is_empty and after.bits != before.bits


class TestBoundAlgebra:
    def test_add_weak_strict(self):
        got = bound_add(bound(P), bound(Q, strict=True))
        assert got == StrictBound(P + Q, True)

    def test_add_inf_absorbs(self):
        assert bound_add(INF_BOUND, bound(3)) is INF_BOUND

    def test_add_identity(self):
        assert bound_add(ZERO_LE, ZERO_LE) == ZERO_LE

    def test_le_weak_weak(self):
        assert bound_le_constraint(bound(P), bound(Q)) == Constraint.le(P, Q)

    def test_le_strict_vs_weak_same_value(self):
        # a strict bound lies below-or-equal a weak bound at the same value
        c = bound_le_constraint(bound(3, strict=True), bound(3))
        assert c.is_trivially_true

    def test_le_weak_vs_strict_same_value(self):
        c = bound_le_constraint(bound(3), bound(3, strict=True))
        assert c == Constraint(AffineExpr(0), True)  # 0 < 0: never

    def test_le_inf_rhs_true(self):
        assert bound_le_constraint(bound(P), INF_BOUND) is TRUE_CONSTRAINT

    def test_le_inf_lhs_false(self):
        assert bound_le_constraint(INF_BOUND, bound(P)) is FALSE_CONSTRAINT

    def test_le_inf_both(self):
        assert bound_le_constraint(INF_BOUND, INF_BOUND) is TRUE_CONSTRAINT

    def test_infinite_bounds_are_strict(self):
        with pytest.raises(SynthError):
            StrictBound(None, False)


_bounds = st.one_of(
    st.just(INF_BOUND),
    st.builds(lambda c, cp, cq, s: StrictBound(
        AffineExpr.of(c, {"p": cp, "q": cq}), s),
        st.integers(-4, 4), st.integers(-2, 2), st.integers(-2, 2),
        st.booleans()),
)

_vals = st.fixed_dictionaries({"p": st.integers(0, 5), "q": st.integers(0, 5)})


class TestBoundProperties:
    @settings(max_examples=200, deadline=None)
    @given(_bounds, _bounds, _bounds)
    def test_add_associative_commutative(self, a, b, c):
        assert bound_add(a, b) == bound_add(b, a)
        assert bound_add(bound_add(a, b), c) == bound_add(a, bound_add(b, c))

    @settings(max_examples=200, deadline=None)
    @given(_bounds)
    def test_add_identity(self, a):
        assert bound_add(a, ZERO_LE) == a

    @settings(max_examples=300, deadline=None)
    @given(_bounds, _bounds, _vals)
    def test_le_matches_lexicographic_order(self, a, b, v):
        # the constraint holds at v exactly when (value, strictness) of a
        # is at most that of b: value first, weak before strict
        c = bound_le_constraint(a, b)
        ea, eb = bound_eval(a, v), bound_eval(b, v)
        if eb is None:
            expect = True
        elif ea is None:
            expect = False
        else:
            expect = ea[0] < eb[0] or (
                ea[0] == eb[0] and (ea[1] or not eb[1]))
        assert c.holds(v) == expect


class TestValuationSets:
    BOX = ParamBox.of({"p": (0, 3), "q": (0, 2)})

    def vs(self, bits):
        return ValuationSet(self.BOX, bits)

    def test_union_with_empty(self):
        a = self.vs(0b1011)
        assert a.union(ValuationSet.empty(self.BOX)).bits == a.bits

    def test_complement_of_full_is_empty(self):
        assert ValuationSet.full(self.BOX).complement().is_empty

    def test_algebra_matches_set_semantics(self, rng):
        size = self.BOX.size
        for _ in range(50):
            abits = rng.getrandbits(size)
            bbits = rng.getrandbits(size)
            a, b = self.vs(abits), self.vs(bbits)
            sa = {i for i in range(size) if abits >> i & 1}
            sb = {i for i in range(size) if bbits >> i & 1}
            assert {int(i) for i in a.union(b).indices()} == sa | sb
            assert {int(i) for i in a.intersect(b).indices()} == sa & sb
            assert a.subset(b) == (sa <= sb)
            assert {int(i) for i in a.complement().indices()} == \
                set(range(size)) - sa

    def test_mixed_boxes_rejected(self):
        other = ParamBox.of({"p": (0, 1)})
        with pytest.raises(SynthError):
            self.vs(1).union(ValuationSet.full(other))

    def test_iteration_row_major(self):
        full = ValuationSet.full(ParamBox.of({"p": (0, 1), "q": (5, 6)}))
        assert [(v["p"], v["q"]) for v in full] == [
            (0, 5), (0, 6), (1, 5), (1, 6)]

    def test_json_serialization_sorted(self):
        box = ParamBox.of({"p": (0, 1), "q": (0, 1)})
        got = json.dumps(ValuationSet.full(box).to_json_objs())
        assert got == ('[{"p": 0, "q": 0}, {"p": 0, "q": 1}, '
                       '{"p": 1, "q": 0}, {"p": 1, "q": 1}]')

    def test_membership(self):
        assert {"p": 0, "q": 0} in self.vs(1)
        assert {"p": 0, "q": 1} not in self.vs(1)


class TestConstraintSetAlgebra:
    def test_union_extension_is_intersection(self, rng):
        box = ParamBox.of({"p": (0, 8), "q": (0, 8)})
        for _ in range(20):
            mk = lambda: Constraint(
                AffineExpr.of(rng.randrange(-8, 9),
                              {"p": rng.randrange(-2, 3),
                               "q": rng.randrange(-2, 3)}),
                rng.random() < 0.5)
            c1 = [mk() for _ in range(rng.randrange(0, 3))]
            c2 = [mk() for _ in range(rng.randrange(0, 3))]
            both = ConstraintSet(c1 + c2).extension(box)
            assert both.bits == (ConstraintSet(c1).extension(box)
                                 .intersect(ConstraintSet(c2).extension(box))
                                 .bits)

    def test_extended_dedup(self):
        c = Constraint.le(P, 3)
        s = cset(c)
        assert s.extended(c) is s
