import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfsynth.affine import AffineEquation, AffineSpace, from_constraints, rref, solve_for_outputs
from tfsynth.octdom import (
    INF, NEG_INF, Octagon, drop_redundant, interval_patterns, is_octagonal, octagon_patterns,
)

BOX = 6


def grid(n):
    return list(itertools.product(range(-BOX, BOX + 1), repeat=n))


def sat_points(n, cons):
    return [x for x in grid(n) if all(sum(c * v for c, v in zip(p, x)) <= b for p, b in cons)]


def gamma(o):
    return set() if o.bottom else set(sat_points(o.n, o.constraints()))


def box_cons(n):
    out = []
    for i in range(n):
        for s in (1, -1):
            p = [0] * n
            p[i] = s
            out.append((tuple(p), BOX))
    return out


def octagon_cons(n):
    pats = octagon_patterns(n)
    return st.lists(st.tuples(st.sampled_from(pats), st.integers(-8, 8)), max_size=6)


def test_template_order():
    assert octagon_patterns(2) == [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, -1), (-1, 1), (1, -1)]
    assert len(octagon_patterns(3)) == 18
    assert interval_patterns(2) == [(1, 0), (0, 1), (-1, 0), (0, -1)]
    assert is_octagonal((1, -1, 0)) and not is_octagonal((2, 0)) and not is_octagonal((1, 1, 1))


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(st.just(n), octagon_cons(n))))
def test_closure_gives_tight_integer_bounds(case):
    n, cons = case
    cons = cons + box_cons(n)
    pts = sat_points(n, cons)
    o = Octagon.from_constraints(n, cons)
    if not pts:
        assert o.bottom
        return
    assert not o.bottom
    for p in octagon_patterns(n):
        assert o.bound_of(p) == max(sum(c * v for c, v in zip(p, x)) for x in pts)
    assert all(o.contains(x) for x in pts)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 2).flatmap(lambda n: st.tuples(st.just(n), octagon_cons(n), octagon_cons(n))))
def test_join_meet_and_order(case):
    n, c1, c2 = case
    a = Octagon.from_constraints(n, c1 + box_cons(n))
    b = Octagon.from_constraints(n, c2 + box_cons(n))
    j = a.join(b)
    assert a.leq(j) and b.leq(j)
    for p in octagon_patterns(n):
        assert j.bound_of(p) == max(a.bound_of(p), b.bound_of(p))
    m = Octagon.bottom_of(n) if b.bottom else a.meet(b.constraints())
    assert m.leq(a) and m.leq(b)
    assert gamma(m) == gamma(a) & gamma(b)


def test_bottom_top_and_infinite():
    top = Octagon.top(2)
    assert top.bound_of((1, 1)) == INF
    assert top.interval(0) == (NEG_INF, INF)
    bot = Octagon.from_constraints(1, [((1,), 3), ((-1,), -4)])
    assert bot.bottom and bot.bound_of((1,)) == NEG_INF
    assert Octagon.bottom_of(2).join(top) == top
    # parity tightening: 2x <= 3 and -2x <= -3 has no integer point
    assert Octagon.from_constraints(2, [((1, 1), 1), ((-1, -1), -1), ((1, -1), 0), ((-1, 1), 0)]).bottom
    o = Octagon.from_points(2, [(0, 0), (3, 1)])
    assert o.bound_of((1, -1)) == 2 and o.bound_of((-1, 1)) == 0


def test_drop_redundant_keeps_meaning():
    cons = [((1, 0), 3), ((0, 1), 2), ((1, 1), 9), ((1, 1), 5), ((-1, 0), 0)]
    kept = drop_redundant(2, cons)
    assert ((1, 1), 9) not in kept and ((1, 1), 5) not in kept
    assert Octagon.from_constraints(2, kept) == Octagon.from_constraints(2, cons)


# -- affine ------------------------------------------------------------------------


vectors = st.lists(st.integers(-5, 5), min_size=3, max_size=3)


@settings(max_examples=120, deadline=None)
@given(st.lists(vectors, min_size=1, max_size=5))
def test_affine_hull_matches_numpy_rank(points):
    sp = AffineSpace.empty(3)
    for p in points:
        sp = sp.add_point(p)
    diffs = np.array([[b - a for a, b in zip(points[0], p)] for p in points[1:]] or [[0, 0, 0]])
    assert sp.rank == np.linalg.matrix_rank(diffs)
    eqs = sp.constraints()
    assert len(eqs) == 3 - sp.rank
    assert all(e.holds(p) for e in eqs for p in points)
    assert from_constraints(3, eqs) == sp
    rev = AffineSpace.empty(3)
    for p in reversed(points):
        rev = rev.add_point(p)
    assert rev == sp


def test_affine_examples():
    sp = AffineSpace.from_point([1, 2]).add_point([3, 6])
    assert sp.constraints() == [AffineEquation((2, -1), 0)]
    assert sp.contains([Fraction(1, 2), 1]) and not sp.contains([0, 1])
    assert from_constraints(2, [AffineEquation((1, 1), 1), AffineEquation((1, 1), 2)]).is_empty
    rows, piv = rref([[2, 4, 6], [1, 2, 4]], 3)
    assert piv == [0, 2] and rows[0] == [1, 2, 0]
    with pytest.raises(ValueError):
        AffineSpace.empty(2).constraints()


def test_solve_for_outputs():
    # outputs x0, x1; inputs x2, x3:  2*x0 = x2 + x3 + 1,  x1 = x3
    eqs = [AffineEquation((2, 0, -1, -1), 1), AffineEquation((0, 1, 0, -1), 0)]
    solved, bad = solve_for_outputs(eqs, 2)
    assert not bad
    by = {s.target: s for s in solved}
    assert by[0].lam == 2 and dict(by[0].coeffs) == {2: 1, 3: 1} and by[0].const == 1
    assert by[1].lam == 1 and dict(by[1].coeffs) == {3: 1}
    # x0 + x1 = x2 leaves both outputs tied together
    solved, bad = solve_for_outputs([AffineEquation((1, 1, -1), 0)], 2)
    assert not solved and len(bad) == 1
