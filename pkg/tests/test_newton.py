from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from displaylab import linalg as L
from displaylab.display import Display, Shape, interpolate_family, twist_conjugate
from displaylab.errors import InsufficientPrecision, NotFiniteField, SampleAtPole, TotalMismatch
from displaylab.newton import (
    NewtonPoint,
    dominates,
    family_newton_scan,
    lower_hull_slopes,
    mazur_check,
    newton_point,
    non_pole_points,
    ordinary_point,
)
from displaylab.rings import GF, Poly
from helpers import random_display, random_parabolic, rng

K3 = GF(3)
Fr = Fraction


def nu(*xs):
    return NewtonPoint(tuple(Fr(x) for x in xs))


IDENTITY = Display.identity(Shape.linear(2, 1), K3, 3)
ANTIDIAG = Display.linear(L.from_ints(K3, 3, [[0, 1], [1, 0]]), 1)


# -- pinned slopes ---------------------------------------------------------


def test_rank_one_slope_zero():
    assert newton_point(Display.identity(Shape.linear(1, 0), K3, 2)) == nu(0)


def test_supersingular_slopes():
    assert newton_point(ANTIDIAG) == nu("-1/2", "-1/2")


def test_ordinary_slopes():
    assert newton_point(IDENTITY) == nu(0, -1)


def test_serialization():
    assert nu(0, -1).serialize() == "0/1,-1/1"
    assert nu("-1/2", "-1/2").serialize() == "-1/2,-1/2"
    assert nu(0, -1).negated() == nu(1, 0)


def test_hull_brute_force():
    # hull slopes against a direct minimum over chords
    pts = [(0, 0), (1, 3), (2, 1), (3, None), (4, 4)]
    slopes = lower_hull_slopes(pts)
    finite = [(i, v) for i, v in pts if v is not None]
    for k in range(1, 5):
        below = min(
            Fr(v1) + Fr(v2 - v1, i2 - i1) * (k - i1)
            for (i1, v1) in finite
            for (i2, v2) in finite
            if i1 <= k <= i2 and i1 < i2
        )
        assert sum(slopes[:k]) == below


# -- dominance -------------------------------------------------------------


def test_dominance_examples():
    a, b = nu("-1/2", "-1/2"), nu(0, -1)
    assert dominates(b, b)
    assert dominates(a, b)
    assert not dominates(b, a)
    with pytest.raises(TotalMismatch):
        dominates(nu(0, 0), b)


def _vectors(h, total):
    return st.lists(st.integers(-6, 6), min_size=h - 1, max_size=h - 1).map(
        lambda xs: nu(*[Fr(x, 2) for x in xs], total - sum(Fr(x, 2) for x in xs))
    )


@given(st.integers(2, 4).flatmap(lambda h: st.tuples(_vectors(h, -1), _vectors(h, -1), _vectors(h, -1))))
def test_dominance_is_a_partial_order(triple):
    x, y, z = triple
    assert dominates(x, x)
    if dominates(x, y) and dominates(y, x):
        assert x == y
    if dominates(x, y) and dominates(y, z):
        assert dominates(x, z)


# -- invariance and precision ----------------------------------------------


@pytest.mark.parametrize("shape", [Shape.linear(2, 1), Shape.graded(2, (1, 0)), Shape.linear(3, 1)])
def test_invariant_under_twisted_conjugation(shape):
    gen = rng(1)
    for _ in range(5):
        U = random_display(shape, K3, 4, gen)
        k = random_parabolic(shape, K3, 4, gen)
        assert newton_point(twist_conjugate(U, k)) == newton_point(U)


@given(st.integers(0, 10**6))
def test_precision_soundness(seed):
    gen = rng(seed)
    shape = Shape.linear(2, 1)
    U = random_display(shape, K3, 4, gen)
    try:
        small = newton_point(U.truncate(3))
    except InsufficientPrecision:
        return
    assert newton_point(U) == small


@pytest.mark.parametrize("shape", [Shape.linear(2, 1), Shape.linear(3, 2), Shape.graded(2, (1, 0)), Shape.graded(2, (2, 1, 1))])
def test_totals(shape):
    gen = rng(2)
    # the determinant valuation grows with lcm(r, e)
    U = random_display(shape, GF(3, 2), 6, gen)
    nu_U = newton_point(U)
    assert nu_U.total == Fr(-sum(shape.ds), shape.r)
    assert all(-1 <= x <= 0 for x in nu_U.slopes)


def test_field_extension_degree_is_absorbed():
    k = GF(3, 2)
    U = Display.identity(Shape.linear(2, 1), k, 3)
    assert newton_point(U) == nu(0, -1)


def test_insufficient_precision():
    # p * identity scales to a composite whose determinant has valuation 3 >= 2
    p = L.scale(L.identity(K3, 2, 1)[0][0].times_p(), L.identity(K3, 2, 2))
    U = Display(Shape.linear(2, 1), K3, 2, (p,), validate=False)
    with pytest.raises(InsufficientPrecision):
        newton_point(U)


def test_needs_finite_field():
    U = Display.identity(Shape.linear(2, 1), Poly(3), 2)
    with pytest.raises(NotFiniteField):
        newton_point(U)


# -- ordinary point and Mazur ----------------------------------------------


def test_ordinary_point_examples():
    assert ordinary_point(Shape.linear(2, 1)) == nu(0, -1)
    assert ordinary_point(Shape.linear(1, 1)) == nu(-1)
    assert ordinary_point(Shape.graded(1, (1, 0))) == nu("-1/2")


def test_mazur_examples():
    assert mazur_check(ANTIDIAG)
    assert mazur_check(IDENTITY)


def test_mazur_random_graded():
    gen = rng(3)
    for shape in [Shape.graded(2, (1, 0)), Shape.graded(3, (1, 2)), Shape.linear(3, 1)]:
        for _ in range(10):
            assert mazur_check(random_display(shape, K3, 5, gen))


# -- family scans ----------------------------------------------------------


def test_constant_family_scan():
    fam = interpolate_family(ANTIDIAG, ANTIDIAG)
    res = family_newton_scan(fam, list(K3.elements()), K3)
    assert {row.newton for row in res.rows} == {nu("-1/2", "-1/2")}
    assert res.exceptional == ()


def test_interpolation_scan_over_f81():
    k = GF(3, 4)
    fam = interpolate_family(
        Display.identity(Shape.linear(2, 1), K3, 5), Display.linear(L.from_ints(K3, 5, [[0, 1], [1, 0]]), 1)
    )
    pts = non_pole_points(fam, k)
    res = family_newton_scan(fam, pts, k)
    assert res.maximum == nu(0, -1)
    assert all(row.dominated for row in res.rows)
    assert 0 < len(res.exceptional) < len(pts)
    assert newton_point(fam.evaluate(1, k)) == nu("-1/2", "-1/2")


def test_scan_rejects_poles():
    fam = interpolate_family(IDENTITY, ANTIDIAG)
    poles = [c for c in K3.elements() if K3.is_zero(fam.hbar_at(c))]
    assert poles
    with pytest.raises(SampleAtPole):
        family_newton_scan(fam, poles, K3)
