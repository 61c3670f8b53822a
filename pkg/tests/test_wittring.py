import itertools
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from displaylab.errors import LengthMismatch, LengthTooShort, LevelTooLarge, NotInI, NotInIdeal, RingMismatch
from displaylab.rings import GF, DualNumbers, LocalizedPoly, Poly, parse_ring, ring_from_descriptor, smallest_irreducible
from displaylab.wittring import (
    WittVector,
    compute_witt_polys,
    frobenius,
    frobenius_universal,
    ghost,
    ghost_inverse,
    integer_witt_add,
    integer_witt_mul,
    norman_combine,
    norman_split,
    verschiebung,
    witt_universal_add,
    witt_universal_mul,
)


def W(ring, *comps):
    return WittVector(ring, comps)


def ghost_oracle(kind, x, y, p):
    """Witt sum or product over F_p through integer ghost components."""
    gx, gy = ghost(list(x), p), ghost(list(y), p)
    gz = [a + b for a, b in zip(gx, gy)] if kind == "add" else [a * b for a, b in zip(gx, gy)]
    return tuple(c % p for c in ghost_inverse(gz, p))


# -- fields and rings ------------------------------------------------------


def test_field_modulus_is_lexicographically_smallest():
    assert smallest_irreducible(3, 2) == (1, 0, 1)
    # brute force: no monic degree-2 polynomial earlier in the ordering is irreducible over F_3
    for c0, c1 in itertools.product(range(3), repeat=2):
        if (c0, c1) < (1, 0):
            assert any((x * x + c1 * x + c0) % 3 == 0 for x in range(3))


def test_parse_ring_variants():
    assert parse_ring("3") == GF(3)
    assert parse_ring("3^2") == GF(3, 2)
    assert isinstance(parse_ring("5[t]"), Poly)
    assert isinstance(parse_ring("3[eps]"), DualNumbers)
    with pytest.raises(ValueError):
        parse_ring("4")


@pytest.mark.parametrize("ring", [GF(3), GF(5, 2), Poly(3), DualNumbers(3, 2), LocalizedPoly(3, 1, (1, 1))])
def test_ring_descriptor_roundtrip(ring):
    assert ring_from_descriptor(ring.descriptor()) == ring


# -- universal polynomials -------------------------------------------------


def test_level_one_polynomials_are_base_ring_operations():
    polys = compute_witt_polys(3, 1)
    x0, y0 = polys.xs[0], polys.ys[0]
    assert polys.sum[0] == x0 + y0
    assert polys.prod[0] == x0 * y0


@pytest.mark.parametrize("p", [3, 5, 7])
def test_second_sum_polynomial(p):
    polys = compute_witt_polys(p, 2)
    (x0, x1), (y0, y1) = polys.xs, polys.ys
    carry = sum(comb(p, i) // p * x0**i * y0 ** (p - i) for i in range(1, p))
    assert polys.sum[1] == x1 + y1 - carry


def test_second_product_polynomial_p3():
    polys = compute_witt_polys(3, 2)
    (x0, x1), (y0, y1) = polys.xs, polys.ys
    assert polys.prod[1] == x0**3 * y1 + x1 * y0**3 + 3 * x1 * y1


def test_level_guard():
    with pytest.raises(LevelTooLarge):
        compute_witt_polys(3, 9)


@given(
    st.sampled_from([3, 5]),
    st.integers(1, 4).flatmap(lambda n: st.tuples(st.lists(st.integers(-9, 9), min_size=n, max_size=n), st.lists(st.integers(-9, 9), min_size=n, max_size=n))),
)
def test_integer_polynomials_match_ghost_arithmetic(p, xy):
    x, y = xy
    gs = [a + b for a, b in zip(ghost(x, p), ghost(y, p))]
    gp = [a * b for a, b in zip(ghost(x, p), ghost(y, p))]
    assert integer_witt_add(x, y, p) == ghost_inverse(gs, p)
    assert integer_witt_mul(x, y, p) == ghost_inverse(gp, p)


def test_ghost_examples():
    assert ghost([7], 3) == [7]
    for x0, x1 in itertools.product(range(-3, 4), repeat=2):
        assert ghost([x0, x1], 5) == [x0, x0**5 + 5 * x1]


# -- arithmetic ------------------------------------------------------------


def test_teichmuller_is_multiplicative():
    k = GF(3, 2)
    for a, b in itertools.product(k.elements(), repeat=2):
        lhs = WittVector.teichmuller(k, a, 3) * WittVector.teichmuller(k, b, 3)
        assert lhs == WittVector.teichmuller(k, k.mul(a, b), 3)


def test_p_times_vector():
    k = GF(3)
    x = W(k, 1, 1, 1)
    assert x + x + x == W(k, 0, 1, 1)
    assert x.times_p() == W(k, 0, 1, 1)


def test_carry_example():
    k = GF(3)
    # S_1(1, 0; 2, 0) = -(1*4 + 1*2) = -6 = 0 mod 3
    assert W(k, 1, 0) + W(k, 2, 0) == W(k, 0, 0)
    assert (W(k, 1, 0) + W(k, 1, 0)).comps == ghost_oracle("add", (1, 0), (1, 0), 3)


@pytest.mark.parametrize("p,n", [(3, 1), (3, 2), (3, 3), (5, 2)])
def test_exhaustive_against_ghost_oracle(p, n):
    k = GF(p)
    vecs = list(itertools.product(range(p), repeat=n))
    if len(vecs) > 30:
        vecs = vecs[::3]
    for x, y in itertools.product(vecs, repeat=2):
        assert (W(k, *x) + W(k, *y)).comps == ghost_oracle("add", x, y, p)
        assert (W(k, *x) * W(k, *y)).comps == ghost_oracle("mul", x, y, p)


@given(st.data())
def test_galois_backend_matches_universal_polynomials(data):
    k = data.draw(st.sampled_from([GF(3, 2), GF(5, 2), GF(3, 3)]))
    n = data.draw(st.integers(1, 3))
    x = WittVector(k, data.draw(st.lists(st.integers(0, k.q - 1), min_size=n, max_size=n)))
    y = WittVector(k, data.draw(st.lists(st.integers(0, k.q - 1), min_size=n, max_size=n)))
    assert x + y == witt_universal_add(x, y)
    assert x * y == witt_universal_mul(x, y)


def test_mismatch_errors():
    with pytest.raises(LengthMismatch):
        W(GF(3), 1, 2) + W(GF(3), 1)
    with pytest.raises(RingMismatch):
        W(GF(3), 1) + W(GF(5), 1)
    with pytest.raises(LengthTooShort):
        WittVector(GF(3), ())
    with pytest.raises(LevelTooLarge):
        WittVector(GF(3), [0] * 10)


# -- Frobenius and Verschiebung --------------------------------------------


def test_frobenius_examples():
    k = GF(3, 2)
    for a in k.elements():
        assert WittVector.teichmuller(k, a, 3).F() == WittVector.teichmuller(k, k.pow(a, 3), 2)
    f = GF(3)
    for x0, x1 in itertools.product(range(3), repeat=2):
        x = W(f, x0, x1)
        assert frobenius(W(f, 0, x0, x1)) == W(f, 0, x0**3 % 3)
        assert frobenius(W(f, 0, x0, x1)) == x.times_p()
        assert x.V().F() == x.times_p()
    with pytest.raises(LengthTooShort):
        W(f, 1).F()


def test_verschiebung_examples():
    k = GF(3)
    assert W(k, 1).V() == W(k, 0, 1)
    assert verschiebung(W(k, 2, 1)).in_I()
    assert W(k, 0, 1, 2).Vinv() == W(k, 1, 2)
    with pytest.raises(NotInI):
        W(k, 1, 0).Vinv()


@given(st.data())
def test_frobenius_agrees_with_universal(data):
    k = data.draw(st.sampled_from([GF(3), GF(5), GF(3, 2)]))
    n = data.draw(st.integers(2, 4))
    x = WittVector(k, data.draw(st.lists(st.integers(0, k.q - 1), min_size=n, max_size=n)))
    assert frobenius(x) == frobenius_universal(x)


@given(st.data())
def test_structure_maps(data):
    k = data.draw(st.sampled_from([GF(3), GF(5), GF(3, 2)]))
    n = data.draw(st.integers(1, 3))
    draw = lambda m: WittVector(k, data.draw(st.lists(st.integers(0, k.q - 1), min_size=m, max_size=m)))  # noqa: E731
    x, y = draw(n + 1), draw(n + 1)
    # F is a ring homomorphism, V is additive
    assert (x + y).F() == x.F() + y.F()
    assert (x * y).F() == x.F() * y.F()
    a, b = draw(n), draw(n)
    assert (a + b).V() == a.V() + b.V()
    # projection formula x V(y) = V(F(x) y)
    assert x * b.V() == (x.F() * b).V()
    # FV = VF = p at matching lengths
    assert b.V().F() == b.times_p()
    assert x.F().V() == x.times_p()


@given(st.data())
def test_valuation_is_additive(data):
    k = GF(3, 2)
    n = 4
    draw = lambda: WittVector(k, data.draw(st.lists(st.integers(0, k.q - 1), min_size=n, max_size=n)))  # noqa: E731
    x, y = draw(), draw()
    if x.valuation() + y.valuation() < n:
        assert (x * y).valuation() == x.valuation() + y.valuation()
    if x.is_unit():
        assert (x * x.inverse()).is_one()


# -- non-field bases -------------------------------------------------------


@pytest.mark.parametrize("ring", [Poly(3), DualNumbers(3), LocalizedPoly(3, 1, (1, 1))])
def test_ring_axioms_on_other_bases(ring):
    from helpers import random_witt, rng

    gen = rng(7)
    for _ in range(8):
        x, y, z = (random_witt(ring, 3, gen) for _ in range(3))
        assert (x + y) + z == x + (y + z)
        assert x * y == y * x
        assert x * (y + z) == x * y + x * z
        assert x - x == WittVector.zero(ring, 3)


# -- Norman splitting ------------------------------------------------------


def test_norman_split_examples():
    R = DualNumbers(3, 2)
    a = W(R, R.eps(2), R.zero, R.zero)
    lin, rest = norman_split(a)
    assert lin == R.eps(2) and rest.is_zero()
    b = W(R, R.zero, R.eps(1), R.zero)
    lin, rest = norman_split(b)
    assert lin == R.zero and rest == b
    with pytest.raises(NotInIdeal):
        norman_split(W(R, R.one, R.zero))


def test_norman_roundtrip():
    from helpers import rng

    R = DualNumbers(3, 2)
    gen = rng(3)
    for _ in range(50):
        a = WittVector(R, [R.eps(R.k.random(gen)) for _ in range(3)])
        lin, rest = norman_split(a)
        assert norman_combine(lin, rest) == a
