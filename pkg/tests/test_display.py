import itertools

import pytest

from displaylab import linalg as L
from displaylab.display import (
    Display,
    ParabolicElement,
    Shape,
    brute_force_isoms,
    co_realize,
    deformation_difference,
    e_plus,
    interpolate_family,
    is_morphism,
    lift_display,
    lift_morphism_square_zero,
    multiplier,
    multiplier_display,
    phi_block,
    twist_central,
    twist_conjugate,
    unitary_compatible,
)
from displaylab.errors import InvalidParabolic, LevelMismatch, SampleAtPole, SearchSpaceTooLarge, ShapeMismatch
from displaylab.rings import GF, DualNumbers
from displaylab.wittring import WittVector
from helpers import random_display, random_gl, random_parabolic, random_witt, rng

K3 = GF(3)


def teich(ring, a, n):
    return WittVector.teichmuller(ring, a, n)


# -- phi ---------------------------------------------------------------------


def test_phi_of_identity_is_identity():
    assert phi_block(L.identity(K3, 3, 2), 1) == L.identity(K3, 2, 2)


def test_phi_unipotent_example():
    one, zero = WittVector.one(K3, 2), WittVector.zero(K3, 2)
    v1 = WittVector(K3, (0, 1))
    k = ((one, v1), (zero, one))
    assert phi_block(k, 1) == L.from_ints(K3, 1, [[1, 1], [0, 1]])


def test_phi_teichmuller_diagonal():
    k = GF(3, 2)
    for a in range(1, k.q):
        m = L.diagonal([teich(k, a, 2)] * 2)
        assert phi_block(m, 1) == L.diagonal([teich(k, k.pow(a, 3), 1)] * 2)


def test_phi_rejects_b_outside_I():
    with pytest.raises(InvalidParabolic):
        phi_block(L.from_ints(K3, 2, [[1, 1], [0, 1]]), 1)
    with pytest.raises(InvalidParabolic):
        ParabolicElement.linear(L.from_ints(K3, 2, [[1, 1], [0, 1]]), 1)


# -- morphisms -------------------------------------------------------------


def test_identity_morphism():
    gen = rng(1)
    U = random_display(Shape.linear(2, 1), K3, 2, gen)
    assert is_morphism(ParabolicElement.identity(U.shape, K3, 2), U, U)


def test_scalar_teichmuller_automorphism_over_f9():
    # diag([a],[a]) is an automorphism of the identity display iff a^p = a
    k = GF(3, 2)
    U = Display.identity(Shape.linear(2, 1), k, 1)
    for a in range(1, k.q):
        kk = ParabolicElement.linear(L.diagonal([teich(k, a, 2)] * 2), 1)
        assert is_morphism(kk, U, U) == (k.pow(a, 3) == a)


@pytest.mark.parametrize("shape", [Shape.linear(2, 1), Shape.graded(2, (1, 0)), Shape.linear(3, 2)])
def test_twist_conjugate_composition_and_inverse(shape):
    gen = rng(5)
    for _ in range(6):
        U3 = random_display(shape, K3, 2, gen)
        k1, k2 = random_parabolic(shape, K3, 2, gen), random_parabolic(shape, K3, 2, gen)
        U2 = twist_conjugate(U3, k2)
        U1 = twist_conjugate(U2, k1)
        assert is_morphism(k1, U1, U2) and is_morphism(k2, U2, U3)
        assert is_morphism(k2 * k1, U1, U3)
        assert is_morphism(k1.inverse(), U2, U1)
        assert twist_conjugate(U1, k1.inverse()) == U2


def test_level_coherence():
    gen = rng(9)
    shape = Shape.graded(2, (1, 1))
    U = random_display(shape, K3, 3, gen)
    k = random_parabolic(shape, K3, 3, gen)
    assert twist_conjugate(U, k).truncate(2) == twist_conjugate(U.truncate(2), k.truncate(2))


def test_level_mismatch():
    gen = rng(2)
    U = random_display(Shape.linear(2, 1), K3, 2, gen)
    with pytest.raises(LevelMismatch):
        is_morphism(ParabolicElement.identity(U.shape, K3, 1), U, U)


# -- brute force -----------------------------------------------------------


def test_rank_one_automorphisms_match_enumeration():
    U = Display.identity(Shape.linear(1, 0), K3, 1)
    found = brute_force_isoms(U, U)
    oracle = [
        (a0, a1)
        for a0, a1 in itertools.product(range(3), repeat=2)
        if a0 and WittVector(K3, (a0, a1)).F() == WittVector(K3, (a0,))
    ]
    assert sorted(k.k[0][0][0].comps for k in found) == sorted(oracle)


def test_brute_force_finds_constructed_witness():
    gen = rng(4)
    shape = Shape.linear(2, 1)
    U = random_display(shape, K3, 1, gen)
    k = random_parabolic(shape, K3, 1, gen)
    assert k in brute_force_isoms(twist_conjugate(U, k), U)


def test_automorphisms_form_a_group():
    U = Display.identity(Shape.linear(2, 1), K3, 1)
    auts = brute_force_isoms(U, U)
    keys = set(auts)
    sample = auts[:: max(1, len(auts) // 12)]
    for a, b in itertools.product(sample, repeat=2):
        assert a * b in keys
        assert a.inverse() in keys


def test_search_guard():
    U = Display.identity(Shape.linear(3, 1), K3, 3)
    with pytest.raises(SearchSpaceTooLarge):
        brute_force_isoms(U, U)


def test_graded_brute_force_matches_direct_check():
    shape = Shape.graded(1, (1, 0))
    gen = rng(11)
    U = random_display(shape, K3, 1, gen)
    k = random_parabolic(shape, K3, 1, gen)
    O = twist_conjugate(U, k)
    found = brute_force_isoms(O, U)
    assert k in found
    assert all(is_morphism(x, O, U) for x in found)


# -- realization -----------------------------------------------------------


def test_co_realize_rank_one():
    one = Display.identity(Shape.linear(1, 1), K3, 2)
    M = co_realize(one)
    assert M.F_matrix == L.identity(K3, 2, 1)
    zero = Display.identity(Shape.linear(1, 0), K3, 2)
    M0 = co_realize(zero)
    assert M0.F_matrix == ((WittVector.from_int(K3, 3, 2),),)
    assert M0.V_matrix == L.identity(K3, 2, 1)


def test_co_realize_rejects_graded():
    with pytest.raises(ShapeMismatch):
        co_realize(Display.identity(Shape.graded(2, (1, 0)), K3, 1))


def test_twist_central():
    U = Display.identity(Shape.linear(2, 1), K3, 1)
    assert twist_central(U, 0) == U
    assert twist_central(twist_central(U, 2), -2) == U
    assert twist_central(U, 1).U == U.U


# -- unitary ---------------------------------------------------------------


def unitary_display(gen, n=2):
    shape = Shape.unitary_from(2, (1,))
    U0 = random_gl(K3, n, 2, gen)
    A = shape.pairing(0, K3, n)
    U1 = L.mul_all(A, L.inverse(L.transpose(U0)), A)
    return Display(shape, K3, n, (U0, U1))


def test_unitary_identity_has_unit_multiplier():
    shape = Shape.unitary_from(2, (1,))
    U = Display.identity(shape, K3, 2)
    c = multiplier(U)
    assert c is not None and all(x.is_one() for x in c)
    assert multiplier_display(U) == Display.identity(Shape.graded(1, (1, 1)), K3, 2)


def test_unitary_construction_is_compatible():
    gen = rng(3)
    for _ in range(5):
        assert unitary_compatible(unitary_display(gen))


def test_incompatible_unitary_rejected():
    gen = rng(3)
    shape = Shape.unitary_from(2, (1,))
    with pytest.raises(ShapeMismatch):
        Display(shape, K3, 2, (random_gl(K3, 2, 2, gen), L.identity(K3, 2, 2)))


# -- interpolation ---------------------------------------------------------


def test_interpolation_endpoints_and_constant_family():
    k = GF(3)
    U0 = Display.identity(Shape.linear(2, 1), k, 2)
    U1 = Display.linear(L.from_ints(k, 2, [[0, 1], [1, 0]]), 1)
    fam = interpolate_family(U0, U1)
    assert fam.evaluate(0) == U0
    assert fam.evaluate(1) == U1
    assert len(fam.hbar) - 1 <= 2 * 2
    const = interpolate_family(U1, U1)
    assert len(const.hbar) == 1
    for c in k.elements():
        assert const.evaluate(c) == U1


def test_interpolation_pole_and_symbolic_specialization():
    k = GF(3)
    U0 = Display.identity(Shape.linear(2, 1), k, 2)
    U1 = Display.linear(L.from_ints(k, 2, [[0, 1], [1, 0]]), 1)
    fam = interpolate_family(U0, U1)
    Z = fam.symbolic()
    for c in k.elements():
        if k.is_zero(fam.hbar_at(c)):
            with pytest.raises(SampleAtPole):
                fam.evaluate(c)
        else:
            assert fam.specialize_symbolic(Z, c) == fam.evaluate(c)


# -- square-zero lifting ---------------------------------------------------


def test_square_zero_identity():
    R = DualNumbers(3)
    gen = rng(8)
    U = lift_display(random_display(Shape.linear(2, 1), K3, 1, gen), R)
    h0 = ParabolicElement.identity(U.shape, K3, 1)
    k = lift_morphism_square_zero(U, U, h0)
    assert k.k == ParabolicElement.identity(U.shape, R, 1).k


def test_square_zero_recovers_witness():
    R = DualNumbers(3)
    gen = rng(12)
    shape = Shape.linear(2, 1)
    for _ in range(5):
        U = lift_display(random_display(shape, K3, 2, gen), R)
        # k* = 1 + X with X over eps R and vanishing top Witt slot
        X = tuple(
            tuple(WittVector(R, [R.eps(K3.random(gen)) for _ in range(2)] + [R.zero]) for _ in range(2)) for _ in range(2)
        )
        kstar = ParabolicElement(shape, R, 2, (L.add(L.identity(R, 3, 2), X),), True)
        O = twist_conjugate(U, kstar)
        k = lift_morphism_square_zero(U, O, ParabolicElement.identity(shape, K3, 2))
        assert k.k == kstar.k


def test_deformation_difference():
    R = DualNumbers(3)
    gen = rng(13)
    shape = Shape.linear(2, 1)
    Uref = lift_display(random_display(shape, K3, 1, gen), R)
    assert deformation_difference(Uref, Uref) == ((R.zero,),)
    for b in range(1, 3):
        N = ((R.eps(b),),)
        U = Uref.with_matrices((L.mul(e_plus(N, shape, R, 1), Uref.U[0]),))
        assert deformation_difference(U, Uref) == N


def test_deformation_group_law():
    R = DualNumbers(3)
    gen = rng(14)
    shape = Shape.linear(3, 1)
    Uref = lift_display(random_display(shape, K3, 1, gen), R)
    N1 = ((R.eps(1), R.eps(2)),)
    N2 = ((R.eps(2), R.eps(2)),)
    N12 = tuple(tuple(R.add(a, b) for a, b in zip(r1, r2)) for r1, r2 in zip(N1, N2))
    U2 = Uref.with_matrices((L.mul(e_plus(N2, shape, R, 1), Uref.U[0]),))
    U12 = U2.with_matrices((L.mul(e_plus(N1, shape, R, 1), U2.U[0]),))
    assert deformation_difference(U12, Uref) == N12


def test_unitary_compatibility_survives_compatible_twist():
    from helpers import random_parabolic_slot

    gen = rng(21)
    for _ in range(5):
        U = unitary_display(gen)
        shape = U.shape
        k0 = random_parabolic_slot(K3, 3, 2, shape.d(0), gen)
        A = shape.pairing(0, K3, 3)
        k = ParabolicElement(shape, K3, 2, (k0, L.mul_all(A, L.inverse(L.transpose(k0)), A)))
        assert unitary_compatible(twist_conjugate(U, k, validate=False))
