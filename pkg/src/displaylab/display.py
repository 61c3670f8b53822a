"""Banal truncated displays for GL(h): twisted conjugation and friends.

A display of level n is a tuple of invertible matrices ``U_sigma`` over
W_n(R), one per graded slot.  A morphism ``k`` (level n+1, block-parabolic
with its upper-right block in I) relates two displays through

    U_src[s] = trunc(k[s])^-1 * U_dst[s] * Phi(k[s+1])

where ``Phi(A B; C D) = (F A, V^-1 B; p F C, F D)`` is cut by the dimension
``d[s+1]``.  Over dual numbers the hatted variant lets the zeroth component of
the B block range over eps*R and simply drops it.
"""

from __future__ import annotations

import itertools
from dataclasses import InitVar, dataclass, field
from typing import Iterator, Sequence

from . import linalg as L
from .errors import (
    DegenerateInterpolation,
    InvalidParabolic,
    LevelMismatch,
    NoSolution,
    NotNilpotent,
    NotSameReduction,
    RingMismatch,
    SampleAtPole,
    SearchSpaceTooLarge,
    ShapeMismatch,
)
from .rings import BaseRing, DualNumbers, FiniteField, GF, LocalizedPoly, Poly, ring_from_descriptor
from .wittring import WittVector

SEARCH_LIMIT = 10**7


# ---------------------------------------------------------------------------
# shapes


@dataclass(frozen=True)
class Shape:
    h: int
    ds: tuple[int, ...]
    unitary: bool = False

    def __post_init__(self):
        if self.h < 1:
            raise ShapeMismatch("height must be positive")
        if not self.ds:
            raise ShapeMismatch("a shape needs at least one slot")
        for d in self.ds:
            if not 0 <= d <= self.h:
                raise ShapeMismatch(f"dimension {d} outside [0, {self.h}]")
        if self.unitary:
            if len(self.ds) % 2:
                raise ShapeMismatch("unitary shapes have an even number of slots")
            r = len(self.ds) // 2
            for s in range(r):
                if self.ds[s + r] != self.h - self.ds[s]:
                    raise ShapeMismatch("unitary shapes need d[s+r] = h - d[s]")

    @classmethod
    def linear(cls, h: int, d: int) -> "Shape":
        return cls(h, (d,))

    @classmethod
    def graded(cls, h: int, ds: Sequence[int]) -> "Shape":
        return cls(h, tuple(ds))

    @classmethod
    def unitary_from(cls, h: int, half: Sequence[int]) -> "Shape":
        half = tuple(half)
        return cls(h, half + tuple(h - d for d in half), True)

    @property
    def r(self) -> int:
        return len(self.ds)

    @property
    def is_linear(self) -> bool:
        return self.r == 1 and not self.unitary

    def d(self, sigma: int) -> int:
        return self.ds[sigma % self.r]

    def pairing(self, sigma: int, ring: BaseRing, n: int) -> L.Matrix:
        """Integer part of J_sigma: the antidiagonal for sigma < r/2, its negative after.

        The sign records the formal scalar xi with xi_{s+r/2} = -xi_s, so that
        J_{s+r/2} = -J_s^T holds literally.
        """
        h = self.h
        base = [[1 if i + j == h - 1 else 0 for j in range(h)] for i in range(h)]
        if sigma % self.r >= self.r // 2:
            base = [[-base[j][i] for j in range(h)] for i in range(h)]
        return L.from_ints(ring, n, base)

    def to_json(self) -> dict:
        variant = "Unitary" if self.unitary else ("Linear" if self.r == 1 else "Graded")
        return {"variant": variant, "h": self.h, "d": list(self.ds)}

    @classmethod
    def from_json(cls, obj: dict) -> "Shape":
        ds = obj["d"]
        ds = (ds,) if isinstance(ds, int) else tuple(ds)
        return cls(int(obj["h"]), ds, obj.get("variant") == "Unitary")


# ---------------------------------------------------------------------------
# displays and parabolic elements


def _check_matrix(m: L.Matrix, h: int, n: int, ring: BaseRing) -> None:
    if L.size(m) != (h, h):
        raise ShapeMismatch(f"expected a {h}x{h} matrix, got {L.size(m)}")
    for row in m:
        for x in row:
            if x.ring != ring:
                raise RingMismatch(f"entry over {x.ring!r}, expected {ring!r}")
            if x.n != n:
                raise LevelMismatch(f"entry of length {x.n}, expected {n}")


@dataclass(frozen=True)
class Display:
    shape: Shape
    ring: BaseRing
    level: int
    U: tuple
    twist: int = 0
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        object.__setattr__(self, "U", tuple(L.matrix(m) for m in self.U))
        if len(self.U) != self.shape.r:
            raise ShapeMismatch(f"{len(self.U)} matrices for {self.shape.r} slots")
        if not validate:
            return
        for m in self.U:
            _check_matrix(m, self.shape.h, self.level, self.ring)
            if not L.is_invertible(m):
                raise InvalidParabolic("display matrices must be invertible")
        if self.shape.unitary and not unitary_compatible(self):
            raise ShapeMismatch("unitary pairing compatibility fails")

    @classmethod
    def linear(cls, U: L.Matrix, d: int, **kw) -> "Display":
        U = L.matrix(U)
        return cls(Shape.linear(len(U), d), L.ring_of(U), L.level(U), (U,), **kw)

    @classmethod
    def identity(cls, shape: Shape, ring: BaseRing, n: int) -> "Display":
        return cls(shape, ring, n, tuple(L.identity(ring, n, shape.h) for _ in range(shape.r)))

    def slot(self, sigma: int) -> L.Matrix:
        return self.U[sigma % self.shape.r]

    def truncate(self, m: int) -> "Display":
        return Display(self.shape, self.ring, m, tuple(L.truncate(u, m) for u in self.U), self.twist, False)

    def with_matrices(self, U: Sequence, validate: bool = True) -> "Display":
        return Display(self.shape, self.ring, self.level, tuple(U), self.twist, validate)

    def to_json(self) -> dict:
        return {
            "shape": self.shape.to_json(),
            "ring": self.ring.descriptor(),
            "level": self.level,
            "twist": self.twist,
            "U": [L.to_json(u) for u in self.U],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Display":
        ring = ring_from_descriptor(obj["ring"])
        shape = Shape.from_json(obj["shape"])
        U = tuple(L.from_json(u, ring) for u in obj["U"])
        return cls(shape, ring, int(obj["level"]), U, int(obj.get("twist", 0)))


def _antidiag(ring: BaseRing, n: int, h: int) -> L.Matrix:
    return L.from_ints(ring, n, [[1 if i + j == h - 1 else 0 for j in range(h)] for i in range(h)])


def multiplier(U: Display) -> tuple | None:
    """Per-slot similitude factors c_s, or None when U is not unitary-compatible.

    The pairing is J_s = xi_s * A with A the antidiagonal and xi_s a formal
    scalar satisfying F(xi_{s+1}) = xi_s and xi_{s+r} = -xi_s.  The scalar
    cancels from J_s U_{s+r} = c_s (U_s^T)^-1 F(J_{s+1}), which leaves
    A U_{s+r} A U_s^T = c_s.
    """
    shape, n, ring = U.shape, U.level, U.ring
    half = shape.r // 2
    A = _antidiag(ring, n, shape.h)
    out = []
    for s in range(shape.r):
        m = L.mul_all(A, U.slot(s + half), A, L.transpose(U.slot(s)))
        c = m[0][0]
        if not c.is_unit() or m != L.diagonal([c] * shape.h):
            return None
        out.append(c)
    for s in range(shape.r):
        if out[s] != out[(s + half) % shape.r]:
            return None
    return tuple(out)


def unitary_compatible(U: Display) -> bool:
    return multiplier(U) is not None


def multiplier_display(U: Display) -> Display:
    """The rank-one display of the similitude factors (dimension 1 in every slot)."""
    c = multiplier(U)
    if c is None:
        raise ShapeMismatch("display is not unitary-compatible")
    return Display(Shape.graded(1, [1] * U.shape.r), U.ring, U.level, tuple(((x,),) for x in c))


def _b_block_ok(m: L.Matrix, d: int, hat: bool) -> bool:
    h = len(m)
    for i in range(d):
        for j in range(d, h):
            x = m[i][j]
            if hat:
                ring = x.ring
                if not (isinstance(ring, DualNumbers) and ring.in_eps_ideal(x.comps[0])):
                    return False
            elif not x.in_I():
                return False
    return True


@dataclass(frozen=True)
class ParabolicElement:
    """Graded block-parabolic matrix tuple at level ``level + 1``.

    ``level`` is the level of the displays it acts on.  With ``hat`` set (dual
    numbers only) the zeroth components of the B blocks may lie in eps*R.
    """

    shape: Shape
    ring: BaseRing
    level: int
    k: tuple
    hat: bool = False
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        object.__setattr__(self, "k", tuple(L.matrix(m) for m in self.k))
        if len(self.k) != self.shape.r:
            raise ShapeMismatch(f"{len(self.k)} matrices for {self.shape.r} slots")
        if not validate:
            return
        for s, m in enumerate(self.k):
            _check_matrix(m, self.shape.h, self.level + 1, self.ring)
            if not _b_block_ok(m, self.shape.d(s), self.hat):
                raise InvalidParabolic(f"B block of slot {s} is not in I")
            if not L.is_invertible(m):
                raise InvalidParabolic(f"slot {s} is not invertible")

    @classmethod
    def identity(cls, shape: Shape, ring: BaseRing, n: int) -> "ParabolicElement":
        return cls(shape, ring, n, tuple(L.identity(ring, n + 1, shape.h) for _ in range(shape.r)))

    @classmethod
    def linear(cls, k: L.Matrix, d: int, **kw) -> "ParabolicElement":
        k = L.matrix(k)
        return cls(Shape.linear(len(k), d), L.ring_of(k), L.level(k) - 1, (k,), **kw)

    def slot(self, sigma: int) -> L.Matrix:
        return self.k[sigma % self.shape.r]

    def __mul__(self, other: "ParabolicElement") -> "ParabolicElement":
        return compose(self, other)

    def inverse(self) -> "ParabolicElement":
        return ParabolicElement(self.shape, self.ring, self.level, tuple(L.inverse(m) for m in self.k), self.hat)

    def truncate(self, m: int) -> "ParabolicElement":
        return ParabolicElement(
            self.shape, self.ring, m, tuple(L.truncate(x, m + 1) for x in self.k), self.hat, False
        )

    def sort_key(self) -> tuple:
        return tuple(
            tuple(self.ring.to_json(c) if not isinstance(self.ring, FiniteField) else c for c in x.comps)
            for m in self.k
            for row in m
            for x in row
        )

    def to_json(self) -> dict:
        return {
            "shape": self.shape.to_json(),
            "ring": self.ring.descriptor(),
            "level": self.level + 1,
            "blocks": [[d, self.shape.h - d] for d in self.shape.ds],
            "k": [L.to_json(m) for m in self.k],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ParabolicElement":
        ring = ring_from_descriptor(obj["ring"])
        return cls(Shape.from_json(obj["shape"]), ring, int(obj["level"]) - 1, tuple(L.from_json(m, ring) for m in obj["k"]))


def compose(k2: ParabolicElement, k1: ParabolicElement) -> ParabolicElement:
    """k2 * k1, the composite of k1 : U1 -> U2 and k2 : U2 -> U3."""
    if k1.shape != k2.shape or k1.level != k2.level:
        raise ShapeMismatch("cannot compose parabolic elements of different shapes or levels")
    return ParabolicElement(
        k1.shape, k1.ring, k1.level, tuple(L.mul(a, b) for a, b in zip(k2.k, k1.k)), k1.hat or k2.hat
    )


# ---------------------------------------------------------------------------
# the twisted Frobenius


def phi_block(m: L.Matrix, d: int, hat: bool = False) -> L.Matrix:
    """(A B; C D) -> (F A, V^-1 B; p F C, F D), lowering the level by one."""
    h = len(m)
    out = []
    for i in range(h):
        row = []
        for j in range(h):
            x = m[i][j]
            if i < d and j >= d:
                if hat:
                    if not x.ring.in_eps_ideal(x.comps[0]):
                        raise InvalidParabolic("B entry outside I + W(eps R)")
                    row.append(WittVector(x.ring, x.comps[1:]))
                else:
                    if not x.in_I():
                        raise InvalidParabolic("B entry outside I")
                    row.append(x.Vinv())
            elif i >= d and j < d:
                row.append(x.F().times_p())
            else:
                row.append(x.F())
        out.append(tuple(row))
    return tuple(out)


def phi_twist(k: ParabolicElement) -> tuple:
    """Per slot s, the matrix Phi(k[s+1]) cut by d[s+1] that multiplies U_s."""
    shape = k.shape
    return tuple(phi_block(k.slot(s + 1), shape.d(s + 1), k.hat) for s in range(shape.r))


def _check_pair(k: ParabolicElement, U: Display) -> None:
    if k.shape != U.shape:
        raise ShapeMismatch("parabolic element and display have different shapes")
    if k.level != U.level:
        raise LevelMismatch(f"parabolic level {k.level + 1} does not sit above display level {U.level}")
    if k.ring != U.ring:
        raise RingMismatch("parabolic element and display live over different rings")


def is_morphism(k: ParabolicElement, U_src: Display, U_dst: Display) -> bool:
    _check_pair(k, U_src)
    _check_pair(k, U_dst)
    phis = phi_twist(k)
    n = U_src.level
    for s in range(k.shape.r):
        lhs = L.mul(L.truncate(k.slot(s), n), U_src.slot(s))
        rhs = L.mul(U_dst.slot(s), phis[s])
        if lhs != rhs:
            return False
    return True


def twist_conjugate(U: Display, k: ParabolicElement, validate: bool = True) -> Display:
    """The display U' with is_morphism(k, U', U)."""
    _check_pair(k, U)
    phis = phi_twist(k)
    n = U.level
    new = tuple(L.mul_all(L.inverse(L.truncate(k.slot(s), n)), U.slot(s), phis[s]) for s in range(U.shape.r))
    return U.with_matrices(new, validate)


def twist_central(U: Display, c: int) -> Display:
    """Shift the recorded weight interval by c; the matrices are untouched."""
    return Display(U.shape, U.ring, U.level, U.U, U.twist + c, False)


# ---------------------------------------------------------------------------
# exhaustive search


def _witt_elements(k: FiniteField, n: int, in_I: bool = False) -> list[WittVector]:
    first = [0] if in_I else list(k.elements())
    rest = [list(k.elements())] * (n - 1)
    return [WittVector(k, comps) for comps in itertools.product(first, *rest)]


def parabolic_count_estimate(shape: Shape, ring: FiniteField, n: int) -> int:
    q = ring.q
    total = 1
    for d in shape.ds:
        total *= q ** ((n + 1) * shape.h**2 - d * (shape.h - d))
    return total


def enumerate_parabolic_slot(shape: Shape, ring: FiniteField, n: int, d: int) -> Iterator[L.Matrix]:
    """All invertible level-(n+1) matrices whose B block (cut at d) lies in I."""
    h = shape.h
    full = _witt_elements(ring, n + 1)
    ideal = _witt_elements(ring, n + 1, in_I=True)
    pools = [ideal if (i < d and j >= d) else full for i in range(h) for j in range(h)]
    for entries in itertools.product(*pools):
        m = tuple(tuple(entries[i * h : (i + 1) * h]) for i in range(h))
        if _residue_det_nonzero(m, ring):
            yield m


def _residue_det_nonzero(m: L.Matrix, ring: FiniteField) -> bool:
    res = L.mmap(m, lambda x: x.truncate(1))
    return L.det(res).is_unit()


def enumerate_parabolics(shape: Shape, ring: FiniteField, n: int, limit: int = SEARCH_LIMIT) -> Iterator[ParabolicElement]:
    est = parabolic_count_estimate(shape, ring, n)
    if est > limit:
        raise SearchSpaceTooLarge(f"{est} candidates exceed the limit {limit}")
    slots = [list(enumerate_parabolic_slot(shape, ring, n, d)) for d in shape.ds]
    for ks in itertools.product(*slots):
        yield ParabolicElement(shape, ring, n, ks, validate=False)


def brute_force_isoms(U1: Display, U2: Display, limit: int = SEARCH_LIMIT, first_only: bool = False) -> list[ParabolicElement]:
    """Every k with is_morphism(k, U1, U2), sorted lexicographically."""
    if U1.shape != U2.shape:
        raise ShapeMismatch("displays have different shapes")
    if U1.level != U2.level or U1.ring != U2.ring:
        raise LevelMismatch("displays have different levels or rings")
    ring = U1.ring
    if not isinstance(ring, FiniteField):
        raise RingMismatch("exhaustive search needs a finite field")
    shape, n = U1.shape, U1.level
    est = parabolic_count_estimate(shape, ring, n)
    if est > limit:
        raise SearchSpaceTooLarge(f"{est} candidates exceed the limit {limit}")
    # per slot, precompute (trunc(k), Phi(k) cut by d) so the graded equation
    # k_s U1_s = U2_s Phi(k_{s+1}) can be checked pairwise
    data = []
    for s, d in enumerate(shape.ds):
        rows = []
        for m in enumerate_parabolic_slot(shape, ring, n, d):
            rows.append((m, L.truncate(m, n), phi_block(m, d)))
        data.append(rows)
    r = shape.r
    found = []
    if r == 1:
        u1, u2 = U1.U[0], U2.U[0]
        for m, tm, ph in data[0]:
            if L.mul(tm, u1) == L.mul(u2, ph):
                found.append(ParabolicElement(shape, ring, n, (m,), validate=False))
                if first_only:
                    break
    else:
        # left side of slot s only depends on k_s, right side on k_{s+1}
        rhs_of = [[L.mul(U2.U[(s - 1) % r], ph) for (m, tm, ph) in data[s]] for s in range(r)]

        def extend(prefix: list[int]):
            s = len(prefix)
            if s == r:
                # close the cycle: k_{r-1} U1 = U2 Phi(k_0)
                last = prefix[-1]
                if L.mul(data[r - 1][last][1], U1.U[r - 1]) == rhs_of[0][prefix[0]]:
                    yield prefix
                return
            if s == 0:
                candidates = range(len(data[0]))
            else:
                # slot s-1 equation: k_{s-1} U1_{s-1} = U2_{s-1} Phi(k_s)
                target = L.mul(data[s - 1][prefix[-1]][1], U1.U[s - 1])
                candidates = [i for i, val in enumerate(rhs_of[s]) if val == target]
            for i in candidates:
                yield from extend(prefix + [i])

        for combo in extend([]):
            found.append(ParabolicElement(shape, ring, n, tuple(data[s][i][0] for s, i in enumerate(combo)), validate=False))
            if first_only:
                break
    found.sort(key=ParabolicElement.sort_key)
    return found


# ---------------------------------------------------------------------------
# the realization (M, N, F, V^-1)


@dataclass(frozen=True)
class DisplayModule:
    """M = W_{n+1}^h with N = I^d + W^{h-d}; F, V^-1 : -> W_n^h.

    F(x; y) = U (F x; p F y) and V^-1(x; y) = U (V^-1 x; F y).
    """

    level: int
    h: int
    d: int
    U: L.Matrix

    @property
    def F_matrix(self) -> L.Matrix:
        ring, n = L.ring_of(self.U), self.level
        p = WittVector.from_int(ring, ring.p, n)
        one = WittVector.one(ring, n)
        return L.mul(self.U, L.diagonal([one] * self.d + [p] * (self.h - self.d)))

    @property
    def V_matrix(self) -> L.Matrix:
        """V-sharp = diag(p 1_d, 1) U^-1, so that V F = p."""
        ring, n = L.ring_of(self.U), self.level
        p = WittVector.from_int(ring, ring.p, n)
        one = WittVector.one(ring, n)
        return L.mul(L.diagonal([p] * self.d + [one] * (self.h - self.d)), L.inverse(self.U))

    def apply_F(self, v: Sequence[WittVector]) -> tuple:
        d = self.d
        vec = [x.F() if i < d else x.F().times_p() for i, x in enumerate(v)]
        return L.mat_vec(self.U, vec)

    def apply_Vinv(self, v: Sequence[WittVector]) -> tuple:
        d = self.d
        vec = [x.Vinv() if i < d else x.F() for i, x in enumerate(v)]
        return L.mat_vec(self.U, vec)

    def generators_N(self) -> list[tuple]:
        ring, n = L.ring_of(self.U), self.level + 1
        one, zero = WittVector.one(ring, n), WittVector.zero(ring, n)
        v1 = one.truncate(n - 1).V()
        gens = []
        for i in range(self.h):
            gens.append(tuple((v1 if i < self.d else one) if j == i else zero for j in range(self.h)))
        return gens

    def generators_M(self) -> list[tuple]:
        ring, n = L.ring_of(self.U), self.level + 1
        return [tuple(c for c in col) for col in L.transpose(L.identity(ring, n, self.h))]


def co_realize(U: Display) -> DisplayModule:
    if not U.shape.is_linear:
        raise ShapeMismatch("the realization is defined for linear shapes")
    return DisplayModule(U.level, U.shape.h, U.shape.ds[0], U.U[0])


def intertwines(g: L.Matrix, src: DisplayModule, dst: DisplayModule) -> bool:
    """Does the plain matrix g (level n+1) commute with F and V^-1?"""
    n = src.level
    tg = L.truncate(g, n)
    for v in src.generators_M():
        if dst.apply_F(L.mat_vec(g, v)) != L.mat_vec(tg, src.apply_F(v)):
            return False
    for v in src.generators_N():
        gv = L.mat_vec(g, v)
        if not all(x.in_I() for x in gv[: dst.d]):
            return False
        if dst.apply_Vinv(gv) != L.mat_vec(tg, src.apply_Vinv(v)):
            return False
    return True


def realization_candidate(g: L.Matrix, dst: DisplayModule) -> L.Matrix:
    """The only source matrix U'' for which g can intertwine V^-1."""
    n = dst.level
    tg_inv = L.inverse(L.truncate(g, n))
    cols = [L.mat_vec(tg_inv, dst.apply_Vinv(L.mat_vec(g, v))) for v in dst.generators_N()]
    return L.transpose(tuple(cols))


# ---------------------------------------------------------------------------
# interpolation families


@dataclass(frozen=True)
class InterpolationFamily:
    """Z(t) = U0 + [t](U1 - U0), invertible away from the zeros of hbar."""

    U0: Display
    U1: Display
    hbar: tuple  # monic polynomial over the base field, low degree first

    @property
    def field(self) -> FiniteField:
        return self.U0.ring

    def hbar_at(self, c, field: FiniteField | None = None):
        field = field or self.field
        return Poly(field.p, self.field.e).evaluate(self.hbar, c, field)

    def evaluate(self, c, field: FiniteField | None = None) -> Display:
        """Specialize at t = c with c in an extension of the base field."""
        field = field or self.field
        if self.hbar_at(c, field) == 0:
            raise SampleAtPole(f"t = {c} is a zero of hbar")
        k, n = self.field, self.U0.level

        def embed(m):
            return L.mmap(m, lambda x: x.map(field, lambda a: field.embed_from(k, a)))

        tc = WittVector.teichmuller(field, c, n)
        mats = []
        for a, b in zip(self.U0.U, self.U1.U):
            ea, eb = embed(a), embed(b)
            mats.append(L.add(ea, L.scale(tc, L.sub(eb, ea))))
        return Display(self.U0.shape, field, n, tuple(mats), self.U0.twist)

    def base_ring(self) -> BaseRing:
        k = self.field
        if len(self.hbar) <= 1:
            return Poly(k.p, k.e)
        return LocalizedPoly(k.p, k.e, self.hbar)

    def symbolic(self) -> Display:
        """The family over F_q[t][1/hbar] (universal-polynomial arithmetic)."""
        R = self.base_ring()
        k, n = self.field, self.U0.level
        if isinstance(R, LocalizedPoly):
            lift = lambda a: R.from_poly(R.P.trim((a,)))  # noqa: E731
            t = R.from_poly((0, 1))
        else:
            lift = lambda a: R.const(a)  # noqa: E731
            t = R.t()

        def embed(m):
            return L.mmap(m, lambda x: x.map(R, lift))

        tt = WittVector.teichmuller(R, t, n)
        mats = []
        for a, b in zip(self.U0.U, self.U1.U):
            ea, eb = embed(a), embed(b)
            mats.append(L.add(ea, L.scale(tt, L.sub(eb, ea))))
        return Display(self.U0.shape, R, n, tuple(mats), self.U0.twist)

    def specialize_symbolic(self, Z: Display, c, field: FiniteField | None = None) -> Display:
        field = field or self.field
        R = Z.ring
        mats = tuple(L.mmap(m, lambda x: x.map(field, lambda a: R.evaluate(a, c, field))) for m in Z.U)
        return Display(Z.shape, field, Z.level, mats, Z.twist)


def interpolate_family(U0: Display, U1: Display) -> InterpolationFamily:
    if U0.shape != U1.shape:
        raise ShapeMismatch("interpolation needs equal shapes")
    if U0.shape.unitary:
        raise ShapeMismatch("interpolation is implemented for linear and graded shapes")
    if U0.ring != U1.ring or not isinstance(U0.ring, FiniteField):
        raise RingMismatch("both displays must live over the same finite field")
    if U0.level != U1.level:
        raise LevelMismatch("both displays must have the same level")
    k = U0.ring
    R = Poly(k.p, k.e)
    hbar = R.one
    for a, b in zip(U0.U, U1.U):
        # residue matrix a_0 + t (b_0 - a_0) over F_q[t]
        m = tuple(
            tuple(WittVector(R, (R.P.trim((x.comps[0], k.sub(y.comps[0], x.comps[0]))),)) for x, y in zip(ra, rb))
            for ra, rb in zip(a, b)
        )
        hbar = R.mul(hbar, L.det(m).comps[0])
    if not hbar:
        raise DegenerateInterpolation("the determinant vanishes identically")
    hbar = R.P.monic(hbar)
    if R.evaluate(hbar, 0) == 0 or R.evaluate(hbar, 1) == 0:
        # unreachable for invertible endpoints; kept as a guard
        raise DegenerateInterpolation("hbar vanishes at an endpoint")
    return InterpolationFamily(U0, U1, hbar)


# ---------------------------------------------------------------------------
# square-zero lifting over dual numbers


def reduce_display(U: Display) -> Display:
    ring = U.ring
    if not isinstance(ring, DualNumbers):
        raise RingMismatch("reduction is defined for dual numbers")
    mats = tuple(L.mmap(m, lambda x: x.map(ring.k, ring.reduce)) for m in U.U)
    return Display(U.shape, ring.k, U.level, mats, U.twist, False)


def lift_matrix(m: L.Matrix, ring: DualNumbers) -> L.Matrix:
    return L.mmap(m, lambda x: x.map(ring, ring.lift))


def lift_display(U: Display, ring: DualNumbers) -> Display:
    return Display(U.shape, ring, U.level, tuple(lift_matrix(m, ring) for m in U.U), U.twist)


def lift_parabolic(k: ParabolicElement, ring: DualNumbers) -> ParabolicElement:
    return ParabolicElement(k.shape, ring, k.level, tuple(lift_matrix(m, ring) for m in k.k), True, False)


def reduce_parabolic(k: ParabolicElement) -> ParabolicElement:
    ring = k.ring
    mats = tuple(L.mmap(m, lambda x: x.map(ring.k, ring.reduce)) for m in k.k)
    return ParabolicElement(k.shape, ring.k, k.level, mats, False, False)


def _in_eps(m: L.Matrix) -> bool:
    return all(x.ring.in_eps_ideal(c) for row in m for x in row for c in x.comps)


def _extend_zero(m: L.Matrix) -> L.Matrix:
    return L.mmap(m, lambda x: WittVector(x.ring, x.comps + (x.ring.zero,)))


def lift_morphism_square_zero(U: Display, O: Display, h0: ParabolicElement) -> ParabolicElement:
    """The unique k = h0 + X (X over eps R, top Witt slot zero) with is_morphism(k, O, U)."""
    ring = U.ring
    if not isinstance(ring, DualNumbers) or O.ring != ring:
        raise RingMismatch("square-zero lifting needs two displays over the same dual numbers")
    if U.shape != O.shape or U.level != O.level:
        raise ShapeMismatch("displays differ in shape or level")
    if h0.ring != ring.k or h0.shape != U.shape or h0.level != U.level:
        raise ShapeMismatch("h0 must be a parabolic element over the residue field")
    if not is_morphism(h0, reduce_display(O), reduce_display(U)):
        raise NoSolution("h0 does not relate the reductions")
    shape, n, r = U.shape, U.level, U.shape.r
    H0 = lift_parabolic(h0, ring)
    O_inv = [L.inverse(m) for m in O.U]
    X = [L.zeros(ring, n + 1, shape.h, shape.h) for _ in range(r)]
    bound = n * shape.h**2 * r + 2
    for _ in range(bound):
        k = ParabolicElement(shape, ring, n, tuple(L.add(H0.k[s], X[s]) for s in range(r)), True, False)
        phis = phi_twist(k)
        new_X = []
        for s in range(r):
            t = L.mul_all(U.U[s], phis[s], O_inv[s])
            diff = L.sub(t, L.truncate(H0.k[s], n))
            if not _in_eps(diff):
                raise NoSolution("correction leaves W(eps R)")
            new_X.append(_extend_zero(diff))
        if new_X == X:
            break
        X = new_X
    else:
        raise NotNilpotent("correction series did not terminate")
    k = ParabolicElement(shape, ring, n, tuple(L.add(H0.k[s], X[s]) for s in range(r)), True)
    if not is_morphism(k, O, U):
        raise NoSolution("fixed point does not satisfy the morphism equation")
    return k


def brute_force_square_zero(U: Display, O: Display, h0: ParabolicElement) -> list[ParabolicElement]:
    """All k = h0 + X with X over eps*R (every Witt slot free) and is_morphism(k, O, U)."""
    ring = U.ring
    shape, n, r = U.shape, U.level, U.shape.r
    k = ring.k
    eps_vectors = [
        WittVector(ring, tuple((0, b) for b in comps)) for comps in itertools.product(list(k.elements()), repeat=n + 1)
    ]
    H0 = lift_parabolic(h0, ring)
    total = len(eps_vectors) ** (shape.h**2 * r)
    if total > SEARCH_LIMIT:
        raise SearchSpaceTooLarge(f"{total} candidates exceed the limit")
    h = shape.h
    out = []
    for entries in itertools.product(eps_vectors, repeat=h * h * r):
        mats = []
        for s in range(r):
            chunk = entries[s * h * h : (s + 1) * h * h]
            Xs = tuple(tuple(chunk[i * h : (i + 1) * h]) for i in range(h))
            mats.append(L.add(H0.k[s], Xs))
        cand = ParabolicElement(shape, ring, n, tuple(mats), True, False)
        if is_morphism(cand, O, U):
            out.append(cand)
    return out


def top_slot_free_part(k: ParabolicElement, h0: ParabolicElement) -> bool:
    """Whether k - h0 has vanishing top Witt slot in every entry."""
    H0 = lift_parabolic(h0, k.ring)
    for a, b in zip(k.k, H0.k):
        for x in (y for row in L.sub(a, b) for y in row):
            if not k.ring.is_zero(x.comps[-1]):
                return False
    return True


def e_plus(N: Sequence[Sequence], shape: Shape, ring: BaseRing, n: int) -> L.Matrix:
    """(1 [N]; 0 1) at level n for a d x (h-d) matrix N of ring elements."""
    h, d = shape.h, shape.ds[0]
    rows = []
    for i in range(h):
        row = []
        for j in range(h):
            if i == j:
                row.append(WittVector.one(ring, n))
            elif i < d <= j:
                row.append(WittVector.teichmuller(ring, N[i][j - d], n))
            else:
                row.append(WittVector.zero(ring, n))
        rows.append(tuple(row))
    return tuple(rows)


def deformation_difference(U: Display, U_ref: Display) -> tuple:
    """The d x (h-d) matrix N over eps*R with U = e+(N) * (conjugate of U_ref).

    It equals minus the zeroth Witt components of the B block of the unique
    square-zero morphism U -> U_ref lifting the identity.
    """
    if reduce_display(U).U != reduce_display(U_ref).U:
        raise NotSameReduction("the two lifts reduce to different displays")
    if not U.shape.is_linear:
        raise ShapeMismatch("deformation differences are implemented for linear shapes")
    ring = U.ring
    h0 = ParabolicElement.identity(U.shape, ring.k, U.level)
    k = lift_morphism_square_zero(U_ref, U, h0)
    h, d = U.shape.h, U.shape.ds[0]
    m = k.k[0]
    return tuple(tuple(ring.neg(m[i][j].comps[0]) for j in range(d, h)) for i in range(d))
