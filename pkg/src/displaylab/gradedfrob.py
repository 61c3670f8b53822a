"""Z/rZ-graded (A, tau)-modules over W_n(R) for R of characteristic p.

Convention used throughout: slot s carries a free module M_s of rank m_s and
two matrices

    F[s] : A (x)_tau M_{s+1} -> M_s      (m_s x m_{s+1})
    V[s] : M_s -> A (x)_tau M_{s+1}      (m_{s+1} x m_s)

in standard bases.  A semilinear map is stored as a plain matrix and the
tau-twist is applied to whatever it is composed with on the source side, so
F-flat(x) = F[s] tau(x) for x in M_{s+1}.  The width vector w is indexed so
that the pair (F[s], V[s]) has width w[s+1]:

    V[s] F[s] = p^{w[s+1]}  and  F[s] V[s] = p^{w[s+1]}.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from typing import Sequence

from . import linalg as L
from .display import Display, Shape, multiplier
from .errors import (
    NotUnitary,
    PeriodMismatch,
    RankMismatch,
    RingMismatch,
    UnsupportedBase,
    WeightOutOfRange,
    WidthMismatch,
)
from .rings import BaseRing, FiniteField, ring_from_descriptor
from .wittring import WittVector


def p_power(ring: BaseRing, n: int, k: int) -> WittVector:
    x = WittVector.one(ring, n)
    for _ in range(k):
        x = x.times_p()
    return x


def scalar_matrix(c: WittVector, m: int) -> L.Matrix:
    return L.diagonal([c] * m)


def p_diagonal(ring: BaseRing, n: int, exponents: Sequence[int]) -> L.Matrix:
    if min(exponents) < 0:
        raise WeightOutOfRange(f"negative p-exponent in {list(exponents)}")
    return L.diagonal([p_power(ring, n, k) for k in exponents])


def _chain(mats: Sequence[L.Matrix]) -> L.Matrix:
    """mats[0] tau(mats[1]) tau^2(mats[2]) ..."""
    out = mats[0]
    for i, m in enumerate(mats[1:], start=1):
        out = L.mul(out, L.tau_power(m, i))
    return out


def _chain_reversed(mats: Sequence[L.Matrix]) -> L.Matrix:
    """... tau^2(mats[2]) tau(mats[1]) mats[0]"""
    out = mats[0]
    for i, m in enumerate(mats[1:], start=1):
        out = L.mul(L.tau_power(m, i), out)
    return out


@dataclass(frozen=True)
class GradedFrobModule:
    ring: BaseRing
    level: int
    w: tuple
    F: tuple
    V: tuple
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        object.__setattr__(self, "w", tuple(int(x) for x in self.w))
        object.__setattr__(self, "F", tuple(L.matrix(m) for m in self.F))
        object.__setattr__(self, "V", tuple(L.matrix(m) for m in self.V))
        if not (len(self.w) == len(self.F) == len(self.V)) or not self.F:
            raise PeriodMismatch("w, F and V must have the same positive length")
        if min(self.w) < 0:
            raise WidthMismatch("widths must be nonnegative")
        if validate:
            self.check()

    @property
    def r(self) -> int:
        return len(self.F)

    @property
    def ranks(self) -> tuple:
        return tuple(len(m) for m in self.F)

    def rank(self, s: int) -> int:
        return len(self.F[s % self.r])

    def width(self, s: int) -> int:
        return self.w[s % self.r]

    def Fm(self, s: int) -> L.Matrix:
        return self.F[s % self.r]

    def Vm(self, s: int) -> L.Matrix:
        return self.V[s % self.r]

    def check(self) -> None:
        for s in range(self.r):
            m0, m1 = self.rank(s), self.rank(s + 1)
            if L.size(self.Fm(s)) != (m0, m1) or L.size(self.Vm(s)) != (m1, m0):
                raise RankMismatch(f"slot {s}: F must be {m0}x{m1} and V {m1}x{m0}")
            for row in self.Fm(s) + self.Vm(s):
                for x in row:
                    if x.ring != self.ring:
                        raise RingMismatch("entry over a different ring")
                    if x.n != self.level:
                        raise WidthMismatch(f"entry of length {x.n} in a level-{self.level} module")
            pw = p_power(self.ring, self.level, self.width(s + 1))
            if L.mul(self.Vm(s), self.Fm(s)) != scalar_matrix(pw, m1):
                raise WidthMismatch(f"V F != p^{self.width(s + 1)} at slot {s}")
            if L.mul(self.Fm(s), self.Vm(s)) != scalar_matrix(pw, m0):
                raise WidthMismatch(f"F V != p^{self.width(s + 1)} at slot {s}")

    def truncate(self, m: int) -> "GradedFrobModule":
        return GradedFrobModule(
            self.ring, m, self.w, tuple(L.truncate(x, m) for x in self.F), tuple(L.truncate(x, m) for x in self.V)
        )

    def shift(self, k: int) -> "GradedFrobModule":
        """The module with slots N_s = M_{s+k}."""
        idx = [(s + k) % self.r for s in range(self.r)]
        return GradedFrobModule(
            self.ring, self.level, tuple(self.w[i] for i in idx), tuple(self.F[i] for i in idx), tuple(self.V[i] for i in idx)
        )

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "ring": self.ring.descriptor(),
            "level": self.level,
            "ranks": list(self.ranks),
            "w": list(self.w),
            "F": [L.to_json(m) for m in self.F],
            "V": [L.to_json(m) for m in self.V],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GradedFrobModule":
        ring = ring_from_descriptor(obj["ring"])
        return cls(
            ring,
            int(obj["level"]),
            tuple(obj["w"]),
            tuple(L.from_json(m, ring) for m in obj["F"]),
            tuple(L.from_json(m, ring) for m in obj["V"]),
        )


def unit_module(ring: BaseRing, n: int, r: int) -> GradedFrobModule:
    one = L.identity(ring, n, 1)
    return GradedFrobModule(ring, n, (0,) * r, (one,) * r, (one,) * r)


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True)
class GradedHom:
    """Per-slot matrices f[s] : N_s -> M_s."""

    f: tuple

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(L.matrix(m) for m in self.f))

    def slot(self, s: int) -> L.Matrix:
        return self.f[s % len(self.f)]


def _check_compatible(N: GradedFrobModule, M: GradedFrobModule) -> None:
    if N.r != M.r:
        raise PeriodMismatch(f"periods {N.r} and {M.r} differ")
    if N.w != M.w:
        raise WidthMismatch(f"widths {N.w} and {M.w} differ")
    if N.ring != M.ring:
        raise RingMismatch("modules over different rings")


def hom_check(f: GradedHom, N: GradedFrobModule, M: GradedFrobModule) -> bool:
    """f_s F^N_s = F^M_s tau(f_{s+1}) and tau(f_{s+1}) V^N_s = V^M_s f_s for all s."""
    _check_compatible(N, M)
    if len(f.f) != N.r:
        raise PeriodMismatch(f"{len(f.f)} hom components for period {N.r}")
    for s in range(N.r):
        if L.size(f.slot(s)) != (M.rank(s), N.rank(s)):
            raise RankMismatch(f"component {s} has size {L.size(f.slot(s))}")
    for s in range(N.r):
        tf = L.tau(f.slot(s + 1))
        if L.mul(f.slot(s), N.Fm(s)) != L.mul(M.Fm(s), tf):
            return False
        if L.mul(tf, N.Vm(s)) != L.mul(M.Vm(s), f.slot(s)):
            return False
    return True


def identity_hom(M: GradedFrobModule) -> GradedHom:
    return GradedHom(tuple(L.identity(M.ring, M.level, m) for m in M.ranks))


def compose_homs(g: GradedHom, f: GradedHom) -> GradedHom:
    return GradedHom(tuple(L.mul(a, b) for a, b in zip(g.f, f.f)))


def scale_hom(c: WittVector, f: GradedHom) -> GradedHom:
    return GradedHom(tuple(L.scale(c, m) for m in f.f))


# ---------------------------------------------------------------------------
# tensor product and duality


def tensor(M: GradedFrobModule, N: GradedFrobModule) -> GradedFrobModule:
    if M.r != N.r:
        raise PeriodMismatch(f"periods {M.r} and {N.r} differ")
    if M.ring != N.ring or M.level != N.level:
        raise RingMismatch("tensor factors over different rings or levels")
    return GradedFrobModule(
        M.ring,
        M.level,
        tuple(a + b for a, b in zip(M.w, N.w)),
        tuple(L.kron(a, b) for a, b in zip(M.F, N.F)),
        tuple(L.kron(a, b) for a, b in zip(M.V, N.V)),
    )


def tensor_hom(f: GradedHom, g: GradedHom) -> GradedHom:
    return GradedHom(tuple(L.kron(a, b) for a, b in zip(f.f, g.f)))


def dual(M: GradedFrobModule) -> GradedFrobModule:
    """Dual module in the dual bases: F-check = V^T and V-check = F^T."""
    return GradedFrobModule(
        M.ring, M.level, M.w, tuple(L.transpose(v) for v in M.V), tuple(L.transpose(f) for f in M.F)
    )


def dual_pairing_holds(M: GradedFrobModule) -> bool:
    """(F-flat x, F-check-flat y) = p^{w_{s+1}} tau(x, y), i.e. F[s]^T Fcheck[s] = p^{w_{s+1}}."""
    D = dual(M)
    for s in range(M.r):
        pw = p_power(M.ring, M.level, M.width(s + 1))
        if L.mul(L.transpose(M.Fm(s)), D.Fm(s)) != scalar_matrix(pw, M.rank(s + 1)):
            return False
    return True


# ---------------------------------------------------------------------------
# nilpotence


def F_nilpotence_exponent(M: GradedFrobModule) -> int | None:
    """Least s with (F-flat)^s(M) in pM, or None.

    Works modulo p, where M/pM is a graded vector space of total dimension
    S = sum(m).  The images of a semilinear endomorphism decrease strictly
    until they stabilize, so s <= S whenever it exists.
    """
    if not isinstance(M.ring, FiniteField):
        raise UnsupportedBase("nilpotence tests need a finite residue field")
    red = M.truncate(1)
    total = sum(M.ranks)
    chains = [red.Fm(s) for s in range(M.r)]
    for s in range(1, total + 1):
        if all(L.is_zero(c) for c in chains):
            return s
        chains = [L.mul(chains[t], L.tau_power(red.Fm(t + s), s)) for t in range(M.r)]
    return None


def is_F_nilpotent(M: GradedFrobModule) -> bool:
    return F_nilpotence_exponent(M) is not None


def is_V_nilpotent(M: GradedFrobModule) -> bool:
    return is_F_nilpotent(dual(M))


# ---------------------------------------------------------------------------
# weight profiles and the realization Fib^{a,b}


@dataclass(frozen=True)
class WeightProfile:
    """Per-slot weight intervals [a_s, b_s]; unitary profiles obey a_{s+r/2} + b_s = c_s."""

    a: tuple
    b: tuple
    unitary: bool = False
    c: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if len(self.a) != len(self.b) or not self.a:
            raise PeriodMismatch("a and b must have the same positive length")
        for x, y in zip(self.a, self.b):
            if x > y:
                raise WeightOutOfRange(f"empty interval [{x}, {y}]")
        if self.unitary:
            r = len(self.a)
            if r % 2:
                raise NotUnitary("unitary profiles have an even period")
            c = self.c if self.c is not None else (1,) * r
            object.__setattr__(self, "c", tuple(int(x) for x in c))
            half = r // 2
            for s in range(r):
                if self.a[(s + half) % r] + self.b[s] != self.c[s]:
                    raise NotUnitary(f"a[{(s + half) % r}] + b[{s}] != {self.c[s]}")

    @classmethod
    def constant(cls, r: int, a: int = 0, b: int = 1, unitary: bool = False) -> "WeightProfile":
        return cls((a,) * r, (b,) * r, unitary)

    @classmethod
    def standard(cls, shape: Shape) -> "WeightProfile":
        """The tightest interval containing the weights {1 on the first d, 0 on the rest}."""
        a = tuple(0 if d < shape.h else 1 for d in shape.ds)
        b = tuple(1 if d > 0 else 0 for d in shape.ds)
        return cls(a, b, False)

    @property
    def r(self) -> int:
        return len(self.a)

    @property
    def w(self) -> tuple:
        return tuple(y - x for x, y in zip(self.a, self.b))

    def at(self, s: int) -> tuple[int, int]:
        return self.a[s % self.r], self.b[s % self.r]

    def shifted(self, c: int) -> "WeightProfile":
        return WeightProfile(tuple(x + c for x in self.a), tuple(x + c for x in self.b), False)

    def to_json(self) -> dict:
        return {"a": list(self.a), "b": list(self.b), "unitary": self.unitary}

    @classmethod
    def from_json(cls, obj: dict) -> "WeightProfile":
        return cls(tuple(obj["a"]), tuple(obj["b"]), bool(obj.get("unitary", False)))


REP_FACTORS = ("std", "dual", "chi")


def _factor_matrix(kind: str, U: Display, s: int, mult: tuple | None) -> L.Matrix:
    if kind == "std":
        return U.slot(s)
    if kind == "dual":
        return L.inverse(L.transpose(U.slot(s)))
    return ((mult[s % U.shape.r],),)


def _factor_weights(kind: str, U: Display, s: int) -> list[int]:
    h, d, t = U.shape.h, U.shape.d(s), U.twist
    std = [1 + t if i < d else t for i in range(h)]
    if kind == "std":
        return std
    if kind == "dual":
        return [-x for x in std]
    return [1 + 2 * t]


def _kron_weights(parts: Sequence[list[int]]) -> list[int]:
    out = [0]
    for part in parts:
        out = [x + y for x in out for y in part]
    return out


def rep_weights(U: Display, rep: Sequence[str], s: int) -> list[int]:
    return _kron_weights([_factor_weights(k, U, s) for k in rep])


def _check_rep(rep: Sequence[str], U: Display) -> tuple | None:
    if not rep or any(k not in REP_FACTORS for k in rep):
        raise WeightOutOfRange(f"unsupported representation {rep!r}")
    if "chi" in rep:
        if not U.shape.unitary:
            raise NotUnitary("the multiplier character needs a unitary display")
        return multiplier(U)
    return None


def rep_matrix(U: Display, rep: Sequence[str], s: int, mult: tuple | None = None) -> L.Matrix:
    mats = [_factor_matrix(k, U, s, mult) for k in rep]
    out = mats[0]
    for m in mats[1:]:
        out = L.kron(out, m)
    return out


def fib_realize(U: Display, profile: WeightProfile, rep: Sequence[str] = ("std",)) -> GradedFrobModule:
    """F[s] = rho(U_s) beta_{s+1}(p) and V[s] = alpha_{s+1}(p) rho(U_s)^-1.

    beta(p) = diag(p^{b - lambda}) and alpha(p) = diag(p^{lambda - a}) in the
    weight basis of the cocharacter at slot s+1.
    """
    rep = tuple(rep)
    mult = _check_rep(rep, U)
    r, n, ring = U.shape.r, U.level, U.ring
    if profile.r != r:
        raise PeriodMismatch(f"profile period {profile.r} for a display of period {r}")
    F, V = [], []
    for s in range(r):
        lam = rep_weights(U, rep, s + 1)
        a, b = profile.at(s + 1)
        if min(lam) < a or max(lam) > b:
            raise WeightOutOfRange(f"weights {sorted(set(lam))} outside [{a}, {b}] at slot {(s + 1) % r}")
        rho = rep_matrix(U, rep, s, mult)
        F.append(L.mul(rho, p_diagonal(ring, n, [b - x for x in lam])))
        V.append(L.mul(p_diagonal(ring, n, [x - a for x in lam]), L.inverse(rho)))
    return GradedFrobModule(ring, n, profile.w, tuple(F), tuple(V))


def similitude_factor(k_s: L.Matrix, k_shift: L.Matrix) -> WittVector:
    """c with A k_{s+r/2} A k_s^T = c (A the antidiagonal)."""
    h = len(k_s)
    ring, n = L.ring_of(k_s), L.level(k_s)
    A = L.from_ints(ring, n, [[1 if i + j == h - 1 else 0 for j in range(h)] for i in range(h)])
    m = L.mul_all(A, k_shift, A, L.transpose(k_s))
    if m != L.diagonal([m[0][0]] * h):
        raise NotUnitary("parabolic element is not a similitude")
    return m[0][0]


def fib_hom(k, rep: Sequence[str] = ("std",)) -> GradedHom:
    """The per-slot matrices rho(trunc k_s) attached to a graded morphism k."""
    rep = tuple(rep)
    n = k.level
    mats = [L.truncate(m, n) for m in k.k]
    r = len(mats)
    mult = None
    if "chi" in rep:
        half = r // 2
        mult = tuple(similitude_factor(mats[s], mats[(s + half) % r]) for s in range(r))
    out = []
    for s in range(r):
        parts = []
        for kind in rep:
            if kind == "std":
                parts.append(mats[s])
            elif kind == "dual":
                parts.append(L.inverse(L.transpose(mats[s])))
            else:
                parts.append(((mult[s],),))
        m = parts[0]
        for x in parts[1:]:
            m = L.kron(m, x)
        out.append(m)
    return GradedHom(tuple(out))


@dataclass(frozen=True)
class PairingMaps:
    source: GradedFrobModule  # Fib(std) shifted by r/2
    target: GradedFrobModule  # Fib(chi (x) dual)
    maps: GradedHom


def dual_profile(profile: WeightProfile) -> WeightProfile:
    c = profile.c or (1,) * profile.r
    return WeightProfile(tuple(ci - y for ci, y in zip(c, profile.b)), tuple(ci - x for ci, x in zip(c, profile.a)))


def unitary_pairing_maps(U: Display, profile: WeightProfile) -> PairingMaps:
    """The maps Fib_{s+r/2}(std) -> Fib_s(chi (x) dual) induced by the pairing.

    Each component is the antidiagonal A; the formal scalar of the pairing
    cancels from every compatibility square (see display.multiplier).
    """
    if not profile.unitary or not U.shape.unitary:
        raise NotUnitary("unitary pairing maps need a unitary display and profile")
    if not pairing_is_skew(U.shape, U.ring, U.level):
        raise NotUnitary("pairing matrices are not skew")
    half = U.shape.r // 2
    source = fib_realize(U, profile).shift(half)
    target = fib_realize(U, dual_profile(profile), ("chi", "dual"))
    A = U.shape.pairing(0, U.ring, U.level)
    return PairingMaps(source, target, GradedHom((A,) * U.shape.r))


def pairing_is_skew(shape: Shape, ring: BaseRing, n: int) -> bool:
    """J_{s+r/2} = -J_s^T for every slot."""
    half = shape.r // 2
    return all(
        shape.pairing(s + half, ring, n) == L.neg(L.transpose(shape.pairing(s, ring, n))) for s in range(shape.r)
    )
