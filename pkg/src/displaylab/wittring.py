"""Truncated p-typical Witt vectors over characteristic-p base rings.

Two arithmetic routes exist and are kept independent:

* over finite fields, W_n(F_q) is identified with the Galois ring
  Z/p^n[xi]/(f~) through x -> sum p^i [x_i^(p^-i)], and ring operations happen
  there;
* over every other base ring the universal sum/product polynomials (computed
  over the integers from the ghost recursion, then reduced mod p) are
  evaluated on the components.

Tests compare the two routes against each other and against the ghost map.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import flint

from .errors import (
    LengthMismatch,
    LengthTooShort,
    LevelTooLarge,
    NotAUnit,
    NotInI,
    NotInIdeal,
    RingMismatch,
)
from .rings import BaseRing, DualNumbers, FiniteField, ring_from_descriptor

MAX_LEVEL = 8

# ---------------------------------------------------------------------------
# universal polynomials

_MAXV = MAX_LEVEL + 1
_CTX = flint.fmpz_mpoly_ctx.get(
    tuple([f"x{i}" for i in range(_MAXV)] + [f"y{i}" for i in range(_MAXV)]), "lex"
)
_GENS = _CTX.gens()
_X = _GENS[:_MAXV]
_Y = _GENS[_MAXV:]
_ZERO_POLY = _CTX.from_dict({})


def ghost_poly(vars_: Sequence, p: int, i: int):
    """w_i = sum_{j<=i} p^j x_j^(p^(i-j)) as a polynomial."""
    acc = _ZERO_POLY
    for j in range(i + 1):
        acc = acc + p**j * vars_[j] ** (p ** (i - j))
    return acc


class _PolyTable:
    """Per-prime, incrementally extended lists of S_i, P_i, Phi_i."""

    def __init__(self, p: int):
        self.p = p
        self.S: list = []
        self.P: list = []
        self.F: list = []
        self.lock = threading.Lock()

    def _solve(self, target, known: list, i: int):
        p = self.p
        acc = target
        for j, poly in enumerate(known):
            acc = acc - p**j * poly ** (p ** (i - j))
        for c in acc.coeffs():
            if int(c) % p**i:
                raise AssertionError("ghost recursion produced a non-integral coefficient")
        return acc / p**i

    def extend(self, n: int) -> None:
        with self.lock:
            p = self.p
            while len(self.S) < n:
                i = len(self.S)
                cached = _disk_load(p, i)
                if cached is not None:
                    s, pr, fr = cached
                else:
                    wx_i = ghost_poly(_X, p, i)
                    wy_i = ghost_poly(_Y, p, i)
                    s = self._solve(wx_i + wy_i, self.S, i)
                    pr = self._solve(wx_i * wy_i, self.P, i)
                    fr = self._solve(ghost_poly(_X, p, i + 1), self.F, i)
                    _disk_store(p, i, (s, pr, fr))
                self.S.append(s)
                self.P.append(pr)
                self.F.append(fr)


_TABLES: dict[int, _PolyTable] = {}
_TABLES_LOCK = threading.Lock()


def _table(p: int) -> _PolyTable:
    with _TABLES_LOCK:
        if p not in _TABLES:
            _TABLES[p] = _PolyTable(p)
        return _TABLES[p]


def _cache_dir() -> str | None:
    return os.environ.get("DISPLAYLAB_CACHE") or None


def _poly_to_json(poly) -> list:
    return [[list(m), int(c)] for m, c in poly.terms()]


def _poly_from_json(obj):
    return _CTX.from_dict({tuple(m): int(c) for m, c in obj})


def _disk_path(p: int, i: int) -> str | None:
    d = _cache_dir()
    if d is None:
        return None
    return os.path.join(d, f"wittpolys_p{p}_i{i}_v{_MAXV}.json")


def _disk_load(p: int, i: int):
    path = _disk_path(p, i)
    if path is None or not os.path.exists(path):
        return None
    try:
        with open(path) as fh:
            data = json.load(fh)
        return tuple(_poly_from_json(data[k]) for k in ("S", "P", "F"))
    except (OSError, ValueError, KeyError):
        return None


def _disk_store(p: int, i: int, polys) -> None:
    path = _disk_path(p, i)
    if path is None:
        return
    os.makedirs(os.path.dirname(path), exist_ok=True)
    data = {k: _poly_to_json(poly) for k, poly in zip(("S", "P", "F"), polys)}
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(data, fh)
    os.replace(tmp, path)  # write-once: concurrent writers produce identical files


@dataclass(frozen=True)
class UniversalWittPolys:
    """Integer sum, product and Frobenius polynomials up to level n.

    Variables are the generators ``x0..`` and ``y0..`` of a fixed flint context;
    ``frob[i]`` only involves ``x0..x{i+1}``.
    """

    p: int
    n: int
    sum: tuple
    prod: tuple
    frob: tuple

    @property
    def xs(self):
        return _X[: self.n]

    @property
    def ys(self):
        return _Y[: self.n]


def compute_witt_polys(p: int, n: int) -> UniversalWittPolys:
    if n > MAX_LEVEL:
        raise LevelTooLarge(f"level {n} exceeds the supported maximum {MAX_LEVEL}")
    if n < 1:
        raise ValueError("level must be positive")
    tab = _table(p)
    tab.extend(n)
    return UniversalWittPolys(p, n, tuple(tab.S[:n]), tuple(tab.P[:n]), tuple(tab.F[:n]))


@lru_cache(maxsize=None)
def _reduced_terms(p: int, kind: str, i: int) -> tuple:
    """Terms of a universal polynomial mod p as (coeff, ((var, exp), ...))."""
    polys = compute_witt_polys(p, i + 1)
    poly = {"S": polys.sum, "P": polys.prod, "F": polys.frob}[kind][i]
    out = []
    for monom, c in poly.terms():
        c = int(c) % p
        if c:
            out.append((c, tuple((v, e) for v, e in enumerate(monom) if e)))
    return tuple(out)


def _evaluate(ring: BaseRing, terms, values: Sequence) -> object:
    """Evaluate reduced terms; values are indexed like the polynomial generators."""
    powers: dict = {}

    def power(v, e):
        key = (v, e)
        if key not in powers:
            powers[key] = ring.pow(values[v], e)
        return powers[key]

    acc = ring.zero
    for c, mon in terms:
        term = ring.from_int(c)
        for v, e in mon:
            term = ring.mul(term, power(v, e))
            if ring.is_zero(term):
                break
        acc = ring.add(acc, term)
    return acc


def _poly_values(xs: Sequence, ys: Sequence, zero) -> list:
    vals = [zero] * (2 * _MAXV)
    vals[: len(xs)] = xs
    vals[_MAXV : _MAXV + len(ys)] = ys
    return vals


# ---------------------------------------------------------------------------
# Galois ring backend for W_n(F_q)


class _GaloisBackend:
    def __init__(self, k: FiniteField, n: int):
        self.k, self.n = k, n
        self.p, self.e = k.p, k.e
        self.mod = k.p**n
        self.f = k.modulus  # monic, lifted with coefficients in [0, p)
        self.one = 1 if self.e == 1 else (1,) + (0,) * (self.e - 1)
        self.zero = 0 if self.e == 1 else (0,) * self.e
        self._teich: dict[int, object] = {}
        self._to: dict[tuple, object] = {}
        self._from: dict[object, tuple] = {}

    # GR arithmetic -------------------------------------------------------
    def add(self, a, b):
        if self.e == 1:
            return (a + b) % self.mod
        return tuple((x + y) % self.mod for x, y in zip(a, b))

    def sub(self, a, b):
        if self.e == 1:
            return (a - b) % self.mod
        return tuple((x - y) % self.mod for x, y in zip(a, b))

    def neg(self, a):
        if self.e == 1:
            return (-a) % self.mod
        return tuple((-x) % self.mod for x in a)

    def mul(self, a, b):
        if self.e == 1:
            return a * b % self.mod
        e, mod, f = self.e, self.mod, self.f
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        for top in range(2 * e - 2, e - 1, -1):
            c = prod[top]
            if c:
                base = top - e
                for i in range(e):
                    prod[base + i] -= c * f[i]
        return tuple(c % mod for c in prod[:e])

    def pow(self, a, k: int):
        result = self.one
        while k:
            if k & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            k >>= 1
        return result

    def scale(self, a, c: int):
        if self.e == 1:
            return a * c % self.mod
        return tuple(x * c % self.mod for x in a)

    def residue(self, a) -> int:
        if self.e == 1:
            return a % self.p
        return self.k.encode([x % self.p for x in a])

    # conversions ---------------------------------------------------------
    def teich(self, a: int):
        t = self._teich.get(a)
        if t is None:
            if self.e == 1:
                lift = a
            else:
                lift = tuple(self.k.digits(a))
            t = self.pow(lift, self.k.q ** (self.n - 1))
            self._teich[a] = t
        return t

    def to_gr(self, comps: tuple):
        v = self._to.get(comps)
        if v is None:
            v = self.zero
            pi = 1
            for i, x in enumerate(comps):
                if x:
                    v = self.add(v, self.scale(self.teich(self.k.root_p(x, i)), pi))
                pi *= self.p
            self._to[comps] = v
            self._from.setdefault(v, comps)
        return v

    def from_gr(self, v) -> tuple:
        c = self._from.get(v)
        if c is None:
            comps = []
            a = v
            for i in range(self.n):
                r = self.residue(a)
                comps.append(self.k.pow(r, self.p**i) if self.e > 1 else r)
                a = self.sub(a, self.teich(r))
                if self.e == 1:
                    a //= self.p
                else:
                    a = tuple(x // self.p for x in a)
            c = tuple(comps)
            self._from[v] = c
            self._to.setdefault(c, v)
        return c


@lru_cache(maxsize=None)
def _backend(k: FiniteField, n: int) -> _GaloisBackend:
    return _GaloisBackend(k, n)


# ---------------------------------------------------------------------------


class WittVector:
    """Immutable length-n Witt vector ``(x_0, ..., x_{n-1})`` over ``ring``."""

    __slots__ = ("ring", "comps", "_hash")

    def __init__(self, ring: BaseRing, comps: Iterable):
        comps = tuple(comps)
        if not 1 <= len(comps) <= MAX_LEVEL + 1:
            if len(comps) > MAX_LEVEL + 1:
                raise LevelTooLarge(f"length {len(comps)} is too large")
            raise LengthTooShort("Witt vectors have length at least 1")
        self.ring = ring
        self.comps = comps
        self._hash = None

    # construction --------------------------------------------------------
    @classmethod
    def zero(cls, ring: BaseRing, n: int) -> "WittVector":
        return cls(ring, (ring.zero,) * n)

    @classmethod
    def one(cls, ring: BaseRing, n: int) -> "WittVector":
        return cls.teichmuller(ring, ring.one, n)

    @classmethod
    def teichmuller(cls, ring: BaseRing, a, n: int) -> "WittVector":
        return cls(ring, (a,) + (ring.zero,) * (n - 1))

    @classmethod
    def from_int(cls, ring: BaseRing, c: int, n: int) -> "WittVector":
        """The image of the integer c in W_n(ring)."""
        comps = ghost_inverse([c] * n, ring.p)
        return cls(ring, (ring.from_int(x) for x in comps))

    # basic protocol ----------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.comps)

    def __len__(self) -> int:
        return len(self.comps)

    def __getitem__(self, i):
        return self.comps[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, WittVector) and self.comps == other.comps and self.ring == other.ring

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ring, self.comps))
        return self._hash

    def __repr__(self) -> str:
        return f"W{self.comps}"

    def _check(self, other: "WittVector") -> None:
        if not isinstance(other, WittVector):
            raise TypeError(f"expected a WittVector, got {type(other).__name__}")
        if self.ring is not other.ring and self.ring != other.ring:
            raise RingMismatch(f"{self.ring!r} vs {other.ring!r}")
        if len(self.comps) != len(other.comps):
            raise LengthMismatch(f"lengths {self.n} and {other.n} differ")

    # arithmetic ------------------------------------------------------------
    def __add__(self, other: "WittVector") -> "WittVector":
        return witt_add(self, other)

    def __sub__(self, other: "WittVector") -> "WittVector":
        return witt_add(self, witt_neg(other))

    def __neg__(self) -> "WittVector":
        return witt_neg(self)

    def __mul__(self, other: "WittVector") -> "WittVector":
        return witt_mul(self, other)

    def is_zero(self) -> bool:
        return all(self.ring.is_zero(x) for x in self.comps)

    def is_one(self) -> bool:
        return self == WittVector.one(self.ring, self.n)

    def is_unit(self) -> bool:
        return self.ring.is_unit(self.comps[0])

    def in_I(self) -> bool:
        return self.ring.is_zero(self.comps[0])

    def inverse(self) -> "WittVector":
        return witt_inverse(self)

    def valuation(self) -> int:
        """Index of the first nonzero component; ``n`` for the zero vector."""
        for i, x in enumerate(self.comps):
            if not self.ring.is_zero(x):
                return i
        return self.n

    def truncate(self, m: int) -> "WittVector":
        if m > self.n:
            raise LengthMismatch(f"cannot truncate length {self.n} to {m}")
        return WittVector(self.ring, self.comps[:m])

    def tau(self) -> "WittVector":
        """Same-length Witt Frobenius (componentwise p-th power)."""
        return WittVector(self.ring, (self.ring.frob(x) for x in self.comps))

    def F(self) -> "WittVector":
        return frobenius(self)

    def V(self) -> "WittVector":
        return verschiebung(self)

    def Vinv(self) -> "WittVector":
        return v_inverse(self)

    def times_p(self) -> "WittVector":
        """p * x = V(F x) at the same length."""
        return WittVector(self.ring, (self.ring.zero,) + tuple(self.ring.frob(x) for x in self.comps[:-1]))

    def map(self, ring: BaseRing, fn) -> "WittVector":
        """Apply a ring homomorphism componentwise."""
        return WittVector(ring, (fn(x) for x in self.comps))

    # serialization ---------------------------------------------------------
    def to_json(self) -> dict:
        return {"ring": self.ring.descriptor(), "n": self.n, "x": [self.ring.to_json(x) for x in self.comps]}

    @classmethod
    def from_json(cls, obj: dict, ring: BaseRing | None = None) -> "WittVector":
        ring = ring or ring_from_descriptor(obj["ring"])
        comps = [ring.from_json(c) for c in obj["x"]]
        if "n" in obj and int(obj["n"]) != len(comps):
            raise LengthMismatch("declared length does not match the component list")
        return cls(ring, comps)


def witt_add(a: WittVector, b: WittVector) -> WittVector:
    a._check(b)
    ring = a.ring
    if isinstance(ring, FiniteField):
        be = _backend(ring, len(a.comps))
        return WittVector(ring, be.from_gr(be.add(be.to_gr(a.comps), be.to_gr(b.comps))))
    return WittVector(ring, _universal("S", ring, a.comps, b.comps))


def witt_mul(a: WittVector, b: WittVector) -> WittVector:
    a._check(b)
    ring = a.ring
    if isinstance(ring, FiniteField):
        be = _backend(ring, len(a.comps))
        return WittVector(ring, be.from_gr(be.mul(be.to_gr(a.comps), be.to_gr(b.comps))))
    return WittVector(ring, _universal("P", ring, a.comps, b.comps))


@lru_cache(maxsize=1 << 18)
def _universal(kind: str, ring: BaseRing, xs: tuple, ys: tuple) -> tuple:
    vals = _poly_values(xs, ys, ring.zero)
    return tuple(_evaluate(ring, _reduced_terms(ring.p, kind, i), vals) for i in range(len(xs)))


def witt_neg(a: WittVector) -> WittVector:
    # valid for odd p: [-1] = -1 and negation is componentwise
    return WittVector(a.ring, (a.ring.neg(x) for x in a.comps))


def witt_sub(a: WittVector, b: WittVector) -> WittVector:
    return witt_add(a, witt_neg(b))


def witt_pow(a: WittVector, k: int) -> WittVector:
    result = WittVector.one(a.ring, a.n)
    while k:
        if k & 1:
            result = result * a
        a = a * a
        k >>= 1
    return result


def witt_inverse(a: WittVector) -> WittVector:
    """Inverse of a unit by Newton iteration from the Teichmueller inverse."""
    ring = a.ring
    if not ring.is_unit(a.comps[0]):
        raise NotAUnit(f"{a} is not a unit")
    two = WittVector.from_int(ring, 2, a.n)
    y = WittVector.teichmuller(ring, ring.inv(a.comps[0]), a.n)
    one = WittVector.one(ring, a.n)
    for _ in range(a.n.bit_length() + 2):
        if a * y == one:
            return y
        y = y * (two - a * y)
    assert a * y == one
    return y


def frobenius(a: WittVector) -> WittVector:
    """F_n : W_{n+1} -> W_n, componentwise p-th power and drop the last slot."""
    if a.n < 2:
        raise LengthTooShort("F lowers the length; a length-1 vector has no image")
    return WittVector(a.ring, (a.ring.frob(x) for x in a.comps[:-1]))


def frobenius_universal(a: WittVector) -> WittVector:
    """F_n evaluated through the universal Frobenius polynomials (reference route)."""
    if a.n < 2:
        raise LengthTooShort("F lowers the length; a length-1 vector has no image")
    ring = a.ring
    vals = _poly_values(a.comps, (), ring.zero)
    return WittVector(ring, (_evaluate(ring, _reduced_terms(ring.p, "F", i), vals) for i in range(a.n - 1)))


def verschiebung(a: WittVector) -> WittVector:
    return WittVector(a.ring, (a.ring.zero,) + a.comps)


def v_inverse(a: WittVector) -> WittVector:
    if not a.ring.is_zero(a.comps[0]):
        raise NotInI(f"{a} does not lie in I")
    if a.n < 2:
        raise LengthTooShort("V^-1 of a length-1 vector is empty")
    return WittVector(a.ring, a.comps[1:])


def witt_universal_add(a: WittVector, b: WittVector) -> WittVector:
    """Sum via universal polynomials regardless of the base ring (reference route)."""
    a._check(b)
    vals = _poly_values(a.comps, b.comps, a.ring.zero)
    return WittVector(a.ring, (_evaluate(a.ring, _reduced_terms(a.ring.p, "S", i), vals) for i in range(a.n)))


def witt_universal_mul(a: WittVector, b: WittVector) -> WittVector:
    a._check(b)
    vals = _poly_values(a.comps, b.comps, a.ring.zero)
    return WittVector(a.ring, (_evaluate(a.ring, _reduced_terms(a.ring.p, "P", i), vals) for i in range(a.n)))


# ---------------------------------------------------------------------------
# ghost map over integer lifts (cross-validation only)


def ghost(comps: Sequence[int], p: int) -> list[int]:
    return [sum(p**j * comps[j] ** (p ** (i - j)) for j in range(i + 1)) for i in range(len(comps))]


def ghost_inverse(ws: Sequence[int], p: int) -> list[int]:
    """Integer components with the given ghost vector; division asserted exact."""
    comps: list[int] = []
    for i, w in enumerate(ws):
        acc = w - sum(p**j * comps[j] ** (p ** (i - j)) for j in range(i))
        q, r = divmod(acc, p**i)
        if r:
            raise ValueError("ghost vector is not integral")
        comps.append(q)
    return comps


def integer_witt_add(x: Sequence[int], y: Sequence[int], p: int) -> list[int]:
    """Evaluate the integer universal sum polynomials at integer points."""
    return _integer_eval("S", x, y, p)


def integer_witt_mul(x: Sequence[int], y: Sequence[int], p: int) -> list[int]:
    return _integer_eval("P", x, y, p)


def _integer_eval(kind: str, x, y, p) -> list[int]:
    n = len(x)
    polys = compute_witt_polys(p, n)
    seq = polys.sum if kind == "S" else polys.prod
    point = list(x) + [0] * (_MAXV - n) + list(y) + [0] * (_MAXV - n)
    return [int(poly(*point)) for poly in seq]


# ---------------------------------------------------------------------------
# Norman splitting over dual numbers


def norman_split(a: WittVector) -> tuple[object, WittVector]:
    """Split a in W_n(eps R) as iota(a_0) + (0, a_1, ..., a_{n-1}).

    Sums in W_n(eps R) are componentwise since all products of components
    vanish, so the decomposition is exact and canonical.
    """
    ring = a.ring
    if not isinstance(ring, DualNumbers):
        raise NotInIdeal("the Norman splitting is implemented for dual numbers")
    if not all(ring.in_eps_ideal(x) for x in a.comps):
        raise NotInIdeal(f"{a} does not lie in W_n(eps R)")
    return a.comps[0], WittVector(ring, (ring.zero,) + a.comps[1:])


def norman_combine(linear, rest: WittVector) -> WittVector:
    ring = rest.ring
    return WittVector.teichmuller(ring, linear, rest.n) + rest
