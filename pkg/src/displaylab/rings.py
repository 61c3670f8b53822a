"""Small characteristic-p base rings: finite fields, polynomial rings, their
localizations at a single element, and dual numbers.

Elements are plain hashable Python values so that Witt vectors over them can be
compared and cached cheaply:

* ``FiniteField``: an int ``a = sum c_i p**i`` encoding the residue class of
  ``sum c_i x**i`` modulo the defining polynomial.
* ``Poly``: a tuple of field elements (low degree first, no trailing zeros).
* ``LocalizedPoly``: a pair ``(numerator, k)`` meaning ``numerator / h**k`` with
  ``k`` minimal.
* ``DualNumbers``: a pair ``(a, b)`` meaning ``a + b*eps``.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Any, Iterator

from .errors import NotAUnit, RingMismatch

_TABLE_LIMIT = 1024


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


# ---------------------------------------------------------------------------
# dense polynomials over F_p given as lists of ints, low degree first


def _fp_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _fp_trim([c % p for c in out])


def _fp_mod(a, m, p):
    a = _fp_trim([c % p for c in a])
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) - 1 >= dm and a:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
        _fp_trim(a)
    return a


def _fp_sub(a, b, p):
    n = max(len(a), len(b))
    return _fp_trim([((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)])


def _fp_gcd(a, b, p):
    a, b = _fp_trim(list(a)), _fp_trim(list(b))
    while b:
        a, b = b, _fp_mod(a, b, p)
    return a


def _fp_powmod(base, k, m, p):
    result = [1]
    base = _fp_mod(base, m, p)
    while k:
        if k & 1:
            result = _fp_mod(_fp_mul(result, base, p), m, p)
        base = _fp_mod(_fp_mul(base, base, p), m, p)
        k >>= 1
    return result


def _fp_is_irreducible(f, p) -> bool:
    """Rabin-style test: no common factor with x^(p^i) - x for i <= deg/2."""
    e = len(f) - 1
    if e == 1:
        return True
    x = [0, 1]
    xp = x
    for _ in range(e // 2):
        xp = _fp_powmod(xp, p, f, p)
        g = _fp_gcd(f, _fp_sub(xp, x, p), p)
        if len(g) > 1:
            return False
    return True


@lru_cache(maxsize=None)
def smallest_irreducible(p: int, e: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree e over F_p.

    Candidates are ordered by their coefficient tuple (c_0, ..., c_{e-1}).
    """
    if e == 1:
        return (0, 1)
    for coeffs in itertools.product(range(p), repeat=e):
        if coeffs[0] == 0:
            continue
        f = list(coeffs) + [1]
        if _fp_is_irreducible(f, p):
            return tuple(f)
    raise AssertionError("no irreducible polynomial found")


# ---------------------------------------------------------------------------


class BaseRing:
    """Common interface; subclasses fix the element representation."""

    p: int
    e: int
    variant: str

    # identity -----------------------------------------------------------
    def key(self) -> tuple:
        raise NotImplementedError

    def _cached_key(self) -> tuple:
        k = self.__dict__.get("_key")
        if k is None:
            k = self.__dict__["_key"] = self.key()
            self.__dict__["_hash"] = hash(k)
        return k

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return isinstance(other, BaseRing) and self._cached_key() == other._cached_key()

    def __hash__(self) -> int:
        self._cached_key()
        return self.__dict__["_hash"]

    def __repr__(self) -> str:
        return f"{type(self).__name__}{self.key()[1:]}"

    def check_same(self, other: "BaseRing") -> None:
        if self != other:
            raise RingMismatch(f"{self!r} vs {other!r}")

    # arithmetic -----------------------------------------------------------
    zero: Any
    one: Any

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        raise NotImplementedError

    def from_int(self, c: int):
        raise NotImplementedError

    def is_zero(self, a) -> bool:
        return a == self.zero

    def is_unit(self, a) -> bool:
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def pow(self, a, k: int):
        result = self.one
        while k:
            if k & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            k >>= 1
        return result

    def frob(self, a):
        """Absolute Frobenius a -> a^p."""
        return self.pow(a, self.p)

    # misc -----------------------------------------------------------------
    @property
    def is_finite_field(self) -> bool:
        return False

    def random(self, rng):
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    def to_json(self, a):
        raise NotImplementedError

    def from_json(self, obj):
        raise NotImplementedError


class FiniteField(BaseRing):
    variant = "FiniteField"

    def __init__(self, p: int, e: int = 1):
        if not (is_prime(p) and p % 2 == 1 and 3 <= p <= 97):
            raise ValueError(f"p must be an odd prime in [3, 97], got {p}")
        if e < 1:
            raise ValueError("extension degree must be positive")
        self.p, self.e = p, e
        self.q = p**e
        self.modulus = smallest_irreducible(p, e)
        self.zero, self.one = 0, 1
        self._tables = self.q <= _TABLE_LIMIT and e > 1
        if self._tables:
            self._build_tables()

    def key(self):
        return ("FF", self.p, self.e)

    @property
    def is_finite_field(self) -> bool:
        return True

    # encoding ---------------------------------------------------------------
    def digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.e):
            a, r = divmod(a, self.p)
            out.append(r)
        return out

    def encode(self, digits) -> int:
        a = 0
        for c in reversed(list(digits)[: self.e]):
            a = a * self.p + (c % self.p)
        return a

    def _poly_mul(self, a: int, b: int) -> int:
        prod = _fp_mul(self.digits(a), self.digits(b), self.p)
        return self.encode(_fp_mod(prod, list(self.modulus), self.p))

    def _build_tables(self):
        q, p = self.q, self.p
        digs = [self.digits(a) for a in range(q)]
        self._add = [[self.encode([(x + y) % p for x, y in zip(digs[a], digs[b])]) for b in range(q)] for a in range(q)]
        self._neg = [self.encode([(-x) % p for x in digs[a]]) for a in range(q)]
        gen = None
        for g in range(2, q):
            seen, x = 1, g
            while x != 1:
                x = self._poly_mul(x, g)
                seen += 1
            if seen == q - 1:
                gen = g
                break
        if gen is None:  # only for q == 2, excluded since p is odd
            gen = 1
        self._exp = [1] * (q - 1)
        for i in range(1, q - 1):
            self._exp[i] = self._poly_mul(self._exp[i - 1], gen)
        self._log = [0] * q
        for i, v in enumerate(self._exp):
            self._log[v] = i

    # arithmetic -------------------------------------------------------------
    def add(self, a, b):
        if self.e == 1:
            return (a + b) % self.p
        if self._tables:
            return self._add[a][b]
        return self.encode([x + y for x, y in zip(self.digits(a), self.digits(b))])

    def neg(self, a):
        if self.e == 1:
            return (-a) % self.p
        if self._tables:
            return self._neg[a]
        return self.encode([-x for x in self.digits(a)])

    def sub(self, a, b):
        if self.e == 1:
            return (a - b) % self.p
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.e == 1:
            return a * b % self.p
        if a == 0 or b == 0:
            return 0
        if self._tables:
            return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]
        return self._poly_mul(a, b)

    def pow(self, a, k: int):
        if self.e == 1:
            return pow(a, k, self.p)
        if a == 0:
            return 1 if k == 0 else 0
        if self._tables:
            return self._exp[(self._log[a] * k) % (self.q - 1)]
        return super().pow(a, k % (self.q - 1) if k > 0 else k)

    def from_int(self, c: int):
        return c % self.p

    def is_unit(self, a) -> bool:
        return a != 0

    def inv(self, a):
        if a == 0:
            raise NotAUnit("zero is not invertible")
        if self.e == 1:
            return pow(a, self.p - 2, self.p)
        return self.pow(a, self.q - 2)

    def root_p(self, a, i: int = 1):
        """The unique b with b^(p^i) = a."""
        return self.pow(a, self.p ** ((-i) % self.e)) if self.e > 1 else a

    def elements(self) -> Iterator[int]:
        return iter(range(self.q))

    def random(self, rng):
        return int(rng.integers(0, self.q))

    def random_unit(self, rng):
        return int(rng.integers(1, self.q))

    def embed_from(self, sub: "FiniteField", a: int) -> int:
        """Image of a under the deterministic embedding sub -> self."""
        if sub == self:
            return a
        if sub.p != self.p or self.e % sub.e != 0:
            raise RingMismatch(f"{sub!r} does not embed into {self!r}")
        if sub.e == 1:
            return a
        root = _embedding_root(self, sub)
        out, power = 0, 1
        for c in sub.digits(a):
            out = self.add(out, self.mul(self.from_int(c), power))
            power = self.mul(power, root)
        return out

    def descriptor(self) -> dict:
        return {"p": self.p, "variant": self.variant, "e": self.e, "modulus": list(self.modulus)}

    def to_json(self, a):
        return _fp_trim(self.digits(a))

    def from_json(self, obj):
        if isinstance(obj, int):
            return obj % self.p if self.e == 1 else self.encode([obj])
        return self.encode(list(obj) + [0] * (self.e - len(obj)))


@lru_cache(maxsize=None)
def _embedding_root(big: FiniteField, sub: FiniteField) -> int:
    """Smallest root in ``big`` of the defining polynomial of ``sub``."""
    for cand in big.elements():
        acc, power = 0, 1
        for c in sub.modulus:
            acc = big.add(acc, big.mul(big.from_int(c), power))
            power = big.mul(power, cand)
        if acc == 0:
            return cand
    raise AssertionError("defining polynomial has no root")


@lru_cache(maxsize=None)
def GF(p: int, e: int = 1) -> FiniteField:
    return FiniteField(p, e)


# ---------------------------------------------------------------------------
# univariate polynomials over a finite field (tuples of field elements)


class _FieldPolys:
    def __init__(self, k: FiniteField):
        self.k = k

    def trim(self, a) -> tuple:
        a = list(a)
        while a and a[-1] == 0:
            a.pop()
        return tuple(a)

    def add(self, a, b):
        k = self.k
        n = max(len(a), len(b))
        return self.trim(k.add(a[i] if i < len(a) else 0, b[i] if i < len(b) else 0) for i in range(n))

    def neg(self, a):
        return tuple(self.k.neg(c) for c in a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if not a or not b:
            return ()
        k = self.k
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[i + j] = k.add(out[i + j], k.mul(x, y))
        return self.trim(out)

    def scale(self, c, a):
        return self.trim(self.k.mul(c, x) for x in a)

    def divmod(self, a, b):
        k = self.k
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        a = list(a)
        inv_lead = k.inv(b[-1])
        qd = len(a) - len(b)
        if qd < 0:
            return (), self.trim(a)
        quot = [0] * (qd + 1)
        for shift in range(qd, -1, -1):
            c = k.mul(a[shift + len(b) - 1], inv_lead)
            quot[shift] = c
            if c:
                for i, bc in enumerate(b):
                    a[shift + i] = k.sub(a[shift + i], k.mul(c, bc))
        return self.trim(quot), self.trim(a)

    def gcd(self, a, b):
        a, b = self.trim(a), self.trim(b)
        while b:
            a, b = b, self.divmod(a, b)[1]
        return self.monic(a)

    def monic(self, a):
        if not a:
            return a
        return self.scale(self.k.inv(a[-1]), a)

    def evaluate(self, a, x):
        k = self.k
        acc = 0
        for c in reversed(a):
            acc = k.add(k.mul(acc, x), c)
        return acc

    def pow(self, a, n: int):
        result = (1,)
        while n:
            if n & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            n >>= 1
        return result


class Poly(BaseRing):
    """F_{p^e}[t]."""

    variant = "Poly"

    def __new__(cls, p: int, e: int = 1):
        return _poly_instance(cls, p, e)

    def __init__(self, p: int, e: int = 1):
        self.k = GF(p, e)
        self.p, self.e = p, e
        self.P = _FieldPolys(self.k)
        self.zero, self.one = (), (1,)

    def key(self):
        return ("Poly", self.p, self.e)

    def add(self, a, b):
        return self.P.add(a, b)

    def neg(self, a):
        return self.P.neg(a)

    def mul(self, a, b):
        return self.P.mul(a, b)

    def from_int(self, c):
        return self.P.trim((c % self.p,))

    def is_unit(self, a):
        return len(a) == 1

    def inv(self, a):
        if len(a) != 1:
            raise NotAUnit(f"{a} is not a unit of F_q[t]")
        return (self.k.inv(a[0]),)

    def frob(self, a):
        k = self.k
        out = [0] * ((len(a) - 1) * self.p + 1) if a else []
        for i, c in enumerate(a):
            out[i * self.p] = k.frob(c)
        return self.P.trim(out)

    def const(self, c):
        return self.P.trim((c,))

    def t(self):
        return (0, 1)

    def evaluate(self, a, x, field: FiniteField | None = None):
        """Evaluate at x in ``field`` (an extension of the coefficient field)."""
        field = field or self.k
        acc = 0
        for c in reversed(a):
            acc = field.add(field.mul(acc, x), field.embed_from(self.k, c))
        return acc

    def random(self, rng, degree: int = 2):
        return self.P.trim(self.k.random(rng) for _ in range(degree + 1))

    def descriptor(self):
        return {"p": self.p, "variant": self.variant, "e": self.e, "modulus": list(self.k.modulus)}

    def to_json(self, a):
        if self.e == 1:
            return list(a)
        return [self.k.to_json(c) for c in a]

    def from_json(self, obj):
        return self.P.trim(self.k.from_json(c) for c in obj)


class LocalizedPoly(BaseRing):
    """F_{p^e}[t][1/h] with elements g/h^k, k minimal."""

    variant = "LocalizedPoly"

    def __init__(self, p: int, e: int, h):
        self.k = GF(p, e)
        self.p, self.e = p, e
        self.P = _FieldPolys(self.k)
        h = self.P.trim(h)
        if len(h) < 2:
            raise ValueError("h must be a non-constant polynomial")
        self.h = self.P.monic(h)
        self.zero, self.one = ((), 0), ((1,), 0)

    def key(self):
        return ("Loc", self.p, self.e, self.h)

    def normalize(self, num, k: int):
        num = self.P.trim(num)
        if not num:
            return ((), 0)
        while k > 0:
            quot, rem = self.P.divmod(num, self.h)
            if rem:
                break
            num, k = quot, k - 1
        if k < 0:
            num, k = self.P.mul(num, self.P.pow(self.h, -k)), 0
        return (num, k)

    def add(self, a, b):
        (na, ka), (nb, kb) = a, b
        k = max(ka, kb)
        na = self.P.mul(na, self.P.pow(self.h, k - ka))
        nb = self.P.mul(nb, self.P.pow(self.h, k - kb))
        return self.normalize(self.P.add(na, nb), k)

    def neg(self, a):
        return (self.P.neg(a[0]), a[1])

    def mul(self, a, b):
        return self.normalize(self.P.mul(a[0], b[0]), a[1] + b[1])

    def from_int(self, c):
        return self.normalize((c % self.p,), 0)

    def from_poly(self, g, k: int = 0):
        return self.normalize(g, k)

    def _unit_cofactor(self, num):
        """Return (m, g) with num * g = c * h^m for a constant c, or None."""
        rest, m = num, 0
        while True:
            d = self.P.gcd(rest, self.h)
            if len(d) <= 1:
                break
            rest = self.P.divmod(rest, d)[0]
        if len(rest) != 1:
            return None
        # num divides c * h^m once m >= deg(num)
        m = len(num) - 1
        hm = self.P.pow(self.h, m)
        g, r = self.P.divmod(hm, num)
        assert not r
        return m, g

    def is_unit(self, a):
        return bool(a[0]) and self._unit_cofactor(a[0]) is not None

    def inv(self, a):
        num, k = a
        if not num:
            raise NotAUnit("zero is not invertible")
        res = self._unit_cofactor(num)
        if res is None:
            raise NotAUnit(f"{a} is not a unit")
        m, g = res
        # 1/(num/h^k) = h^k / num = h^k * g / h^m
        return self.normalize(self.P.mul(g, self.P.pow(self.h, k)), m)

    def frob(self, a):
        num, k = a
        k1 = self.k
        out = [0] * ((len(num) - 1) * self.p + 1) if num else []
        for i, c in enumerate(num):
            out[i * self.p] = k1.frob(c)
        # (g / h^k)^p = g^p / h^(kp) and g^p is computed coefficientwise
        return self.normalize(out, k * self.p)

    def evaluate(self, a, x, field: FiniteField | None = None):
        field = field or self.k
        poly = Poly(self.p, self.e)
        hv = poly.evaluate(self.h, x, field)
        if hv == 0 and a[1] > 0:
            raise ZeroDivisionError("evaluation at a zero of h")
        num = poly.evaluate(a[0], x, field)
        return field.mul(num, field.inv(field.pow(hv, a[1]))) if a[1] else num

    def random(self, rng, degree: int = 2):
        num = self.P.trim(self.k.random(rng) for _ in range(degree + 1))
        return self.normalize(num, int(rng.integers(0, 2)))

    def descriptor(self):
        return {
            "p": self.p,
            "variant": self.variant,
            "e": self.e,
            "modulus": list(self.k.modulus),
            "h": Poly(self.p, self.e).to_json(self.h),
        }

    def to_json(self, a):
        return {"num": Poly(self.p, self.e).to_json(a[0]), "k": a[1]}

    def from_json(self, obj):
        return self.normalize(Poly(self.p, self.e).from_json(obj["num"]), int(obj["k"]))


class DualNumbers(BaseRing):
    """k[eps]/(eps^2) over k = F_{p^e}."""

    variant = "DualNumbers"

    def __new__(cls, p: int, e: int = 1):
        return _dual_instance(cls, p, e)

    def __init__(self, p: int, e: int = 1):
        self.k = GF(p, e)
        self.p, self.e = p, e
        self.zero, self.one = (0, 0), (1, 0)

    def key(self):
        return ("Dual", self.p, self.e)

    def add(self, a, b):
        k = self.k
        return (k.add(a[0], b[0]), k.add(a[1], b[1]))

    def neg(self, a):
        return (self.k.neg(a[0]), self.k.neg(a[1]))

    def mul(self, a, b):
        k = self.k
        return (k.mul(a[0], b[0]), k.add(k.mul(a[0], b[1]), k.mul(a[1], b[0])))

    def from_int(self, c):
        return (c % self.p, 0)

    def is_unit(self, a):
        return a[0] != 0

    def inv(self, a):
        k = self.k
        if a[0] == 0:
            raise NotAUnit(f"{a} is not a unit")
        i0 = k.inv(a[0])
        return (i0, k.neg(k.mul(a[1], k.mul(i0, i0))))

    def frob(self, a):
        return (self.k.frob(a[0]), 0)

    def eps(self, b=1):
        return (0, b)

    def in_eps_ideal(self, a) -> bool:
        return a[0] == 0

    def reduce(self, a):
        return a[0]

    def lift(self, a):
        return (a, 0)

    def elements(self):
        return ((a, b) for a in range(self.k.q) for b in range(self.k.q))

    def random(self, rng):
        return (self.k.random(rng), self.k.random(rng))

    def descriptor(self):
        return {"p": self.p, "variant": self.variant, "e": self.e, "modulus": list(self.k.modulus)}

    def to_json(self, a):
        if self.e == 1:
            return _fp_trim([a[0], a[1]])
        out = [self.k.to_json(a[0]), self.k.to_json(a[1])]
        while out and not out[-1]:
            out.pop()
        return out

    def from_json(self, obj):
        obj = list(obj) + [0] * (2 - len(obj))
        return (self.k.from_json(obj[0]), self.k.from_json(obj[1]))


@lru_cache(maxsize=None)
def _dual_instance(cls, p, e):
    return object.__new__(cls)


@lru_cache(maxsize=None)
def _poly_instance(cls, p, e):
    return object.__new__(cls)


def ring_from_descriptor(desc: dict) -> BaseRing:
    p, e, variant = int(desc["p"]), int(desc.get("e", 1)), desc["variant"]
    if variant == "FiniteField":
        ring: BaseRing = GF(p, e)
    elif variant == "Poly":
        ring = Poly(p, e)
    elif variant == "LocalizedPoly":
        ring = LocalizedPoly(p, e, Poly(p, e).from_json(desc["h"]))
    elif variant == "DualNumbers":
        ring = DualNumbers(p, e)
    else:
        raise ValueError(f"unknown ring variant {variant!r}")
    if "modulus" in desc and tuple(desc["modulus"]) != smallest_irreducible(p, e):
        raise ValueError("ring descriptor uses a non-canonical modulus")
    return ring


def parse_ring(spec: str) -> BaseRing:
    """Parse the CLI ring syntax: ``3``, ``3^2``, ``3^2[t]``, ``3[eps]``."""
    spec = spec.strip()
    suffix = ""
    if "[" in spec:
        spec, suffix = spec.split("[", 1)
        suffix = suffix.rstrip("]")
    if "^" in spec:
        p_s, e_s = spec.split("^", 1)
    else:
        p_s, e_s = spec, "1"
    p, e = int(p_s), int(e_s)
    if suffix == "":
        return GF(p, e)
    if suffix == "t":
        return Poly(p, e)
    if suffix in ("eps", "e"):
        return DualNumbers(p, e)
    raise ValueError(f"unknown ring suffix [{suffix}]")
