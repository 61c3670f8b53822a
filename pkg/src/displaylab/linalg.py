"""Matrices over W_n(R) as tuples of tuples of WittVectors.

Determinants and characteristic polynomials use the division-free Berkowitz
recursion, so they are valid over any commutative base.
"""

from __future__ import annotations

from typing import Callable, Sequence

from .errors import NotAUnit, ShapeMismatch
from .rings import BaseRing
from .wittring import WittVector

Matrix = tuple  # tuple[tuple[WittVector, ...], ...]


def matrix(rows: Sequence[Sequence[WittVector]]) -> Matrix:
    return tuple(tuple(r) for r in rows)


def size(m: Matrix) -> tuple[int, int]:
    return len(m), (len(m[0]) if m else 0)


def level(m: Matrix) -> int:
    return m[0][0].n


def ring_of(m: Matrix) -> BaseRing:
    return m[0][0].ring


def identity(ring: BaseRing, n: int, h: int) -> Matrix:
    one, zero = WittVector.one(ring, n), WittVector.zero(ring, n)
    return tuple(tuple(one if i == j else zero for j in range(h)) for i in range(h))


def zeros(ring: BaseRing, n: int, rows: int, cols: int) -> Matrix:
    zero = WittVector.zero(ring, n)
    return tuple(tuple(zero for _ in range(cols)) for _ in range(rows))


def from_ints(ring: BaseRing, n: int, rows: Sequence[Sequence[int]]) -> Matrix:
    return tuple(tuple(WittVector.from_int(ring, c, n) for c in r) for r in rows)


def teichmuller_matrix(ring: BaseRing, n: int, rows) -> Matrix:
    return tuple(tuple(WittVector.teichmuller(ring, a, n) for a in r) for r in rows)


def diagonal(entries: Sequence[WittVector]) -> Matrix:
    h = len(entries)
    zero = WittVector.zero(entries[0].ring, entries[0].n)
    return tuple(tuple(entries[i] if i == j else zero for j in range(h)) for i in range(h))


def mmap(m: Matrix, fn: Callable[[WittVector], WittVector]) -> Matrix:
    return tuple(tuple(fn(x) for x in row) for row in m)


def add(a: Matrix, b: Matrix) -> Matrix:
    if size(a) != size(b):
        raise ShapeMismatch(f"{size(a)} vs {size(b)}")
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def sub(a: Matrix, b: Matrix) -> Matrix:
    if size(a) != size(b):
        raise ShapeMismatch(f"{size(a)} vs {size(b)}")
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def neg(a: Matrix) -> Matrix:
    return mmap(a, lambda x: -x)


def scale(c: WittVector, a: Matrix) -> Matrix:
    return mmap(a, lambda x: c * x)


def mul(a: Matrix, b: Matrix) -> Matrix:
    ra, ca = size(a)
    rb, cb = size(b)
    if ca != rb:
        raise ShapeMismatch(f"cannot multiply {ra}x{ca} by {rb}x{cb}")
    cols = list(zip(*b))
    out = []
    for row in a:
        new_row = []
        for col in cols:
            acc = row[0] * col[0]
            for x, y in zip(row[1:], col[1:]):
                acc = acc + x * y
            new_row.append(acc)
        out.append(tuple(new_row))
    return tuple(out)


def mul_all(*ms: Matrix) -> Matrix:
    out = ms[0]
    for m in ms[1:]:
        out = mul(out, m)
    return out


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def mat_vec(a: Matrix, v: Sequence[WittVector]) -> tuple:
    return tuple(col[0] for col in mul(a, tuple((x,) for x in v)))


def tau(a: Matrix) -> Matrix:
    """Entrywise same-length Witt Frobenius."""
    return mmap(a, WittVector.tau)


def tau_power(a: Matrix, k: int) -> Matrix:
    for _ in range(k):
        a = tau(a)
    return a


def truncate(a: Matrix, m: int) -> Matrix:
    return mmap(a, lambda x: x.truncate(m))


def times_p_power(a: Matrix, k: int) -> Matrix:
    for _ in range(k):
        a = mmap(a, WittVector.times_p)
    return a


def is_zero(a: Matrix) -> bool:
    return all(x.is_zero() for row in a for x in row)


def block(a: Matrix, rows: range, cols: range) -> Matrix:
    return tuple(tuple(a[i][j] for j in cols) for i in rows)


def from_blocks(A: Matrix, B: Matrix, C: Matrix, D: Matrix) -> Matrix:
    """Assemble (A B; C D); empty blocks are given as tuples of empty rows."""
    top = tuple(tuple(ra) + tuple(rb) for ra, rb in zip(A, B))
    bottom = tuple(tuple(rc) + tuple(rd) for rc, rd in zip(C, D))
    return top + bottom


def kron(a: Matrix, b: Matrix) -> Matrix:
    ra, ca = size(a)
    rb, cb = size(b)
    return tuple(
        tuple(a[i // rb][j // cb] * b[i % rb][j % cb] for j in range(ca * cb)) for i in range(ra * rb)
    )


# ---------------------------------------------------------------------------


def charpoly(a: Matrix) -> list[WittVector]:
    """Coefficients of det(x*1 - a), highest degree first (Berkowitz)."""
    h, w = size(a)
    if h != w:
        raise ShapeMismatch("characteristic polynomial of a non-square matrix")
    ring, n = ring_of(a), level(a)
    one, zero = WittVector.one(ring, n), WittVector.zero(ring, n)
    vect = [one, -a[0][0]]
    for r in range(1, h):
        lead = tuple(tuple(a[i][j] for j in range(r)) for i in range(r))
        row = tuple(a[r][j] for j in range(r))
        col = [a[i][r] for i in range(r)]
        t = [one, -a[r][r]]
        v = col
        for _ in range(r):
            dot = zero
            for x, y in zip(row, v):
                dot = dot + x * y
            t.append(-dot)
            v = list(mat_vec(lead, v))
        new = []
        for i in range(r + 2):
            acc = zero
            for j in range(min(i, r) + 1):
                if i - j < len(t):
                    acc = acc + t[i - j] * vect[j]
            new.append(acc)
        vect = new
    return vect


def det(a: Matrix) -> WittVector:
    h = size(a)[0]
    c = charpoly(a)[-1]
    return c if h % 2 == 0 else -c


def is_invertible(a: Matrix) -> bool:
    return det(a).is_unit()


def inverse(a: Matrix) -> Matrix:
    """Inverse via Cayley-Hamilton; requires a unit determinant."""
    h = size(a)[0]
    ring, n = ring_of(a), level(a)
    cp = charpoly(a)
    last = cp[-1]
    if not last.is_unit():
        raise NotAUnit("matrix is not invertible")
    # a^{h-1} + c_1 a^{h-2} + ... + c_{h-1} = -c_h a^{-1}
    acc = identity(ring, n, h)
    for c in cp[1:-1]:
        acc = add(mul(acc, a), scale(c, identity(ring, n, h)))
    return scale(-last.inverse(), acc)


def to_json(a: Matrix) -> list:
    return [[[x.ring.to_json(c) for c in x.comps] for x in row] for row in a]


def from_json(obj, ring: BaseRing) -> Matrix:
    return tuple(tuple(WittVector(ring, [ring.from_json(c) for c in entry]) for entry in row) for row in obj)
