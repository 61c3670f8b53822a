"""Random generators shared by the test modules."""

from __future__ import annotations

import numpy as np

from displaylab import linalg as L
from displaylab.display import Display, ParabolicElement, Shape
from displaylab.wittring import WittVector


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_witt(ring, n: int, gen, in_I: bool = False) -> WittVector:
    comps = [ring.random(gen) for _ in range(n)]
    if in_I:
        comps[0] = ring.zero
    return WittVector(ring, comps)


def random_matrix(ring, n: int, h: int, gen, cols: int | None = None):
    return tuple(tuple(random_witt(ring, n, gen) for _ in range(cols or h)) for _ in range(h))


def random_gl(ring, n: int, h: int, gen):
    while True:
        m = random_matrix(ring, n, h, gen)
        if L.is_invertible(m):
            return m


def random_display(shape: Shape, ring, n: int, gen) -> Display:
    return Display(shape, ring, n, tuple(random_gl(ring, n, shape.h, gen) for _ in range(shape.r)))


def random_parabolic_slot(ring, n: int, h: int, d: int, gen):
    """Invertible level-n matrix with the B block (rows < d, cols >= d) in I."""
    while True:
        m = [[random_witt(ring, n, gen, in_I=(i < d <= j)) for j in range(h)] for i in range(h)]
        m = tuple(map(tuple, m))
        if L.is_invertible(m):
            return m


def random_parabolic(shape: Shape, ring, n: int, gen) -> ParabolicElement:
    """A parabolic element acting on level-n displays (its entries have length n + 1)."""
    ks = tuple(random_parabolic_slot(ring, n + 1, shape.h, shape.d(s), gen) for s in range(shape.r))
    return ParabolicElement(shape, ring, n, ks)


# -- multidegrees and gauges -------------------------------------------------


def random_multidegree(r: int, gen, spread: int = 2):
    """Rejection-sample a valid period-r multidegree with d(w) - w <= spread."""
    from displaylab.flex import Multidegree

    while True:
        d = Multidegree(r, tuple(w + int(gen.integers(0, spread + 1)) for w in range(r)))
        if d.is_valid():
            return d


def fibre(D, sigma: int) -> list[int]:
    return [w for w in range(sigma - D.size, sigma + 1) if D(w) == sigma]


def _fill_cuts(D, sigmas, a, b, gen, j: dict) -> None:
    """Put each cut l in [a_s, b_s - 1] on exactly one fibre index, the rest outside."""
    R = D.r
    for s in sigmas:
        fib = fibre(D, s)
        cuts = list(range(a[s % R], b[s % R]))
        perm = gen.permutation(len(fib))
        for pos, idx in enumerate(perm):
            w = fib[int(idx)] % R
            if pos < len(cuts):
                j[w] = cuts[pos]
            elif gen.integers(0, 2):
                j[w] = b[s % R] + int(gen.integers(0, 3))
            else:
                j[w] = a[s % R] - 1 - int(gen.integers(0, 3))


def random_linear_gauge(r: int, gen, spread: int = 2):
    """(d, j, profile) with widths bounded by the fibre sizes."""
    from displaylab.flex import Gauge
    from displaylab.gradedfrob import WeightProfile

    D = random_multidegree(r, gen, spread)
    a, b = [], []
    for s in range(r):
        lo = int(gen.integers(-1, 2))
        a.append(lo)
        b.append(lo + int(gen.integers(0, min(len(fibre(D, s)), 2) + 1)))
    j: dict = {}
    _fill_cuts(D, range(r), a, b, gen, j)
    for w in range(r):
        j.setdefault(w, 7)
    return D, Gauge(tuple(j[w] for w in range(r))), WeightProfile(tuple(a), tuple(b))


def random_unitary_gauge(r: int, gen, spread: int = 2):
    """(d, j, profile) at period 2r with a_{s+r} = 1 - b_s and j(w + r) = -j(w)."""
    from displaylab.flex import Gauge
    from displaylab.gradedfrob import WeightProfile

    D = random_multidegree(r, gen, spread).at_period(2 * r)
    R = 2 * r
    a, b = [0] * R, [0] * R
    for s in range(r):
        lo = int(gen.integers(-1, 2))
        a[s], b[s] = lo, lo + int(gen.integers(0, min(len(fibre(D, s)), 2) + 1))
        a[s + r], b[s + r] = 1 - b[s], 1 - a[s]
    j: dict = {}
    _fill_cuts(D, range(r), a, b, gen, j)
    # fibres over sigma + r are the fibres over sigma shifted by r
    for w in list(j):
        j[(w + r) % R] = -j[w]
    for w in range(r):
        if w not in j:
            j[w], j[w + r] = 7, -7
    return D, Gauge(tuple(j[w] for w in range(R)), True), WeightProfile(tuple(a), tuple(b), True)
