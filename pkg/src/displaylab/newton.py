"""Newton points of displays over finite fields and the dominance order.

For a display U the sigma-linear operator is b_s = U_s F(mu_{s+1}(p)^-1) =
p^-1 P_s with P_s = U_s diag(1_{d_{s+1}}, p).  Composing P_0 tau(P_1) ...
over L = lcm(r, e) slots gives a linear map over W(F_{p^e}); an eigenvalue
of valuation m contributes the slope (m - L) / L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import linalg as L
from .display import Display, InterpolationFamily, Shape
from .errors import InsufficientPrecision, NotFiniteField, SampleAtPole, TotalMismatch
from .gradedfrob import p_power
from .rings import GF, FiniteField
from .wittring import MAX_LEVEL, WittVector


@dataclass(frozen=True)
class NewtonPoint:
    slopes: tuple

    def __post_init__(self):
        s = tuple(sorted((Fraction(x) for x in self.slopes), reverse=True))
        object.__setattr__(self, "slopes", s)

    @property
    def h(self) -> int:
        return len(self.slopes)

    @property
    def total(self) -> Fraction:
        return sum(self.slopes, Fraction(0))

    def negated(self) -> "NewtonPoint":
        """The p-divisible-group sign convention."""
        return NewtonPoint(tuple(-x for x in self.slopes))

    def serialize(self) -> str:
        return ",".join(f"{x.numerator}/{x.denominator}" for x in self.slopes)

    def __str__(self) -> str:
        return "(" + ", ".join(str(x) for x in self.slopes) + ")"


def lower_hull_slopes(points: Sequence[tuple[int, int | None]]) -> list[Fraction]:
    """Slopes of the lower convex hull through (i, v_i), one per unit step.

    Points with v_i None are at infinity; the first and last must be finite.
    """
    pts = [(i, v) for i, v in points if v is not None]
    hull: list[tuple[int, int]] = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly below the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    out = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        out.extend([Fraction(y2 - y1, x2 - x1)] * (x2 - x1))
    return out


def cycle_length(U: Display) -> int:
    e = U.ring.e
    r = U.shape.r
    return r * e // math.gcd(r, e)


def scaled_slots(U: Display) -> list[L.Matrix]:
    n, ring, h = U.level, U.ring, U.shape.h
    one, p = WittVector.one(ring, n), p_power(ring, n, 1)
    out = []
    for s in range(U.shape.r):
        d = U.shape.d(s + 1)
        out.append(L.mul(U.slot(s), L.diagonal([one] * d + [p] * (h - d))))
    return out


def composite(U: Display) -> tuple[L.Matrix, int]:
    """(P_0 tau(P_1) ... tau^{L-1}(P_{L-1}), L)."""
    Ps = scaled_slots(U)
    Lc = cycle_length(U)
    r = U.shape.r
    out = Ps[0]
    for i in range(1, Lc):
        out = L.mul(out, L.tau_power(Ps[i % r], i))
    return out, Lc


def newton_point(U: Display) -> NewtonPoint:
    if not isinstance(U.ring, FiniteField):
        raise NotFiniteField("Newton points need a finite base field")
    P, Lc = composite(U)
    cp = L.charpoly(P)  # highest degree first: c_0 = 1, ..., c_h = +-det
    vals = [c.valuation() for c in cp]
    n = U.level
    if vals[-1] >= n:
        raise InsufficientPrecision(f"determinant vanishes at level {n}; raise the level")
    # points with valuation >= n sit above the chord from (0, 0) to (h, v_det)
    pts = [(i, v if v < n else None) for i, v in enumerate(vals)]
    eig = lower_hull_slopes(pts)
    return NewtonPoint(tuple((m - Lc) / Fraction(Lc) for m in eig))


def dominates(nu1: NewtonPoint, nu2: NewtonPoint) -> bool:
    """nu1 < nu2 in the dominance order (majorization of partial sums)."""
    if nu1.h != nu2.h or nu1.total != nu2.total:
        raise TotalMismatch(f"{nu1} and {nu2} have different heights or totals")
    s1 = s2 = Fraction(0)
    for x, y in zip(nu1.slopes, nu2.slopes):
        s1 += x
        s2 += y
        if s1 > s2:
            return False
    return True


def ordinary_slopes(shape: Shape) -> NewtonPoint:
    """Slopes of the diagonal display U = 1: coordinate i has slope -#{s : i < d_s} / r."""
    r = shape.r
    return NewtonPoint(tuple(Fraction(-sum(1 for d in shape.ds if i < d), r) for i in range(shape.h)))


def ordinary_point(shape: Shape) -> NewtonPoint:
    nu = ordinary_slopes(shape)
    need = sum(shape.h - d for d in shape.ds) + 1
    if need <= MAX_LEVEL:
        check = newton_point(Display.identity(shape, GF(3), need))
        if check != nu:
            raise AssertionError(f"ordinary point mismatch: {check} vs {nu}")
    return nu


def mazur_check(U: Display) -> bool:
    return dominates(newton_point(U), ordinary_point(U.shape))


@dataclass(frozen=True)
class ScanRow:
    point: int
    newton: NewtonPoint
    dominated: bool


@dataclass(frozen=True)
class ScanResult:
    rows: tuple
    maximum: NewtonPoint
    exceptional: tuple  # points whose value is strictly below the maximum

    def to_csv(self, seed: int | None = None) -> str:
        lines = [f"# seed={seed if seed is not None else 0}", "point;slopes;dominates_max"]
        for row in self.rows:
            lines.append(f"{row.point};{row.newton.serialize()};{'true' if row.dominated else 'false'}")
        return "\n".join(lines) + "\n"


def non_pole_points(family: InterpolationFamily, field: FiniteField) -> list[int]:
    return [c for c in field.elements() if not field.is_zero(family.hbar_at(c, field))]


def family_newton_scan(family: InterpolationFamily, points: Iterable[int], field: FiniteField) -> ScanResult:
    """Evaluate the family at each point and compare against the dominance-maximal value."""
    values = []
    for c in points:
        if field.is_zero(family.hbar_at(c, field)):
            raise SampleAtPole(f"sample point {c} is a zero of hbar")
        values.append((c, newton_point(family.evaluate(c, field))))
    distinct = sorted({nu for _, nu in values}, key=lambda nu: nu.slopes)
    maxima = [nu for nu in distinct if all(dominates(mu, nu) for mu in distinct)]
    if not maxima:
        raise TotalMismatch("sampled values have no dominance-maximal element")
    top = maxima[0]
    rows = tuple(ScanRow(c, nu, dominates(nu, top)) for c, nu in values)
    exceptional = tuple(c for c, nu in values if nu != top)
    return ScanResult(rows, top, exceptional)
