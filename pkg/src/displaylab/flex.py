"""Multidegrees, gauges and the Flex functors.

A multidegree of period r is a monotone map d: Z -> Z with d(w) >= w and
d(w + r) = d(w) + r.  Indices w with d(w + 1) > d(w) are the jumps; the
others are stationary.  Jumps are taken with representatives in [0, R) for
whatever period R the data is realized at (a multiple of r).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import linalg as L
from .display import Display, ParabolicElement, Shape, phi_block
from .errors import (
    EvenSubset,
    InsufficientLevel,
    InvalidGauge,
    InvalidMultidegree,
    IterationLeavesParabolic,
    PeriodMismatch,
    TranslationMultidegree,
    WidthExceedsP,
    WidthMismatch,
)
from .gradedfrob import (
    GradedFrobModule,
    GradedHom,
    WeightProfile,
    _chain,
    _chain_reversed,
    fib_realize,
    p_power,
)

# ---------------------------------------------------------------------------
# multidegrees


@dataclass(frozen=True)
class Multidegree:
    r: int
    base: tuple

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(int(x) for x in self.base))
        if self.r < 1 or len(self.base) != self.r:
            raise InvalidMultidegree(f"need {self.r} base values, got {len(self.base)}")

    @classmethod
    def identity(cls, r: int) -> "Multidegree":
        return cls(r, tuple(range(r)))

    @classmethod
    def translation(cls, r: int, t: int) -> "Multidegree":
        return cls(r, tuple(w + t for w in range(r)))

    def __call__(self, w: int) -> int:
        q, m = divmod(w, self.r)
        return self.base[m] + q * self.r

    def violations(self) -> list[str]:
        out = []
        for w in range(-self.r, 2 * self.r + 1):
            if self(w) < w:
                out.append(f"multidegree: d({w}) = {self(w)} < {w}")
            if self(w + 1) < self(w):
                out.append(f"multidegree: d({w + 1}) = {self(w + 1)} < d({w}) = {self(w)}")
            if self(w + self.r) != self(w) + self.r:
                out.append(f"multidegree: d({w} + r) != d({w}) + r")
        return out

    def is_valid(self) -> bool:
        return not self.violations()

    def require_valid(self) -> None:
        bad = self.violations()
        if bad:
            raise InvalidMultidegree(bad[0])

    def at_period(self, R: int) -> "Multidegree":
        """The same map viewed with period R (a multiple of r)."""
        if R % self.r:
            raise PeriodMismatch(f"period {R} is not a multiple of {self.r}")
        return Multidegree(R, tuple(self(w) for w in range(R)))

    def star(self, sigma: int) -> int:
        """d*(sigma) = max{w | d(w) <= sigma}."""
        w = sigma
        while self(w) > sigma:
            w -= 1
        return w

    @property
    def size(self) -> int:
        """|d| = max(d(w) - w)."""
        return max(self(w) - w for w in range(self.r))

    def is_translation(self) -> bool:
        return len({self(w) - w for w in range(self.r)}) == 1

    def is_stationary(self, w: int) -> bool:
        return self(w + 1) == self(w)

    def jumps(self) -> list[int]:
        return [w for w in range(self.r) if not self.is_stationary(w)]

    def image_residues(self) -> list[int]:
        return sorted({self(w) % self.r for w in range(self.r)})

    def compose(self, other: "Multidegree") -> "Multidegree":
        """(self o other)(w) = self(other(w))."""
        if self.r != other.r:
            raise PeriodMismatch("multidegrees of different periods")
        return Multidegree(self.r, tuple(self(other(w)) for w in range(self.r)))

    def star_multidegree(self) -> "Multidegree":
        """d* o d, sending every index to the last index of its fibre."""
        return Multidegree(self.r, tuple(self.star(self(w)) for w in range(self.r)))

    def block(self, w: int) -> range:
        """The fibre d^-1(d(w)) as a range of consecutive indices."""
        lo = w
        while self(lo - 1) == self(w):
            lo -= 1
        return range(lo, self.star(self(w)) + 1)


def H0(l: int) -> int:
    return 0 if l <= 0 else 1


# ---------------------------------------------------------------------------
# gauges


@dataclass(frozen=True)
class Gauge:
    """Values j(0..R-1), extended R-periodically."""

    j: tuple
    unitary: bool = False

    def __post_init__(self):
        object.__setattr__(self, "j", tuple(int(x) for x in self.j))

    @property
    def R(self) -> int:
        return len(self.j)

    def __call__(self, w: int) -> int:
        return self.j[w % self.R]

    def to_json(self, d: Multidegree) -> dict:
        return {"r": d.r, "d": list(d.base), "j": list(self.j), "unitary": self.unitary}


@dataclass(frozen=True)
class TildeProfile:
    a: tuple
    b: tuple

    @property
    def w(self) -> tuple:
        return tuple(y - x for x, y in zip(self.a, self.b))

    def as_profile(self, unitary: bool = False) -> WeightProfile:
        return WeightProfile(self.a, self.b, unitary)


def _periods(j: Gauge, d: Multidegree, profile: WeightProfile) -> Multidegree:
    if profile.r != j.R:
        raise PeriodMismatch(f"gauge period {j.R} and profile period {profile.r} differ")
    return d.at_period(j.R)


def gauge_violations(j: Gauge, d: Multidegree, profile: WeightProfile) -> list[str]:
    bad = d.violations()
    if bad:
        return bad
    D = _periods(j, d, profile)
    R = D.r
    out = []
    for sigma in range(R):
        a, b = profile.at(sigma)
        fibre = [w for w in range(sigma - D.size, sigma + 1) if D(w) == sigma]
        for l in range(a, b):
            hits = [w for w in fibre if j(w) == l]
            if len(hits) != 1:
                out.append(f"unique-cut: sigma={sigma} l={l} has {len(hits)} indices")
    if j.unitary:
        if R % 2:
            out.append("sign-rule: unitary gauges need an even period")
        else:
            half = R // 2
            for w in range(half):
                if j(w + half) != -j(w):
                    out.append(f"sign-rule: j({w + half}) = {j(w + half)} != -j({w}) = {-j(w)}")
    return out


def validate_gauge(j: Gauge, d: Multidegree, profile: WeightProfile) -> bool:
    return not gauge_violations(j, d, profile)


def require_gauge(j: Gauge, d: Multidegree, profile: WeightProfile) -> Multidegree:
    bad = gauge_violations(j, d, profile)
    if bad:
        if bad[0].startswith("multidegree"):
            raise InvalidMultidegree(bad[0])
        raise InvalidGauge(bad[0])
    return _periods(j, d, profile)


def tilde_profile(j: Gauge, d: Multidegree, profile: WeightProfile) -> TildeProfile:
    """a~_w = H0(a_{d(w)} - j(w)) and b~_w = H0(b_{d(w)} - j(w))."""
    d.require_valid()
    D = _periods(j, d, profile)
    a = tuple(H0(profile.at(D(w))[0] - j(w)) for w in range(D.r))
    b = tuple(H0(profile.at(D(w))[1] - j(w)) for w in range(D.r))
    return TildeProfile(a, b)


def block_sums_hold(j: Gauge, d: Multidegree, profile: WeightProfile) -> bool:
    """Sum of w~ over each fibre d^-1(sigma_j) equals w_{sigma_j}."""
    D = _periods(j, d, profile)
    tw = tilde_profile(j, d, profile).w
    for w in D.jumps():
        total = sum(tw[x % D.r] for x in D.block(w))
        if total != profile.w[D(w) % D.r]:
            return False
    return True


def normalization_holds(j: Gauge, d: Multidegree, profile: WeightProfile) -> bool:
    """For each block and each weight l in [a, b]: sum_w (H0(l - j(w)) - a~_w) = l - a."""
    D = _periods(j, d, profile)
    for w in D.jumps():
        a, b = profile.at(D(w))
        blk = list(D.block(w))
        for l in range(a, b + 1):
            if sum(H0(l - j(x)) - H0(a - j(x)) for x in blk) != l - a:
                return False
    return True


# ---------------------------------------------------------------------------
# Flex on graded modules


def flex_module(d: Multidegree, M: GradedFrobModule) -> GradedFrobModule:
    """Slot w is tau^{d(w)-w} M_{d(w)}; jumps compose F's, stationary slots are identities."""
    D = d.at_period(M.r) if M.r != d.r else d
    D.require_valid()
    ring, n = M.ring, M.level
    F, V, w = [], [], []
    for om in range(M.r):
        lo, hi = D(om), D(om + 1)
        if lo == hi:
            one = L.identity(ring, n, M.rank(lo))
            F.append(one)
            V.append(one)
        else:
            t = lo - om
            F.append(L.tau_power(_chain([M.Fm(s) for s in range(lo, hi)]), t))
            V.append(L.tau_power(_chain_reversed([M.Vm(s) for s in range(lo, hi)]), t))
        w.append(sum(M.width(s) for s in range(D(om - 1) + 1, D(om) + 1)))
    return GradedFrobModule(ring, n, tuple(w), tuple(F), tuple(V))


def flex_hom(d: Multidegree, f: GradedHom) -> GradedHom:
    r = len(f.f)
    D = d.at_period(r) if r != d.r else d
    return GradedHom(tuple(L.tau_power(f.slot(D(om)), D(om) - om) for om in range(r)))


def unflex_exponents(d: Multidegree, w: Sequence[int]) -> tuple[int, list[int], list[int]]:
    """(u, u_w, v_w) with u_w = sum_{s=w+1}^{d(w)} w_s, u = max u_w, v_w = u - u_w."""
    r = len(w)
    D = d.at_period(r) if r != d.r else d
    uw = [sum(w[s % r] for s in range(om + 1, D(om) + 1)) for om in range(r)]
    u = max(uw)
    return u, uw, [u - x for x in uw]


def unflex_hom(d: Multidegree, ft: GradedHom, N: GradedFrobModule, M: GradedFrobModule) -> GradedHom:
    """f_w = (F^M)^{k} p^{v_w} f~_w (V^N)^{k} with k = d(w) - w."""
    if N.w != M.w:
        raise WidthMismatch(f"widths {N.w} and {M.w} differ")
    r = M.r
    D = d.at_period(r) if r != d.r else d
    _, _, v = unflex_exponents(D, M.w)
    out = []
    for om in range(r):
        k = D(om) - om
        core = L.scale(p_power(M.ring, M.level, v[om]), ft.slot(om))
        if k:
            Fk = _chain([M.Fm(s) for s in range(om, om + k)])
            Vk = _chain_reversed([N.Vm(s) for s in range(om, om + k)])
            core = L.mul_all(Fk, core, Vk)
        out.append(core)
    return GradedHom(tuple(out))


# ---------------------------------------------------------------------------
# Flex on displays


def _weights(U: Display, s: int) -> list[int]:
    h, dd, t = U.shape.h, U.shape.d(s), U.twist
    return [1 + t if i < dd else t for i in range(h)]


def flex_shape(U: Display, d: Multidegree, j: Gauge) -> Shape:
    """Cut at w: the number of weights lambda at d(w) with H0(lambda - j(w)) = 1."""
    R = U.shape.r
    D = d.at_period(R)
    ds = tuple(sum(1 for x in _weights(U, D(om)) if x > j(om)) for om in range(R))
    return Shape(U.shape.h, ds, U.shape.unitary)


@dataclass(frozen=True)
class FlexedDisplay:
    display: Display
    profile: TildeProfile
    width: int


def _prepare(U: Display, d: Multidegree, j: Gauge, profile: WeightProfile) -> tuple[Multidegree, int]:
    D = require_gauge(j, d, profile)
    if D.r != U.shape.r:
        raise PeriodMismatch(f"gauge period {D.r} and display period {U.shape.r} differ")
    if D.is_translation() and D.size != 0:
        raise TranslationMultidegree("flex of displays needs a multidegree that is not a translation")
    w = max(profile.w)
    if w >= U.ring.p:
        raise WidthExceedsP(f"width {w} is not below p = {U.ring.p}")
    for s in range(U.shape.r):
        lam = _weights(U, s)
        a, b = profile.at(s)
        if min(lam) < a or max(lam) > b:
            raise InvalidGauge(f"display weights outside the profile at slot {s}")
    return D, w


def flex_display(d: Multidegree, j: Gauge, U: Display, profile: WeightProfile) -> FlexedDisplay:
    """U~_{w_j} = prod_{s = sigma_j}^{sigma_{j+1}-1} tau^{s - w_j}(U_s), identity off the jumps."""
    D, w = _prepare(U, d, j, profile)
    n = U.level - w
    if n < 1:
        raise InsufficientLevel(f"level {U.level} cannot absorb width {w}")
    R, ring, h = U.shape.r, U.ring, U.shape.h
    shape = flex_shape(U, D, j)
    mats = []
    for om in range(R):
        lo, hi = D(om), D(om + 1)
        if lo == hi:
            mats.append(L.identity(ring, n, h))
            continue
        prod = L.tau_power(U.slot(lo), lo - om)
        for s in range(lo + 1, hi):
            prod = L.mul(prod, L.tau_power(U.slot(s), s - om))
        mats.append(L.truncate(prod, n))
    out = Display(shape, ring, n, tuple(mats))
    return FlexedDisplay(out, tilde_profile(j, D, profile), w)


def _phi_cut(m: L.Matrix, cut: int) -> L.Matrix:
    """Phi for the cut; with no B block every entry is just Frobenius-twisted."""
    h = len(m)
    if 0 < cut < h:
        for i in range(cut):
            for jj in range(cut, h):
                if not m[i][jj].in_I():
                    raise IterationLeavesParabolic("B block left I during the flex iteration")
        return phi_block(m, cut)
    return L.tau(m)


def flex_morphism(d: Multidegree, j: Gauge, k: ParabolicElement, profile: WeightProfile, U: Display) -> ParabolicElement:
    """k~ at the jumps is tau^{sigma_j - w_j}(k_{sigma_j}); stationary slots iterate Phi.

    ``U`` only provides the shape and weight data; k acts on displays of
    level U.level and the result acts on the flexed level U.level - w.
    """
    D, w = _prepare(U, d, j, profile)
    if k.shape != U.shape or k.level != U.level:
        raise InvalidGauge("parabolic element does not match the display")
    n = U.level - w
    if n < 1:
        raise InsufficientLevel(f"level {U.level} cannot absorb width {w}")
    R = U.shape.r
    shape = flex_shape(U, D, j)
    out: dict[int, L.Matrix] = {}
    for om_j in D.jumps():
        cur = L.tau_power(k.slot(D(om_j)), D(om_j) - om_j)
        out[om_j] = cur
        om = om_j - 1
        while D.is_stationary(om):
            cur = _phi_cut(cur, shape.d(om + 1))
            out[om % R] = cur
            om -= 1
    mats = tuple(L.truncate(out[om], n + 1) for om in range(R))
    for om in range(R):
        m = mats[om]
        cut = shape.d(om)
        for i in range(cut):
            for jj in range(cut, len(m)):
                if not m[i][jj].in_I():
                    raise IterationLeavesParabolic(f"transported element leaves the parabolic at slot {om}")
    return ParabolicElement(shape, U.ring, n, mats)


def rectify_check(d: Multidegree, j: Gauge, U: Display, profile: WeightProfile) -> bool:
    """Flex^d(Fib^{a,b}(U)) truncated equals Flex^{d* o d}(Fib^{a~,b~}(flex_display(U)))."""
    D, w = _prepare(U, d, j, profile)
    fl = flex_display(D, j, U, profile)
    lhs = flex_module(D, fib_realize(U, profile)).truncate(fl.display.level)
    rhs = flex_module(D.star_multidegree(), fib_realize(fl.display, fl.profile.as_profile()))
    return lhs.w == rhs.w and lhs.F == rhs.F and lhs.V == rhs.V


# ---------------------------------------------------------------------------
# multiplyable subsets


def is_multiplyable(pi: Sequence[int], tildes: Sequence[TildeProfile]) -> bool:
    """Weights of the product cocharacter twisted by z^{(1-|pi|)/2} lie in {0, 1}."""
    if len(pi) % 2 == 0:
        raise EvenSubset(f"subset of even size {len(pi)}")
    shift = (1 - len(pi)) // 2
    R = len(tildes[pi[0]].a)
    for om in range(R):
        if sum(tildes[i].a[om] for i in pi) + shift < 0:
            return False
        if sum(tildes[i].b[om] for i in pi) + shift > 1:
            return False
    return True


# ---------------------------------------------------------------------------
# theta-gauges on an abstract finite set with a permutation and an involution


@dataclass(frozen=True)
class ThetaGaugeInstance:
    theta: tuple  # permutation of range(N)
    star: tuple  # involution of range(N)
    dplus: tuple  # nonnegative integers
    j: tuple  # j[i][x]
    a: tuple  # a[i][x]
    b: tuple  # b[i][x]
    Pi: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for name in ("theta", "star", "dplus"):
            object.__setattr__(self, name, tuple(int(x) for x in getattr(self, name)))
        for name in ("j", "a", "b"):
            object.__setattr__(self, name, tuple(tuple(int(x) for x in row) for row in getattr(self, name)))
        object.__setattr__(self, "Pi", tuple(tuple(p) for p in self.Pi))

    @property
    def size(self) -> int:
        return len(self.theta)

    @property
    def indices(self) -> range:
        return range(len(self.j))

    def theta_power(self, x: int, k: int) -> int:
        inv = {y: i for i, y in enumerate(self.theta)}
        for _ in range(abs(k)):
            x = self.theta[x] if k > 0 else inv[x]
        return x

    def dmap(self, x: int) -> int:
        return self.theta_power(x, -self.dplus[x])

    def orbit(self, x: int) -> list[int]:
        out = [x]
        y = self.theta[x]
        while y != x:
            out.append(y)
            y = self.theta[y]
        return out

    def orbits(self) -> list[list[int]]:
        seen, out = set(), []
        for x in range(self.size):
            if x not in seen:
                o = self.orbit(x)
                seen.update(o)
                out.append(o)
        return out

    def to_json(self) -> dict:
        return {
            "theta": list(self.theta),
            "star": list(self.star),
            "dplus": list(self.dplus),
            "j": [list(r) for r in self.j],
            "a": [list(r) for r in self.a],
            "b": [list(r) for r in self.b],
            "Pi": [list(p) for p in self.Pi],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ThetaGaugeInstance":
        return cls(obj["theta"], obj["star"], obj["dplus"], obj["j"], obj["a"], obj["b"], obj.get("Pi", []))


def validate_theta_gauge(inst: ThetaGaugeInstance) -> list[str]:
    """One line per violation, tagged by structure, multidegree or axiom G1-G4."""
    out = []
    N = inst.size
    th, st = inst.theta, inst.star
    if sorted(th) != list(range(N)):
        out.append("structure: theta is not a permutation")
        return out
    if any(st[st[x]] != x for x in range(N)):
        out.append("structure: star is not an involution")
        return out
    for x in range(N):
        if th[st[x]] != st[th[x]]:
            out.append(f"structure: theta and star do not commute at {x}")
        if inst.dplus[x] < 0:
            out.append(f"multidegree: d+({x}) < 0")
        if inst.dplus[th[x]] > inst.dplus[x] + 1:
            out.append(f"multidegree: d+(theta {x}) > d+({x}) + 1")
        if inst.dplus[st[x]] != inst.dplus[x]:
            out.append(f"multidegree: d+({x} *) != d+({x})")
    for i in inst.indices:
        for x in range(N):
            if inst.b[i][x] != 1 - inst.a[i][st[x]]:
                out.append(f"weights: b[{i}][{x}] != 1 - a[{i}][{x} *]")
    if out:
        return out
    dm = [inst.dmap(x) for x in range(N)]
    for i in inst.indices:
        for x in range(N):
            for l in range(inst.a[i][x], inst.b[i][x]):
                hits = [k for k in range(N) if dm[k] == x and inst.j[i][k] == l]
                if len(hits) != 1:
                    out.append(f"G1: index {i}, embedding {x}, l={l} has {len(hits)} preimages")
        for x in range(N):
            if x <= st[x] and inst.j[i][st[x]] != -inst.j[i][x]:
                out.append(f"G2: j[{i}]({x} *) != -j[{i}]({x})")
    for pi in inst.Pi:
        need = (len(pi) - 1) / 2
        for x in range(N):
            low = sum(1 for i in pi if inst.j[i][x] < inst.a[i][dm[x]])
            high = sum(1 for i in pi if inst.j[i][x] >= inst.b[i][dm[x]])
            if low < need or high < need:
                out.append(f"G3: subset {list(pi)} at embedding {x}")
        for orb in inst.orbits():
            if not any(
                all(not inst.a[i][dm[x]] <= inst.j[i][x] < inst.b[i][dm[x]] for i in pi) for x in orb
            ):
                out.append(f"G4: subset {list(pi)} orbit of {orb[0]}")
    return out


@dataclass(frozen=True)
class LocalTranslation:
    d: Multidegree
    gauges: tuple
    profiles: tuple
    unitary: bool


def translate_local(inst: ThetaGaugeInstance, iota: int) -> LocalTranslation:
    """d_q(w) = w + d+(theta^-w iota) on the theta-orbit of iota, with the local gauge data."""
    orb = inst.orbit(iota)
    R = len(orb)
    emb = [inst.theta_power(iota, -w) for w in range(R)]
    unitary = inst.star[iota] in orb and inst.star[iota] != iota
    d = Multidegree(R, tuple(w + inst.dplus[emb[w]] for w in range(R)))
    gauges, profiles = [], []
    for i in inst.indices:
        gauges.append(Gauge(tuple(inst.j[i][x] for x in emb), unitary))
        profiles.append(
            WeightProfile(tuple(inst.a[i][x] for x in emb), tuple(inst.b[i][x] for x in emb), unitary and R % 2 == 0)
        )
    return LocalTranslation(d, tuple(gauges), tuple(profiles), unitary)
