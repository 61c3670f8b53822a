"""The ``display-lab`` command-line tool.

Exit codes: 0 success, 1 usage/parse/math error, 2 counterexample found,
3 resource guard tripped.  Every output carries the seed in its header.
"""

from __future__ import annotations

import itertools
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import click
import numpy as np

from . import linalg as L
from .display import Display, Shape, brute_force_isoms, interpolate_family, parabolic_count_estimate
from .errors import DisplayLabError, MathError, ResourceGuard, SearchSpaceTooLarge
from .flex import (
    Gauge,
    Multidegree,
    ThetaGaugeInstance,
    flex_display,
    gauge_violations,
    validate_theta_gauge,
)
from .gradedfrob import WeightProfile
from .newton import dominates, family_newton_scan, newton_point, non_pole_points, ordinary_point
from .rings import FiniteField, parse_ring
from .wittring import WittVector, ghost

EXIT_OK, EXIT_USAGE, EXIT_COUNTEREXAMPLE, EXIT_GUARD = 0, 1, 2, 3
CLASSIFY_LIMIT = 10**7
NEWTON_MAX_LEVEL = 8
NEWTON_MAX_HEIGHT = 6


@dataclass
class JobConfig:
    command: str
    ring: str = "3"
    level: int = 2
    seed: int = 0
    limit: int | None = None
    out: str | None = None
    fmt: str = "json"


class Counterexample(Exception):
    def __init__(self, text: str):
        super().__init__("counterexample found")
        self.text = text


def _emit(cfg: JobConfig, text: str) -> None:
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _run(cfg: JobConfig, body: Callable[[], str]) -> None:
    """Run a command body and translate library errors into exit codes."""
    try:
        text = body()
    except ResourceGuard as exc:
        click.echo(f"error: resource guard: {exc}", err=True)
        sys.exit(EXIT_GUARD)
    except Counterexample as exc:
        _emit(cfg, exc.text)
        click.echo("error: counterexample found", err=True)
        sys.exit(EXIT_COUNTEREXAMPLE)
    except (MathError, DisplayLabError, ValueError, KeyError, json.JSONDecodeError) as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    _emit(cfg, text)


def _read_json(path: str) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def _rational(x) -> str:
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# prefix expressions for Witt arithmetic


class ExprSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line, self.col = line, col


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    out = []
    for ln, row in enumerate(src.splitlines(), start=1):
        i = 0
        while i < len(row):
            ch = row[i]
            if ch == ";":
                break
            if ch.isspace():
                i += 1
            elif ch in "()":
                out.append(Token(ch, ln, i + 1))
                i += 1
            else:
                j = i
                while j < len(row) and not row[j].isspace() and row[j] not in "();":
                    j += 1
                out.append(Token(row[i:j], ln, i + 1))
                i = j
    return out


def parse_exprs(src: str) -> list:
    """Parse a file of s-expressions into nested lists of tokens."""
    toks = tokenize(src)
    pos = 0

    def one():
        nonlocal pos
        tok = toks[pos]
        pos += 1
        if tok.text == ")":
            raise ExprSyntaxError("unexpected ')'", tok.line, tok.col)
        if tok.text != "(":
            return tok
        items = [tok]
        while True:
            if pos >= len(toks):
                raise ExprSyntaxError("unclosed '('", tok.line, tok.col)
            if toks[pos].text == ")":
                pos += 1
                break
            items.append(one())
        if len(items) == 1:
            raise ExprSyntaxError("empty expression", tok.line, tok.col)
        return items

    exprs = []
    while pos < len(toks):
        exprs.append(one())
    return exprs


def _int_token(tok: Token) -> int:
    try:
        return int(tok.text)
    except ValueError:
        raise ExprSyntaxError(f"expected an integer, got {tok.text!r}", tok.line, tok.col) from None


def eval_expr(node, ring, n: int):
    """Evaluate to a WittVector, or to a list of ints for ``ghost``."""
    if isinstance(node, Token):
        return WittVector.from_int(ring, _int_token(node), n)
    head, args = node[1], node[2:]
    if not isinstance(head, Token):
        raise ExprSyntaxError("operator expected", node[0].line, node[0].col)
    op = head.text

    def arity(k: int) -> None:
        if len(args) != k:
            raise ExprSyntaxError(f"{op} takes {k} argument(s), got {len(args)}", head.line, head.col)

    def witt(x):
        v = eval_expr(x, ring, n)
        if not isinstance(v, WittVector):
            raise ExprSyntaxError("ghost vectors cannot be used as operands", head.line, head.col)
        return v

    if op == "teich":
        arity(1)
        if not isinstance(args[0], Token):
            raise ExprSyntaxError("teich takes a field element", head.line, head.col)
        return WittVector.teichmuller(ring, ring.from_json(_int_token(args[0])), n)
    if op == "int":
        arity(1)
        return WittVector.from_int(ring, _int_token(args[0]), n)
    if op == "vec":
        if not args or len(args) > n:
            raise ExprSyntaxError(f"vec takes 1..{n} components", head.line, head.col)
        comps = [ring.from_json(_int_token(a)) for a in args]
        return WittVector(ring, comps + [ring.zero] * (n - len(comps)))
    if op in ("add", "mul"):
        if len(args) < 2:
            raise ExprSyntaxError(f"{op} takes at least 2 arguments", head.line, head.col)
        acc = witt(args[0])
        for a in args[1:]:
            acc = acc + witt(a) if op == "add" else acc * witt(a)
        return acc
    if op == "sub":
        arity(2)
        return witt(args[0]) - witt(args[1])
    if op == "neg":
        arity(1)
        return -witt(args[0])
    if op == "F":
        arity(1)
        return witt(args[0]).F()
    if op == "V":
        arity(1)
        return witt(args[0]).V()
    if op == "ghost":
        arity(1)
        v = witt(args[0])
        if not isinstance(ring, FiniteField) or ring.e != 1:
            raise ExprSyntaxError("ghost needs a prime field", head.line, head.col)
        return ghost([int(c) for c in v.comps], ring.p)
    raise ExprSyntaxError(f"unknown operator {op!r}", head.line, head.col)


# ---------------------------------------------------------------------------
# commands


@click.group()
def main() -> None:
    """Experiments with truncated displays, graded Frobenius modules and Newton points."""


def _common(fn):
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write output here.")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None)(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    return fn


@main.command("witt")
@click.argument("expr_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--ring", "ring_spec", default="3", show_default=True)
@click.option("--level", type=int, default=2, show_default=True)
@_common
def cmd_witt(expr_file, ring_spec, level, seed, fmt, out):
    """Evaluate prefix Witt expressions, one result per expression."""
    cfg = JobConfig("witt", ring_spec, level, seed, None, out, fmt or "json")

    def body() -> str:
        ring = parse_ring(ring_spec)
        if not 1 <= level <= 9:
            raise ValueError("level must lie in 1..9")
        results = [eval_expr(e, ring, level) for e in parse_exprs(Path(expr_file).read_text(encoding="utf-8"))]
        if cfg.fmt == "csv":
            lines = [f"# seed={seed}", "index;value"]
            for i, v in enumerate(results):
                comps = v if isinstance(v, list) else [ring.to_json(c) for c in v.comps]
                lines.append(f"{i};" + ",".join(json.dumps(c, separators=(",", ":")) for c in comps))
            return "\n".join(lines) + "\n"
        ser = [{"ghost": v} if isinstance(v, list) else v.to_json() for v in results]
        return _dump({"command": "witt", "seed": seed, "results": ser})

    _run(cfg, body)


def _parabolic_order(shape: Shape, ring: FiniteField, n: int) -> int:
    """Order of the level-(n+1) parabolic group: Levi residues times the free higher slots."""
    q, h = ring.q, shape.h

    def gl(m: int) -> int:
        return math.prod(q**m - q**i for i in range(m))

    total = 1
    for d in shape.ds:
        total *= gl(d) * gl(h - d) * q ** (d * (h - d)) * q ** (n * h * h)
    return total


def _display_key(U: Display) -> str:
    return json.dumps(U.to_json(), sort_keys=True, separators=(",", ":"))


@main.command("classify")
@click.argument("displays_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--limit", type=int, default=CLASSIFY_LIMIT, show_default=True)
@_common
def cmd_classify(displays_file, limit, seed, fmt, out):
    """Partition displays into twisted-conjugacy classes by exhaustive search."""
    cfg = JobConfig("classify", seed=seed, limit=limit, out=out, fmt=fmt or "json")

    def body() -> str:
        if limit > CLASSIFY_LIMIT:
            raise SearchSpaceTooLarge(f"limit {limit} exceeds {CLASSIFY_LIMIT}")
        data = _read_json(displays_file)
        Us = [Display.from_json(x) for x in data]
        for U in Us:
            if not isinstance(U.ring, FiniteField):
                raise MathError("classification needs a finite field")
            est = parabolic_count_estimate(U.shape, U.ring, U.level)
            if est > limit:
                raise SearchSpaceTooLarge(f"{est} candidates exceed the limit {limit}")
        classes: list[list[int]] = []
        for i, U in enumerate(Us):
            for cls in classes:
                V = Us[cls[0]]
                if V.shape == U.shape and V.ring == U.ring and V.level == U.level and brute_force_isoms(V, U, limit, first_only=True):
                    cls.append(i)
                    break
            else:
                classes.append([i])
        orbits = []
        for cls in classes:
            rep = min(cls, key=lambda i: _display_key(Us[i]))
            U = Us[rep]
            aut = len(brute_force_isoms(U, U, limit))
            orbits.append(
                {
                    "representative": U.to_json(),
                    "members": cls,
                    "automorphisms": aut,
                    "orbit_size": _parabolic_order(U.shape, U.ring, U.level) // aut,
                }
            )
        orbits.sort(key=lambda o: json.dumps(o["representative"], sort_keys=True))
        if cfg.fmt == "csv":
            lines = [f"# seed={seed}", "members;orbit_size;automorphisms"]
            lines += [f"{','.join(map(str, o['members']))};{o['orbit_size']};{o['automorphisms']}" for o in orbits]
            return "\n".join(lines) + "\n"
        return _dump({"command": "classify", "seed": seed, "orbits": orbits})

    _run(cfg, body)


def _newton_guard(U: Display) -> None:
    if U.level > NEWTON_MAX_LEVEL:
        raise ResourceGuard(f"level {U.level} exceeds {NEWTON_MAX_LEVEL}")
    if U.shape.h > NEWTON_MAX_HEIGHT:
        raise ResourceGuard(f"height {U.shape.h} exceeds {NEWTON_MAX_HEIGHT}")


@main.command("newton")
@click.argument("display_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--pdiv", is_flag=True, help="Report slopes with the opposite sign.")
@_common
def cmd_newton(display_file, pdiv, seed, fmt, out):
    """Newton points of one display or a list of displays."""
    cfg = JobConfig("newton", seed=seed, out=out, fmt=fmt or "csv")

    def body() -> str:
        data = _read_json(display_file)
        Us = [Display.from_json(x) for x in (data if isinstance(data, list) else [data])]
        rows = []
        for U in Us:
            _newton_guard(U)
            nu = newton_point(U)
            rows.append(nu.negated() if pdiv else nu)
        if cfg.fmt == "csv":
            lines = [f"# seed={seed}", "index;slopes"]
            lines += [f"{i};{nu.serialize()}" for i, nu in enumerate(rows)]
            return "\n".join(lines) + "\n"
        return _dump({"command": "newton", "seed": seed, "slopes": [[_rational(x) for x in nu.slopes] for nu in rows]})

    _run(cfg, body)


def teichmuller_family(shape: Shape, ring: FiniteField, n: int):
    """Every display whose entries are Teichmuller lifts, in lexicographic order."""
    h, r = shape.h, shape.r
    slots = []
    for entries in itertools.product(list(ring.elements()), repeat=h * h):
        m = L.teichmuller_matrix(ring, n, [list(entries[i * h : (i + 1) * h]) for i in range(h)])
        if L.is_invertible(m):
            slots.append(m)
    for ms in itertools.product(slots, repeat=r):
        yield Display(shape, ring, n, ms, validate=False)


def random_display(shape: Shape, ring: FiniteField, n: int, rng: np.random.Generator) -> Display:
    h = shape.h
    mats = []
    for _ in range(shape.r):
        while True:
            m = tuple(tuple(WittVector(ring, [ring.random(rng) for _ in range(n)]) for _ in range(h)) for _ in range(h))
            if L.is_invertible(m):
                break
        mats.append(m)
    return Display(shape, ring, n, tuple(mats), validate=False)


def _parse_shape(h: int, ds: str) -> Shape:
    vals = [int(x) for x in ds.split(",")]
    return Shape.linear(h, vals[0]) if len(vals) == 1 else Shape.graded(h, vals)


@main.command("mazur-scan")
@click.option("--ring", "ring_spec", default="3", show_default=True)
@click.option("--level", type=int, default=3, show_default=True)
@click.option("--height", "h", type=int, default=2, show_default=True)
@click.option("--d", "ds", default="1", show_default=True, help="Hodge cut, or comma-separated cuts per slot.")
@click.option("--limit", type=int, default=None, help="Seeded random sample size; omit for the Teichmuller family.")
@click.option("--counterexample", type=click.Path(dir_okay=False), default="counterexample.json", show_default=True)
@_common
def cmd_mazur_scan(ring_spec, level, h, ds, limit, counterexample, seed, fmt, out):
    """Check Newton <= ordinary on an enumerated or sampled set of displays."""
    cfg = JobConfig("mazur-scan", ring_spec, level, seed, limit, out, fmt or "csv")

    def body() -> str:
        ring = parse_ring(ring_spec)
        if not isinstance(ring, FiniteField):
            raise MathError("mazur-scan needs a finite field")
        shape = _parse_shape(h, ds)
        if level > NEWTON_MAX_LEVEL or h > NEWTON_MAX_HEIGHT:
            raise ResourceGuard("newton refuses levels above 8 or heights above 6")
        if limit is None:
            Us = teichmuller_family(shape, ring, level)
        else:
            rng = _rng(seed)
            Us = (random_display(shape, ring, level, rng) for _ in range(limit))
        top = ordinary_point(shape)
        lines = [f"# seed={seed}", "point;slopes;dominates_max"]
        count = 0
        for i, U in enumerate(Us):
            nu = newton_point(U)
            ok = dominates(nu, top)
            lines.append(f"{i};{nu.serialize()};{'true' if ok else 'false'}")
            count += 1
            if not ok:
                Path(counterexample).write_text(_dump({"display": U.to_json(), "newton": nu.serialize(), "ordinary": top.serialize()}))
                raise Counterexample("\n".join(lines) + "\n")
        if cfg.fmt == "json":
            return _dump({"command": "mazur-scan", "seed": seed, "checked": count, "violations": 0, "ordinary": top.serialize()})
        return "\n".join(lines) + "\n"

    _run(cfg, body)


@main.command("family-scan")
@click.argument("family_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--ring", "ring_spec", default=None, help="Sample field, e.g. 3^4; defaults to the base field.")
@click.option("--limit", type=int, default=None, help="Seeded sample size; omit to scan every non-pole point.")
@_common
def cmd_family_scan(family_file, ring_spec, limit, seed, fmt, out):
    """Newton points along the interpolation family between two displays."""
    cfg = JobConfig("family-scan", ring_spec or "", 0, seed, limit, out, fmt or "csv")

    def body() -> str:
        data = _read_json(family_file)
        fam = interpolate_family(Display.from_json(data["U0"]), Display.from_json(data["U1"]))
        field = parse_ring(ring_spec) if ring_spec else fam.field
        if not isinstance(field, FiniteField) or field.p != fam.field.p or field.e % fam.field.e:
            raise MathError("the sample field must be a finite extension of the base field")
        _newton_guard(fam.U0)
        points = non_pole_points(fam, field)
        if limit is not None and limit < len(points):
            idx = _rng(seed).choice(len(points), size=limit, replace=False)
            points = sorted(points[i] for i in idx)
        res = family_newton_scan(fam, points, field)
        if cfg.fmt == "json":
            return _dump(
                {
                    "command": "family-scan",
                    "seed": seed,
                    "maximum": res.maximum.serialize(),
                    "exceptional": list(res.exceptional),
                    "rows": [[row.point, row.newton.serialize(), row.dominated] for row in res.rows],
                }
            )
        return res.to_csv(seed)

    _run(cfg, body)


def _read_gauge(obj: dict) -> tuple[Multidegree, Gauge, WeightProfile]:
    d = Multidegree(int(obj.get("r", len(obj["d"]))), tuple(obj["d"]))
    unitary = bool(obj.get("unitary", False))
    j = Gauge(tuple(obj["j"]), unitary)
    profile = WeightProfile.from_json(obj["profile"])
    return d, j, profile


@main.command("flex")
@click.argument("display_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("gauge_file", type=click.Path(exists=True, dir_okay=False))
@_common
def cmd_flex(display_file, gauge_file, seed, fmt, out):
    """Flex a display along a multidegree and gauge."""
    cfg = JobConfig("flex", seed=seed, out=out, fmt=fmt or "json")

    def body() -> str:
        U = Display.from_json(_read_json(display_file))
        d, j, profile = _read_gauge(_read_json(gauge_file))
        res = flex_display(d, j, U, profile)
        tilde_json = {"a": list(res.profile.a), "b": list(res.profile.b)}
        return _dump({"command": "flex", "seed": seed, "display": res.display.to_json(), "profile": tilde_json, "width": res.width})

    _run(cfg, body)


@main.command("gauge-validate")
@click.argument("gauge_file", type=click.Path(exists=True, dir_okay=False))
@_common
def cmd_gauge_validate(gauge_file, seed, fmt, out):
    """Print one tagged violation per line; exit 1 when any is found."""
    cfg = JobConfig("gauge-validate", seed=seed, out=out, fmt=fmt or "json")
    found: list[str] = []

    def body() -> str:
        obj = _read_json(gauge_file)
        if "theta" in obj:
            found.extend(validate_theta_gauge(ThetaGaugeInstance.from_json(obj)))
        else:
            found.extend(gauge_violations(*_gauge_args(obj)))
        return f"# seed={seed}\n" + "".join(line + "\n" for line in found)

    _run(cfg, body)
    if found:
        sys.exit(EXIT_USAGE)


def _gauge_args(obj: dict) -> tuple:
    d, j, profile = _read_gauge(obj)
    return j, d, profile


if __name__ == "__main__":
    main()
