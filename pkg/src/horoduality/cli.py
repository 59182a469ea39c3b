"""Command-line interface: verification suites, conjugate grids and probes.

Exit codes: 0 when every case passes, 1 when a case fails, 2 on usage
errors (unknown space or function, malformed literal, unwritable output).

Point literals
    Euclidean   ``x1,...,xn``
    Hyperbolic  ``ambient:x1,...,x(n+1)`` or ``polar:r,theta`` (H^2 only)
    SPD         row-major upper triangle, ``a11,a12,a22`` for SPD(2)
    Product     concatenated factor coordinates, or factor literals joined
                by ``|`` (``polar:1,0|0.5``)
    any space   ``origin``

Tangent literals are comma lists: ``dim`` entries are coordinates in the
orthonormal tangent basis, an ambient-sized list is taken as is. SPD
tangents use the upper-triangle layout of points.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time

import numpy as np

from .duality import conjugate, nonlinearity, nonlinearity_bound, radial_conjugate
from .functions import FunctionSpec, parse_hspec
from .geometry import SPD, Euclidean, Hyperbolic, Manifold, Product, space_from_name
from .horoball import Ray, busemann, make_ray
from .report import SuiteResult, dumps, fmt
from .rigidity import zero_ricci_direction
from .search import SearchBudget
from .subgradient import is_subgradient
from .suites import SPACES, SUITES, nonlinearity_oracle, run_suite

__all__ = ["main", "run", "parse_point", "parse_tangent", "parse_ray", "parse_function"]

POINT_PREFIXES = ("ambient", "polar")


class UsageError(ValueError):
    pass


# -- literals -------------------------------------------------------------------
def _floats(text: str) -> np.ndarray:
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"malformed number list {text!r}") from None
    if not vals:
        raise UsageError("empty coordinate list")
    return np.array(vals)


def _upper_to_sym(vals: np.ndarray, n: int) -> np.ndarray:
    iu = np.triu_indices(n)
    if len(vals) != len(iu[0]):
        raise UsageError(f"SPD({n}) needs {len(iu[0])} upper-triangle entries, got {len(vals)}")
    X = np.zeros((n, n))
    X[iu] = vals
    return X + np.triu(X, 1).T


def parse_point(space: Manifold, text: str) -> np.ndarray:
    """Parse a point literal (see the module docstring)."""
    text = text.strip()
    try:
        if text == "origin":
            return space.origin()
        if isinstance(space, Product):
            if "|" in text:
                parts = text.split("|")
                if len(parts) != 2:
                    raise UsageError("product points take two factor literals")
                return space.join(*(parse_point(m, s) for m, s in zip(space.factors, parts)))
            vals = _floats(text)
            if len(vals) != space.size:
                raise UsageError(f"{space.name} points need {space.size} coordinates")
            return space.check_point(vals)
        prefix, sep, rest = text.partition(":")
        if isinstance(space, Hyperbolic):
            if sep and prefix == "polar":
                vals = _floats(rest)
                if len(vals) != 2:
                    raise UsageError("polar points take r,theta")
                return space.polar(vals[0], vals[1])
            body = rest if sep and prefix == "ambient" else text
            if sep and prefix != "ambient":
                raise UsageError(f"unknown point prefix {prefix!r}")
            vals = _floats(body)
            if len(vals) != space.dim + 1:
                raise UsageError(f"{space.name} points need {space.dim + 1} ambient coordinates")
            return space.check_point(vals, tol=1e-9)
        if sep:
            raise UsageError(f"prefix {prefix!r} is not valid on {space.name}")
        vals = _floats(text)
        if isinstance(space, SPD):
            return space.check_point(_upper_to_sym(vals, space.n), tol=1e-9)
        if len(vals) != space.dim:
            raise UsageError(f"{space.name} points need {space.dim} coordinates")
        return space.check_point(vals)
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(f"malformed point {text!r}: {exc}") from None


def parse_tangent(space: Manifold, p, text: str) -> np.ndarray:
    """Parse a tangent literal at ``p``."""
    vals = _floats(text)
    try:
        if isinstance(space, SPD):
            return space.check_tangent(p, _upper_to_sym(vals, space.n))
        if len(vals) == space.dim:
            return space.from_coords(p, vals)
        if len(vals) == space.size:
            return space.check_tangent(p, vals.reshape(space.point_shape))
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(f"malformed tangent {text!r}: {exc}") from None
    raise UsageError(f"{space.name} tangents need {space.dim} basis or {space.size} ambient entries")


def _take_point(space: Manifold, tokens: list) -> tuple:
    """Consume one point literal from ``':'``-split tokens."""
    if not tokens:
        raise UsageError("missing point literal")
    if tokens[0] in POINT_PREFIXES:
        if len(tokens) < 2:
            raise UsageError(f"{tokens[0]}: needs coordinates")
        return parse_point(space, tokens[0] + ":" + tokens[1]), tokens[2:]
    return parse_point(space, tokens[0]), tokens[1:]


def parse_ray(space: Manifold, text: str) -> Ray:
    """``PT:DIR``; the direction is normalized."""
    p, rest = _take_point(space, text.split(":"))
    if len(rest) != 1:
        raise UsageError(f"malformed ray {text!r}; expected PT:DIR")
    try:
        return make_ray(space, p, parse_tangent(space, p, rest[0]))
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(f"malformed ray {text!r}: {exc}") from None


def parse_function(space: Manifold, text: str, p) -> FunctionSpec:
    """Function grammar: ``radial:quadratic:A | radial:power:Q | radial:linear:C |
    radial:expm1 | busemann:RAY | halfdistsq | logdet | gram:Z:X``.

    Radial functions are centred at ``p``.
    """
    head, _, rest = text.partition(":")
    try:
        if head == "radial":
            return FunctionSpec.radial(parse_hspec(rest), p, space)
        if head == "halfdistsq" and not rest:
            return FunctionSpec.half_dist_sq(p, space)
        if head == "logdet" and not rest:
            return FunctionSpec.logdet(space)
        if head == "busemann":
            return FunctionSpec.busemann_of(parse_ray(space, rest))
        if head == "gram":
            z, tokens = _take_point(space, rest.split(":"))
            x, tokens = _take_point(space, tokens)
            if tokens:
                raise UsageError(f"malformed gram spec {text!r}")
            return FunctionSpec.gram(z, x, space)
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(f"bad function {text!r}: {exc}") from None
    raise UsageError(f"unknown function {text!r}")


def _space(name: str, k: float | None = None) -> Manifold:
    try:
        space = space_from_name(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if k is not None:
        if not isinstance(space, Hyperbolic):
            raise UsageError("--k applies to hyperbolic spaces only")
        if not k > 0:
            raise UsageError("--k must be positive")
        space = Hyperbolic(space.dim, k=k)
    return space


def _budget(text: str | None) -> SearchBudget:
    try:
        return SearchBudget.parse(text or "")
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- output ---------------------------------------------------------------------
def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)


def _format(args) -> str:
    if args.format:
        return args.format
    return "csv" if args.out and args.out.endswith(".csv") else "json"


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# -- commands ---------------------------------------------------------------------
def cmd_verify(args) -> tuple:
    result = run_suite(args.space, args.suite, args.seed)
    return dumps(result, _format(args)), result.ok


def cmd_conjugate(args) -> tuple:
    space = _space(args.space)
    budget = _budget(args.budget)
    p = parse_point(space, args.p)
    f = parse_function(space, args.fn, p)
    radial = f.is_radial
    if args.points:
        try:
            with open(args.points, encoding="utf-8") as fh:
                lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
        except OSError as exc:
            raise UsageError(f"cannot read {args.points}: {exc}") from None
        labels = [[ln] for ln in lines]
        points = [parse_point(space, ln) for ln in lines]
        header = ["point"]
    else:
        if space.dim != 2:
            raise UsageError("--grid needs a two-dimensional space")
        n = args.grid
        if n < 2:
            raise UsageError("--grid needs N >= 2")
        basis = space.tangent_basis(p)
        labels, points = [], []
        for r in np.linspace(0.0, args.radius, n):
            for th in 2.0 * np.pi * np.arange(n) / n:
                v = r * (np.cos(th) * basis[0] + np.sin(th) * basis[1])
                labels.append([float(r), float(th)])
                points.append(space.exp(p, v))
        header = ["r", "theta"]

    rows, ok = [], True
    for label, x in zip(labels, points):
        val, _ = conjugate(f, p, x, budget, seed=args.seed)
        shown = val.as_float(diverging_as_inf=True)
        oracle = diff = ""
        if radial:
            oracle = radial_conjugate(f.h, p, x, space, budget).as_float()
            if math.isinf(shown) and math.isinf(oracle):
                diff = 0.0
            else:
                diff = abs(shown - oracle)
            ok = ok and diff <= args.tol
        rows.append(label + [float(shown), oracle if oracle == "" else float(oracle),
                             diff if diff == "" else float(diff)])
    text = _rows_csv(header + ["conjugate", "radial_oracle", "abs_diff"], rows)
    return text, ok


def cmd_nonlinearity(args) -> tuple:
    space = _space(args.space)
    if isinstance(space, Hyperbolic):
        space = _space(args.space, args.k)
    budget = _budget(args.budget)
    if args.radius <= 0:
        raise UsageError("--radius must be positive")
    if isinstance(space, Hyperbolic):
        expected = nonlinearity_oracle(args.radius, space.k)
    elif isinstance(space, Euclidean):
        expected = 0.0
    else:
        raise UsageError("nonlinearity oracles exist on hyperbolic and Euclidean spaces only")
    tol = 2e-3 if isinstance(space, Hyperbolic) else 1e-9
    result = SuiteResult("nonlinearity", args.space, args.seed)
    start = time.perf_counter()
    o = space.origin()
    rng = np.random.default_rng(args.seed)
    for j in range(args.directions):
        y = space.exp(o, args.radius * space.random_unit_tangent(o, rng))
        val = nonlinearity(space, o, y, budget, seed=args.seed)
        result.add(f"N_at_radius_dir{j:02d}", expected, val, tol,
                   abs(val - expected) <= tol, {"y": y})
    bound = nonlinearity_bound(space, o, args.radius, n=args.directions, budget=budget,
                               seed=args.seed)
    # N depends on d(y, p) only and decreases in it, so the bound sits at d = R
    result.add("lower_bound_C_R", expected, bound, tol, abs(bound - expected) <= tol)
    result.runtime_ms = 1e3 * (time.perf_counter() - start)
    result = result.ordered()
    return dumps(result, _format(args)), result.ok


def _curvature_oracle(space: Manifold, i: int, j: int | None = None):
    """Expected sectional (pair ``i, j``) or Ricci (``j is None``) value for
    basis vectors at any point, or ``None`` when only the sign is known."""
    if isinstance(space, Euclidean):
        return 0.0
    if isinstance(space, Hyperbolic):
        return -space.k ** 2
    if isinstance(space, Product):
        d1 = space.factors[0].dim
        f1, f2 = space.factors
        if j is None:
            m, idx = (f1, i) if i < d1 else (f2, i - d1)
            if m.dim < 2:
                return 0.0
            sub = _curvature_oracle(m, idx)
            # the other factor contributes flat planes
            return None if sub is None else sub * (m.dim - 1) / (space.dim - 1)
        if (i < d1) != (j < d1):
            return 0.0
        m = f1 if i < d1 else f2
        return _curvature_oracle(m, i if i < d1 else i - d1, j if i < d1 else j - d1)
    return None


def cmd_curvature(args) -> tuple:
    space = _space(args.space)
    x = parse_point(space, args.point)
    result = SuiteResult("curvature", args.space, args.seed)
    start = time.perf_counter()
    basis = space.tangent_basis(x)
    for i in range(space.dim):
        for j in range(i + 1, space.dim):
            val = float(space.sectional(x, basis[i], basis[j]))
            exp = _curvature_oracle(space, i, j)
            if exp is None:
                result.add(f"sectional_{i}_{j}", "property", val, 1e-12, val <= 1e-12)
            else:
                result.add(f"sectional_{i}_{j}", exp, val, 1e-10, abs(val - exp) <= 1e-10)
    if space.dim >= 2:
        for i in range(space.dim):
            val = float(space.ricci_dir(x, basis[i]))
            exp = _curvature_oracle(space, i)
            if exp is None:
                result.add(f"ricci_{i}", "property", val, 1e-12, val <= 1e-12)
            else:
                result.add(f"ricci_{i}", exp, val, 1e-10, abs(val - exp) <= 1e-10)
        val, v = zero_ricci_direction(space, x, SearchBudget(tol=1e-12), seed=args.seed)
        exp = space.k ** 2 if isinstance(space, Hyperbolic) else 0.0
        tol = 1e-9 if isinstance(space, Hyperbolic) else 1e-10
        result.add("min_abs_ricci", exp, val, tol, abs(val - exp) <= tol, {"direction": v})
    result.runtime_ms = 1e3 * (time.perf_counter() - start)
    result = result.ordered()
    return dumps(result, _format(args)), result.ok


def cmd_busemann_levels(args) -> tuple:
    space = _space(args.space)
    if space.dim != 2 or not isinstance(space, (Hyperbolic, Euclidean)):
        raise UsageError("busemann-levels supports h2 and e2")
    ray = parse_ray(space, args.ray)
    n = args.grid
    if n < 2:
        raise UsageError("--grid needs N >= 2")
    rows = []
    if isinstance(space, Hyperbolic):
        # Poincare disk coordinates (u, v) -> hyperboloid point
        k = space.k
        for u in np.linspace(-args.extent, args.extent, n):
            for v in np.linspace(-args.extent, args.extent, n):
                s = u * u + v * v
                if s >= 1.0:
                    continue
                x = np.array([2 * u, 2 * v, 1 + s]) / ((1 - s) * k)
                rows.append([float(u), float(v), float(busemann(ray, x))])
    else:
        for u in np.linspace(-3.0, 3.0, n):
            for v in np.linspace(-3.0, 3.0, n):
                rows.append([float(u), float(v), float(busemann(ray, np.array([u, v])))])
    return _rows_csv(["u", "v", "busemann"], rows), True


def cmd_subdiff(args) -> tuple:
    space = _space(args.space)
    budget = _budget(args.budget)
    p = parse_point(space, args.p)
    f = parse_function(space, args.fn, p)
    x = parse_point(space, args.x)
    v = parse_tangent(space, x, args.v)
    start = time.perf_counter()
    rep = is_subgradient(f, p, x, v, budget, seed=args.seed)
    result = SuiteResult("subdiff", args.space, args.seed)
    m = rep.metrics
    result.add("min_slack", "property", m["min_slack"], -budget.tol, m["inequality_ok"],
               {"z": rep.witness["z"]})
    result.add("equality_residual", 0.0, m["equality_residual"], budget.tol, m["equality_ok"],
               {"y": rep.witness["y"]})
    result.runtime_ms = 1e3 * (time.perf_counter() - start)
    result = result.ordered()
    return dumps(result, _format(args)), result.ok


# -- parser ---------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="horoduality",
                                 description="Busemann convex duality on Hadamard spaces.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--out", default=None, help="output file (default: stdout)")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("--space", required=True, choices=SPACES)
    sp.add_argument("--suite", required=True, choices=sorted(SUITES) + ["all"])
    sp.add_argument("--format", choices=("json", "csv"), default=None)
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("conjugate", help="conjugate values on points or a polar grid")
    sp.add_argument("--space", required=True)
    sp.add_argument("--fn", required=True, help="function spec, e.g. radial:quadratic:1")
    sp.add_argument("--p", required=True, help="base point literal")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--points", help="file with one point literal per line")
    src.add_argument("--grid", type=int, help="N radii times N angles about p (2D spaces)")
    sp.add_argument("--radius", type=float, default=2.0, help="grid radius")
    sp.add_argument("--budget", default="", help="overrides, e.g. t_max=24,tol=1e-7")
    sp.add_argument("--tol", type=float, default=1e-3, help="pass threshold on abs_diff")
    common(sp)
    sp.set_defaults(func=cmd_conjugate)

    sp = sub.add_parser("nonlinearity", help="nonlinearity at a given distance")
    sp.add_argument("--space", default="h2")
    sp.add_argument("--k", type=float, default=1.0, help="curvature scale (sectional -k^2)")
    sp.add_argument("--radius", type=float, required=True, help="distance d(y, p)")
    sp.add_argument("--directions", type=int, default=4)
    sp.add_argument("--budget", default="")
    sp.add_argument("--format", choices=("json", "csv"), default=None)
    common(sp)
    sp.set_defaults(func=cmd_nonlinearity)

    sp = sub.add_parser("curvature", help="sectional and Ricci curvature at a point")
    sp.add_argument("--space", required=True)
    sp.add_argument("--point", default="origin")
    sp.add_argument("--format", choices=("json", "csv"), default=None)
    common(sp)
    sp.set_defaults(func=cmd_curvature)

    sp = sub.add_parser("busemann-levels", help="Busemann values on a grid (CSV)")
    sp.add_argument("--space", default="h2")
    sp.add_argument("--ray", required=True, help="PT:DIR")
    sp.add_argument("--grid", type=int, required=True)
    sp.add_argument("--extent", type=float, default=0.95,
                    help="Poincare disk radius covered on h2; e2 covers [-3, 3]^2")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_busemann_levels)

    sp = sub.add_parser("subdiff", help="sampled subgradient membership test")
    sp.add_argument("--space", required=True)
    sp.add_argument("--fn", required=True)
    sp.add_argument("--p", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--v", required=True)
    sp.add_argument("--budget", default="")
    sp.add_argument("--format", choices=("json", "csv"), default=None)
    common(sp)
    sp.set_defaults(func=cmd_subdiff)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, ok = args.func(args)
        _emit(text, args.out)
    except UsageError as exc:
        print(f"horoduality: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"horoduality: error: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


def run(argv) -> int:
    """``main`` that also maps argparse exits to return codes."""
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2


if __name__ == "__main__":
    sys.exit(main())
