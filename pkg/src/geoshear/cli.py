"""Command-line interface: ``geoshear transform|shear|check|bounds|plot``.

Exit codes: 0 all checks passed, 1 a bound was violated or a witness was
found, 2 invalid input, 3 numerical failure, 4 some check inconclusive,
5 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from dataclasses import dataclass, field

from . import __version__, bounds, exprlang
from .criteria import (
    CERTIFIED,
    INCONCLUSIVE,
    VIOLATED,
    DiskGrid,
    Params,
    becker_analytic_functional,
    becker_harmonic_functional,
    becker_necessity_checker,
    becker_sufficient_checker,
    convexity_checker,
    lemma_b_check,
    lemma_e_scan,
    norm_hyperbolic,
    norm_sup,
    stable_sweep,
    sup_functional,
)
from .funcore import FAMILIES, AnalyticFn, BranchError, DomainError, builtin, from_expr
from .quadrature import ConvergenceError
from .shear import HarmonicShear, build_F
from .svgplot import render_svg
from .transforms import (
    IntegralFn,
    NormalizationError,
    PowerPrimitive,
    TransformSpec,
    cesaro_transform,
)
from .verify import (
    NonSimpleBoundaryError,
    PointMap,
    boundary_simplicity,
    closed_form_compare,
    convex_in_direction_test,
    injectivity_test,
    sense_preserving_scan,
)

SCHEMA_VERSION = "1.0"

EXIT_OK, EXIT_VIOLATED, EXIT_INPUT, EXIT_NUMERIC, EXIT_INCONCLUSIVE, EXIT_IO = 0, 1, 2, 3, 4, 5

CHECKS = (
    "becker-harmonic",
    "becker-analytic",
    "shu-sweep",
    "necessity-sweep",
    "convexity-sweep",
    "lemma-b",
    "lemma-e-chd",
    "inject",
    "boundary",
    "sense",
    "convex-dir",
    "bounds",
    "closed-form",
)

# known orders of starlikeness; convex maps are starlike of order 1/2
DEFAULT_DELTA = {"cayley": 0.5, "koebe": 0.0, "twostrip": 0.0, "identity": 0.5, "logmap": 0.5}

FIELDS = ("phi", "phi_expr", "w", "alpha", "beta", "theta", "delta", "gamma", "c",
          "lambda_count", "grid_radii", "grid_angles", "seed", "tol", "z", "checks",
          "theorem", "allow_out_of_range", "norm_w", "norm_w_star", "mu", "nu", "direction",
          "r_test", "n_boundary", "n_interior")


class InputError(ValueError):
    pass


def parse_number(text) -> complex:
    """Read a constant such as ``0.5``, ``-1/2``, ``0.3+0.4i`` or ``pi/4``."""
    if isinstance(text, (int, float)):
        return complex(text)
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    e = exprlang.parse(str(text))
    if exprlang.depends_on_z(e):
        raise InputError(f"expected a constant, got {text!r}")
    return complex(exprlang.evaluate(e, 0j))


def parse_real(text, name) -> float:
    v = parse_number(text)
    if abs(v.imag) > 1e-15:
        raise InputError(f"{name} must be real, got {text!r}")
    return v.real


@dataclass
class Scenario:
    phi: str | None = "identity"
    phi_expr: str | None = None
    w: str = "0"
    alpha: float = 0.0
    beta: float = 0.0
    theta: float = 0.0
    delta: float | None = None
    gamma: float = 2.0
    c: float = 0.0
    lambda_count: int = 64
    grid_radii: int = 200
    grid_angles: int = 512
    seed: int = 0
    tol: float = 1e-10
    z: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    theorem: str | None = None
    allow_out_of_range: bool = False
    norm_w: float | None = None
    norm_w_star: float | None = None
    mu: float | None = None
    nu: float | None = None
    direction: float = 0.0
    r_test: float = 0.995
    n_boundary: int = 4096
    n_interior: int = 20000
    params: Params | None = field(default=None, repr=False)

    def echo(self) -> dict:
        return {k: getattr(self, k) for k in FIELDS}


def _scenario_from(args) -> Scenario:
    values = {}
    for k in FIELDS:
        v = getattr(args, k, None)
        if v is not None and v != []:
            values[k] = v
    if getattr(args, "scenario", None):
        try:
            with open(args.scenario, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read scenario {args.scenario}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"scenario is not valid JSON: {exc}") from exc
        unknown = set(data) - set(FIELDS) - {"plot", "description", "expect_exit"}
        if unknown:
            raise InputError(f"unknown scenario fields: {sorted(unknown)}")
        values.update({k: v for k, v in data.items() if k in FIELDS})
    if "phi_expr" in values and "phi" not in values:
        values["phi"] = None
    sc = Scenario()
    for k, v in values.items():
        setattr(sc, k, v)
    for k in ("alpha", "beta", "theta", "gamma", "c", "tol", "direction", "r_test"):
        setattr(sc, k, parse_real(getattr(sc, k), k))
    for k in ("delta", "norm_w", "norm_w_star", "mu", "nu"):
        if getattr(sc, k) is not None:
            setattr(sc, k, parse_real(getattr(sc, k), k))
    checks = []
    for item in sc.checks:
        checks += [c.strip() for c in str(item).split(",") if c.strip()]
    if "all" in checks:
        checks = list(CHECKS)
    bad = [c for c in checks if c not in CHECKS]
    if bad:
        raise InputError(f"unknown checks {bad}; choose from {', '.join(CHECKS)}")
    sc.checks = checks
    if sc.phi is not None and sc.phi not in FAMILIES:
        raise InputError(f"unknown builtin {sc.phi!r}; choose from {', '.join(FAMILIES)}")
    if sc.phi is None and not sc.phi_expr:
        raise InputError("give --phi or --phi-expr")
    if sc.delta is None and sc.phi is not None and not sc.phi_expr:
        sc.delta = DEFAULT_DELTA[sc.phi]
    params = Params(sc.alpha, sc.beta, sc.theta, sc.delta if sc.delta is not None else 0.0,
                    sc.gamma, sc.c, 1.0, sc.allow_out_of_range)
    sc.params = params
    return sc


def _phi(sc: Scenario) -> AnalyticFn:
    return from_expr(sc.phi_expr) if sc.phi_expr else builtin(sc.phi)


def _spec(sc: Scenario) -> TransformSpec:
    return TransformSpec(sc.alpha, sc.beta, sc.theta, _phi(sc))


def _grid(sc: Scenario) -> DiskGrid:
    return DiskGrid(n_radii=int(sc.grid_radii), n_angles=int(sc.grid_angles))


def _value_with_error(f: AnalyticFn, z: complex):
    inner = getattr(f, "f", None)
    if isinstance(f, IntegralFn):
        r = f.evaluate(z)
        return r.value, r.error_estimate
    if isinstance(inner, IntegralFn):
        r = inner.evaluate(f.inner * z)
        return f.outer * r.value, r.error_estimate
    return complex(f(z)), 0.0


def _fmt(v: complex) -> str:
    if v.imag == 0:
        return repr(v.real)
    return f"{v.real!r}{'+' if v.imag >= 0 else '-'}{abs(v.imag)!r}i"


def _points(sc: Scenario):
    if not sc.z:
        raise InputError("give at least one --z")
    return [parse_number(z) for z in sc.z]


def _emit(args, payload: dict, text: str | None):
    body = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(body + "\n")
    if args.json or (text is None and not args.out):
        print(body)
    elif text is not None:
        print(text)


def cmd_transform(args, sc: Scenario) -> int:
    f = cesaro_transform(_spec(sc), tol=sc.tol)
    rows = []
    for z in _points(sc):
        v, err = _value_with_error(f, z)
        rows.append({"z": [z.real, z.imag], "value": [v.real, v.imag], "error_estimate": err})
    text = "\n".join(f"{_fmt(complex(*r['z']))}\t{_fmt(complex(*r['value']))}\t{r['error_estimate']:.3g}"
                     for r in rows)
    _emit(args, {"schema_version": SCHEMA_VERSION, "command": "transform", "rows": rows}, text)
    return EXIT_OK


def _shear(sc: Scenario) -> HarmonicShear:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return build_F(_spec(sc), from_expr(sc.w), tol=sc.tol)


def cmd_shear(args, sc: Scenario) -> int:
    s = _shear(sc)
    rows = []
    for z in _points(sc):
        h, g = complex(s.h(z)), complex(s.g(z))
        fv = h + g.conjugate()
        rows.append({"z": [z.real, z.imag], "F": [fv.real, fv.imag], "H": [h.real, h.imag],
                     "G": [g.real, g.imag], "jacobian": float(s.jacobian(z))})
    text = "\n".join(
        f"{_fmt(complex(*r['z']))}\tF={_fmt(complex(*r['F']))}\tH={_fmt(complex(*r['H']))}"
        f"\tG={_fmt(complex(*r['G']))}\tJ={r['jacobian']!r}" for r in rows)
    payload = {"schema_version": SCHEMA_VERSION, "command": "shear", "rows": rows, "warnings": s.warnings}
    _emit(args, payload, text)
    return EXIT_OK


def _norms(sc: Scenario, grid: DiskGrid):
    w = from_expr(sc.w)
    wn = sc.norm_w if sc.norm_w is not None else norm_sup(w, grid)
    ws = sc.norm_w_star if sc.norm_w_star is not None else norm_hyperbolic(w, grid)
    return min(wn, 1.0), min(ws, 1.0)


def _bound_results(sc: Scenario, theorem: str | None, grid: DiskGrid):
    needs_delta = {"thm34", "thm37", "ctc"}
    names = [theorem] if theorem else list(bounds.THEOREMS)
    out = []
    for name in names:
        if name not in bounds.THEOREMS:
            raise InputError(f"unknown theorem {name!r}; choose from {', '.join(bounds.THEOREMS)}")
        if name in needs_delta and sc.delta is None:
            raise InputError(f"{name} needs --delta for an expression-defined phi")
        b = sc.beta
        if name == "thm31":
            r = bounds.thm31(b)
        elif name == "thm34":
            r = bounds.thm34(b, sc.delta, sc.alpha)
        elif name == "thm37":
            r = bounds.thm37(b, sc.delta, _norms(sc, grid)[0], sc.alpha)
        elif name == "lif_univ":
            r = bounds.lif_univ(sc.gamma, b, *_norms(sc, grid))
        elif name == "shu":
            r = bounds.shu(b, *_norms(sc, grid))
        elif name == "lif_shu":
            r = bounds.lif_shu(sc.gamma, b, *_norms(sc, grid))
        elif name == "ctc":
            r = bounds.ctc(sc.delta, b, sc.c, sc.alpha)
        else:
            r = bounds.shcc(b)
        d = r.as_dict()
        if r.holds is None and r.alpha_max is not None:
            d["admits_alpha"] = r.admits(sc.alpha)
        else:
            d["admits_alpha"] = bool(r.holds)
        out.append(d)
    return out


def cmd_bounds(args, sc: Scenario) -> int:
    results = _bound_results(sc, sc.theorem, _grid(sc))
    text = "\n".join(f"{r['theorem']}\t{r['alpha_max']!r}\t{r['alpha_max_exact']}"
                     + (f"\tcase={r['case']}" if r["case"] else "") for r in results)
    _emit(args, {"schema_version": SCHEMA_VERSION, "command": "bounds", "results": results}, text)
    return EXIT_OK


def _result_entry(name: str, verdict: str, detail: dict) -> dict:
    return {"check": name, "verdict": verdict, "result": detail}


def _run_check(name: str, sc: Scenario, s: HarmonicShear, grid: DiskGrid) -> dict:
    pm = PointMap(s, r_test=sc.r_test, n_boundary=int(sc.n_boundary),
                  n_interior=int(sc.n_interior), seed=int(sc.seed))
    if name == "becker-harmonic":
        rep = sup_functional(lambda z: becker_harmonic_functional(s, z), grid,
                             name=name, bound=1.0)
        return _result_entry(name, rep.verdict, rep.as_dict())
    if name == "becker-analytic":
        rep = sup_functional(lambda z: becker_analytic_functional(s.phi, z), grid,
                             name=name, bound=1.0)
        return _result_entry(name, rep.verdict, rep.as_dict())
    if name == "shu-sweep":
        rep = stable_sweep(s, becker_sufficient_checker(grid), int(sc.lambda_count))
        return _result_entry(name, rep.verdict, rep.as_dict())
    if name == "necessity-sweep":
        # a falsification test: no violating lambda means it passed, not that
        # the map is univalent
        rep = stable_sweep(s, becker_necessity_checker(grid), int(sc.lambda_count))
        return _result_entry(name, VIOLATED if rep.verdict == VIOLATED else "passed", rep.as_dict())
    if name == "convexity-sweep":
        rep = stable_sweep(s, convexity_checker(grid), int(sc.lambda_count))
        return _result_entry(name, rep.verdict, rep.as_dict())
    if name == "closed-form":
        exponent = closed_form_exponent(sc)
        if exponent is None:
            raise InputError("closed-form needs phi in cayley, identity or koebe")
        rep = closed_form_compare(s.phi, PowerPrimitive(exponent, sc.theta), seed=int(sc.seed))
        detail = rep.as_dict()
        detail["tolerance"] = CLOSED_FORM_TOL
        return _result_entry(name, "passed" if rep.max_error <= CLOSED_FORM_TOL else VIOLATED, detail)
    if name == "lemma-b":
        rep = lemma_b_check(s, sc.c, grid)
        return _result_entry(name, rep.verdict, rep.as_dict())
    if name == "lemma-e-chd":
        pairs = [(sc.mu, sc.nu)] if sc.mu is not None and sc.nu is not None else None
        rep = lemma_e_scan(s.phi, grid, pairs=pairs)
        return _result_entry(name, rep.verdict, rep.as_dict())
    if name == "inject":
        res = injectivity_test(pm)
        return _result_entry(name, VIOLATED if res.collision else "passed", res.as_dict())
    if name == "boundary":
        res = boundary_simplicity(pm)
        return _result_entry(name, "passed" if res.simple else VIOLATED, res.as_dict())
    if name == "sense":
        rep = sense_preserving_scan(s, grid)
        return _result_entry(name, rep.verdict, rep.as_dict())
    if name == "convex-dir":
        try:
            res = convex_in_direction_test(pm, sc.direction)
        except NonSimpleBoundaryError as exc:
            return _result_entry(name, VIOLATED, {"error": str(exc)})
        return _result_entry(name, "passed" if res.convex else VIOLATED, res.as_dict())
    if name == "bounds":
        results = _bound_results(sc, None, grid)
        sufficient = {"thm31", "thm37", "lif_univ", "shu", "lif_shu", "ctc", "shcc"}
        ok = any(r["admits_alpha"] for r in results if r["theorem"] in sufficient)
        return _result_entry(name, CERTIFIED if ok else INCONCLUSIVE, {"results": results})
    raise InputError(f"unknown check {name!r}")


CLOSED_FORM_TOL = 1e-9


def closed_form_exponent(sc: Scenario):
    """``kappa`` with transform derivative ``(1 - e^{i theta} z)^(-kappa)``,
    for the families where the transform integrand is a pure power."""
    if sc.phi_expr:
        return None
    return {
        "cayley": sc.alpha * (1 + sc.beta),
        "identity": sc.alpha * sc.beta,
        "koebe": sc.alpha * (2 + sc.beta),
    }.get(sc.phi)


def exit_code_for(verdicts) -> int:
    verdicts = list(verdicts)
    if VIOLATED in verdicts:
        return EXIT_VIOLATED
    if INCONCLUSIVE in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_check(args, sc: Scenario) -> int:
    start = time.perf_counter()
    if not sc.checks:
        raise InputError("give --check NAME (or --check all)")
    s = _shear(sc)
    grid = _grid(sc)
    results = [_run_check(name, sc, s, grid) for name in sc.checks]
    code = exit_code_for(r["verdict"] for r in results)
    params = sc.params
    warnings_out = list(s.warnings)
    if params.out_of_range:
        warnings_out.append(f"out-of-range parameters: {', '.join(params.out_of_range)}")
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "geoshear", "version": __version__},
        "command": "check",
        "scenario": sc.echo(),
        "checks": results,
        "warnings": warnings_out,
        "exit_code": code,
        "wall_time": round(time.perf_counter() - start, 3),
    }
    text = None
    if args.out and not args.json:
        text = "\n".join(f"{r['check']}: {r['verdict']}" for r in results)
    _emit(args, report, text)
    return code


def cmd_plot(args, sc: Scenario) -> int:
    if not args.out:
        raise InputError("plot needs --out path.svg")
    if sc.w.strip() == "0":
        mapping = cesaro_transform(_spec(sc), tol=sc.tol)
    else:
        mapping = _shear(sc)
    title = f"phi={sc.phi_expr or sc.phi} w={sc.w} alpha={sc.alpha} beta={sc.beta} theta={sc.theta}"
    svg = render_svg(mapping, title, sc.r_test)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(args.out)
    return EXIT_OK


COMMANDS = {
    "transform": cmd_transform,
    "shear": cmd_shear,
    "check": cmd_check,
    "bounds": cmd_bounds,
    "plot": cmd_plot,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="JSON scenario file; its fields override flags")
    common.add_argument("--phi", choices=FAMILIES, help="builtin function family")
    common.add_argument("--phi-expr", help="expression in z for the function to transform")
    common.add_argument("--w", help="dilatation generator w(z) (default 0)")
    for name in ("alpha", "beta", "theta", "delta", "gamma", "c", "mu", "nu", "direction"):
        common.add_argument(f"--{name}")
    common.add_argument("--norm-w", help="override the grid estimate of sup|w|")
    common.add_argument("--norm-w-star", help="override the grid estimate of the hyperbolic norm")
    common.add_argument("--lambda-count", type=int)
    common.add_argument("--grid-radii", type=int)
    common.add_argument("--grid-angles", type=int)
    common.add_argument("--r-test", dest="r_test")
    common.add_argument("--n-boundary", type=int)
    common.add_argument("--n-interior", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--tol")
    common.add_argument("--z", action="append", default=[], help="evaluation point (repeatable)")
    common.add_argument("--check", dest="checks", action="append", default=[],
                        help=f"check name (repeatable or comma separated): {', '.join(CHECKS)}, all")
    common.add_argument("--theorem", choices=sorted(bounds.THEOREMS))
    common.add_argument("--allow-out-of-range", action="store_true", default=None,
                        help="accept negative alpha or beta for counterexample studies")
    common.add_argument("--out", help="output file")
    common.add_argument("--json", action="store_true", help="print JSON to stdout")

    parser = argparse.ArgumentParser(prog="geoshear", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"geoshear {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        sc = _scenario_from(args)
        return COMMANDS[args.command](args, sc)
    except OSError as exc:
        print(f"geoshear: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InputError, exprlang.ExprSyntaxError, exprlang.UnknownIdentifierError,
            NormalizationError, TypeError) as exc:
        print(f"geoshear: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, BranchError, DomainError, ArithmeticError) as exc:
        print(f"geoshear: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"geoshear: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
