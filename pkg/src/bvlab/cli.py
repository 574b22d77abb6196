"""Command-line entry point: ``bvlab check | cohomology | poisson``.

Exit codes: 0 every identity holds, 1 an identity fails, 2 a hypothesis fails
(non-diagonalizable operator), 3 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

from .cohomology import (
    ChainComplex,
    NotDiagonalizable,
    cohomology,
    compare_full_vs_invariant,
    invariant_subcomplex,
    kernel,
    operator_matrices,
    solve,
)
from .gerstenhaber import CheckReport
from .lie import (
    PRESETS,
    InputError,
    LieStructureError,
    derivation_extension,
    intrinsic_biderivation,
    load_bialgebra,
    preset,
)
from .poisson import (
    PoissonBivector,
    PoissonError,
    PolyLieRinehart,
    TruncationWindow,
    WindowError,
    modular_class,
    planar_fields,
    planar_relations,
    rotation_invariant_subcomplex,
    unimodularity_probe,
)
from .poly import PolyParseError, format_fraction, parse_fraction
from .suites import bialgebra_reports, poisson_reports, random_anticommutator_suite

EXIT_OK, EXIT_FAIL, EXIT_HYPOTHESIS, EXIT_INPUT = 0, 1, 2, 3
POISSON_PRESETS = {"r2_squared": "x^2+y^2", "r2_symplectic": "1"}


@dataclass
class RunConfig:
    command: str
    preset: str | None
    file: str | None
    bivector: str | None
    lam: Fraction
    max_degree: int | None
    invariant: bool
    degrees: tuple[int, int] | None
    fmt: str
    seed: int
    cases: int


class Output:
    """Buffers table lines and a JSON document; emitted once at the end."""

    def __init__(self, fmt: str):
        self.fmt = fmt
        self.lines: list[str] = []
        self.doc: dict = {}

    def line(self, text: str = "") -> None:
        self.lines.append(text)

    def emit(self, stream) -> None:
        if self.fmt == "json":
            stream.write(json.dumps(self.doc, sort_keys=True, indent=2) + "\n")
        else:
            stream.write("\n".join(self.lines) + "\n")


def _degrees(text: str) -> tuple[int, int]:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"empty degree range {text!r}")
    return lo, hi


def _fraction(text: str) -> Fraction:
    try:
        return parse_fraction(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bvlab", description="Exact Gerstenhaber/BV calculus and cohomology.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, bialgebra=True):
        src = p.add_mutually_exclusive_group()
        src.add_argument("--preset", help="named structure")
        if bialgebra:
            src.add_argument("--file", help="JSON bialgebra description")
        src.add_argument("--bivector", help="planar Poisson bivector coefficient f in f*dx^dy")
        p.add_argument("--lambda", dest="lam", type=_fraction, default=Fraction(1), help="parameter of aff2_case3 (p/q, nonzero)")
        p.add_argument("--format", dest="fmt", choices=("table", "json"), default="table")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized suites")

    p = sub.add_parser("check", help="run every identity suite for the input")
    common(p)
    p.add_argument("--max-degree", type=int, default=3, help="coefficient window for polynomial input")
    p.add_argument("--cases", type=int, default=50, help="random bivectors in the randomized suite")

    p = sub.add_parser("cohomology", help="cohomology of (Lambda g, d_delta)")
    common(p)
    p.add_argument("--invariant", action="store_true", help="also reduce to the D-invariant subcomplex")
    p.add_argument("--degrees", type=_degrees, help="degree range a..b")

    p = sub.add_parser("poisson", help="modular class, unimodularity and the rotation-invariant complex")
    common(p, bialgebra=False)
    p.add_argument("--max-degree", type=int, default=6, help="coefficient window N (>= 2)")
    return parser


def _config(args) -> RunConfig:
    return RunConfig(args.command, args.preset, getattr(args, "file", None), getattr(args, "bivector", None),
                     args.lam, getattr(args, "max_degree", None), getattr(args, "invariant", False),
                     getattr(args, "degrees", None), args.fmt, args.seed, getattr(args, "cases", 50))


# -- loading -------------------------------------------------------------------------

def _load_bialgebra(cfg: RunConfig):
    if cfg.file:
        return load_bialgebra(cfg.file), cfg.file
    if cfg.preset in POISSON_PRESETS:
        raise InputError(f"{cfg.preset} is a Poisson preset; use the poisson command or --bivector", "--preset")
    name = cfg.preset or "sl2_standard"
    return preset(name, cfg.lam), name


def _load_bivector(cfg: RunConfig) -> tuple[PolyLieRinehart, PoissonBivector, str]:
    lr = PolyLieRinehart(2)
    if cfg.bivector is not None:
        text = cfg.bivector
    elif cfg.preset in POISSON_PRESETS:
        text = POISSON_PRESETS[cfg.preset]
    elif cfg.preset is None:
        text = POISSON_PRESETS["r2_squared"]
    else:
        raise InputError(f"unknown Poisson preset {cfg.preset!r}; choose from {', '.join(POISSON_PRESETS)}", "--preset")
    f = lr.ring.parse(text)
    return lr, PoissonBivector.planar(lr, f), lr.ring.format(f)


# -- rendering -----------------------------------------------------------------------

def _report_lines(out: Output, reports: list[CheckReport]) -> None:
    width = max(len(r.identity) for r in reports)
    for r in reports:
        out.line(f"{'PASS' if r.holds else 'FAIL'}  {r.identity.ljust(width)}  checked {r.checked}")
        if not r.holds and r.witness is not None:
            w = r.witness.to_dict()
            out.line(f"      inputs: {', '.join(w['inputs'])}")
            out.line(f"      lhs: {w['lhs']}")
            out.line(f"      rhs: {w['rhs']}")


def _aligned(rows: list[tuple[str, ...]]) -> list[str]:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]


def _inner_form(g, D) -> str | None:
    """v with D = [v, -] if one exists."""
    n = g.dim
    # coordinates of [e_k, e_i], stacked over i
    matrix = []
    rhs = []
    for i in range(n):
        for j in range(n):
            matrix.append([g.generator_bracket(k, i).coeff(1 << j) for k in range(n)])
            rhs.append(D.images[i].coeff(1 << j))
    sol = solve(matrix, rhs)
    if sol is None:
        return None
    v = g.space.from_terms({1 << k: c for k, c in enumerate(sol) if c})
    return f"[{v.to_text()}, -]"


def _bialgebra_tables(out: Output, g, c, name: str) -> dict:
    D = intrinsic_biderivation(c, verify=False)
    rows = [("generator", "delta", "D")]
    for i, gname in enumerate(g.names):
        rows.append((gname, c.images[i].to_text(), D.images[i].to_text()))
    out.line(f"structure: {name}  (dim {g.dim})")
    for line in _aligned(rows):
        out.line("  " + line)
    inner = _inner_form(g, D)
    if D.is_zero():
        out.line("  D = 0 (involutive)")
    elif inner:
        out.line(f"  D = {inner}")
    doc = {"delta": {n: c.images[i].to_text() for i, n in enumerate(g.names)},
           "D": {n: D.images[i].to_text() for i, n in enumerate(g.names)},
           "D_inner": inner, "involutive": D.is_zero()}
    if c.r is not None:
        out.line(f"  r = {c.r.to_text()}")
        out.line(f"  H_r = {D.h_r.to_text()}   ([-,-](r) = {g.bracket_contraction(c.r).to_text()})")
        doc["r"] = c.r.to_text()
        doc["H_r"] = D.h_r.to_text()
        pd = derivation_extension(D)
        basis = g.full_basis()
        keys = basis.keys(2)
        inv = kernel(pd.matrix(keys, keys), len(keys))
        table = [("(Lambda^2 g)^D", "[r, -]")]
        doc["r_table"] = {}
        for vec in inv:
            v = g.space.from_qterms([(k, x) for k, x in zip(keys, vec) if x])
            img = g.bracket(c.r, v)
            table.append((v.to_text(), img.to_text()))
            doc["r_table"][v.to_text()] = img.to_text()
        for line in _aligned(table):
            out.line("  " + line)
    return doc


# -- commands ------------------------------------------------------------------------

def cmd_check(cfg: RunConfig, out: Output) -> int:
    if cfg.bivector is not None or cfg.preset in POISSON_PRESETS:
        n = cfg.max_degree if cfg.max_degree is not None else 3
        if n < 2:
            raise WindowError("--max-degree must be at least 2")
        lr, p, ftext = _load_bivector(cfg)
        reports = poisson_reports(lr, p, n)
        out.line(f"bivector: ({ftext}) * dx^dy   window: coefficient degree <= {n}")
        _report_lines(out, reports)
        suite = random_anticommutator_suite(cfg.seed, cfg.cases, 3, min(n, 3))
        failures = [(f, r) for f, rs in suite for r in rs if not r.holds]
        out.line(f"{'PASS' if not failures else 'FAIL'}  random bivectors: {cfg.cases} cases, seed {cfg.seed}, deg f <= 3")
        for f, r in failures[:1]:
            out.line(f"      f = {lr.ring.format(f)}: {r.identity}")
        out.doc = {"command": "check", "input": f"({ftext}) * dx^dy", "max_degree": n,
                   "reports": [r.to_dict() for r in reports],
                   "random_suite": {"seed": cfg.seed, "cases": cfg.cases, "failures": len(failures)}}
        ok = all(r.holds for r in reports) and not failures
    else:
        (g, c), name = _load_bialgebra(cfg)
        tables = _bialgebra_tables(out, g, c, name)
        reports = bialgebra_reports(g, c)
        _report_lines(out, reports)
        out.doc = {"command": "check", "input": name, "tables": tables, "reports": [r.to_dict() for r in reports]}
        ok = all(r.holds for r in reports)
    out.doc["all_pass"] = ok
    return EXIT_OK if ok else EXIT_FAIL


def cmd_cohomology(cfg: RunConfig, out: Output) -> int:
    if cfg.bivector is not None:
        raise InputError("cohomology takes a bialgebra; use the poisson command for bivectors", "--bivector")
    (g, c), name = _load_bialgebra(cfg)
    basis = g.full_basis()
    full = ChainComplex.from_operator(c.differential(), basis, name=f"{name}: d_delta")
    lo, hi = cfg.degrees if cfg.degrees else (0, g.dim)
    degrees = [k for k in range(lo, hi + 1) if k <= g.dim]
    report = cohomology(full, degrees)
    out.line(f"cohomology of (Lambda g, d_delta) for {name}")
    out.line(report.table())
    out.doc = {"command": "cohomology", "input": name, "full": report.to_dict()}
    if cfg.invariant:
        D = intrinsic_biderivation(c, verify=False)
        mats = operator_matrices(derivation_extension(D), basis, range(g.dim + 1))
        try:
            sub, cert = invariant_subcomplex(full, mats)
        except NotDiagonalizable as exc:
            out.line(f"hypothesis failure: {exc}")
            out.doc["hypothesis_failure"] = str(exc)
            return EXIT_HYPOTHESIS
        inv = cohomology(sub, degrees)
        same = compare_full_vs_invariant(full, mats, degrees)
        out.line("")
        out.line(f"D-invariant subcomplex: dims {sub.dims}")
        out.line(inv.table())
        out.line("")
        out.line("eigenvalue multiplicities of partial_D per degree:")
        for k, mult in sorted(cert.multiplicities.items()):
            out.line(f"  {k}: " + ", ".join(f"{format_fraction(l)} x{m}" for l, m in sorted(mult.items())))
        out.line(f"nonzero-eigenvalue summands acyclic: {cert.acyclic}")
        out.line(f"full and invariant cohomology agree on degrees {lo}..{hi}: {same}")
        out.doc.update({"invariant": inv.to_dict(), "invariant_dims": sub.dims, "certificate": cert.to_dict(),
                        "agree": same})
        if not (cert.acyclic and same):
            return EXIT_FAIL
    return EXIT_OK


def cmd_poisson(cfg: RunConfig, out: Output) -> int:
    n = cfg.max_degree if cfg.max_degree is not None else 6
    if n < 2:
        raise WindowError("--max-degree must be at least 2")
    lr, p, ftext = _load_bivector(cfg)
    x = modular_class(lr, p)
    probe = unimodularity_probe(lr, p, TruncationWindow(n))
    out.line(f"Pi = ({ftext}) * dx^dy")
    out.line(f"X_Delta = Delta(Pi) = {x.to_text()}")
    out.line(f"unimodularity (a of degree <= {n}): {probe.summary(lr.ring)}")
    if probe.certificate:
        out.line("  certificate y (y^T A = 0, y^T X_Delta != 0): "
                 + ", ".join(f"{format_fraction(c)} on {label}" for label, c in probe.certificate))
    out.doc = {"command": "poisson", "bivector": f"({ftext}) * dx^dy", "x_delta": x.to_text(),
               "unimodularity": probe.to_dict(lr.ring)}
    if p.pi == planar_fields(lr)["Pi"]:
        complex_ = rotation_invariant_subcomplex(n)
        report = cohomology(complex_)
        planar = planar_relations(lr)
        out.line("")
        out.line(f"rotation-invariant subcomplex (degree k coefficients <= {n} + k), dims {complex_.dims}")
        out.line(report.table())
        out.line("")
        out.line("dtheta = y*dx - x*dy, D_r = x*dx + y*dy, Vol = dx^dy, Pi = (x^2 + y^2) * Vol")
        sign = "+" if planar.orientation > 0 else "-"
        out.line(f"X_Delta = 2 dtheta = {sign}2 (x*dy - y*dx)")
        rows = [("generator", "Delta")] + [(k, v.to_text()) for k, v in planar.bv_values.items()]
        for line in _aligned(rows):
            out.line("  " + line)
        for rel, holds in planar.relations.items():
            out.line(f"  {'PASS' if holds else 'FAIL'}  {rel}")
        out.doc.update({"betti": report.betti(), "cohomology": report.to_dict(),
                        "orientation": planar.orientation,
                        "bv_values": {k: v.to_text() for k, v in planar.bv_values.items()},
                        "relations": planar.relations})
        if not all(planar.relations.values()):
            return EXIT_FAIL
    return EXIT_OK


COMMANDS = {"check": cmd_check, "cohomology": cmd_cohomology, "poisson": cmd_poisson}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    cfg = _config(args)
    out = Output(cfg.fmt)
    try:
        code = COMMANDS[cfg.command](cfg, out)
    except (InputError, PolyParseError, WindowError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except LieStructureError as exc:
        report = exc.report
        out.lines = []
        _report_lines(out, [report])
        out.doc = {"command": cfg.command, "reports": [report.to_dict()], "all_pass": False}
        out.emit(sys.stdout)
        return EXIT_FAIL
    except PoissonError as exc:
        out.line(f"FAIL  {exc}")
        out.doc = {"command": cfg.command, "error": str(exc)}
        out.emit(sys.stdout)
        return EXIT_FAIL
    out.emit(sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
