"""Command-line front end.

Exit codes
  0   success (CP verdict CertainlyYes for ``growth``; complete certificate)
  1   a verification check failed
  2   ``growth``: matrix is certainly not completely pivoted
  3   ``growth``: complete pivoting could not be decided
  4   partial upper-bound certificate
  5   budget or resource limit exceeded
  64  usage or parse error
  65  bundled data failed its hash check
  66  input file not found

Polynomial arguments are file paths or ``@name`` for bundled data (``@p7``).
Artifact-producing commands write ``<output>.manifest.json``; passing that
file back through ``--config`` repeats the run with the same parameters.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cover import BudgetExceeded, CoverSet, TestConfig, build_cover, project_cover, projection_csv
from .datasets import DataHashMismatch, load_poly
from .elim import NotCompletelyPivoted, SingularPivot, PossiblySingularPivot, complete_pivoting, eliminate
from .elim import growth as growth_of
from .elim import is_completely_pivoted, normalize
from .formats import FormatError, format_matrix, format_poly, parse_matrix, parse_poly
from .infeas import UpperBoundCertificate, theorem_pipeline, verify_certificate
from .lowerbound import case_4e, verify_p5, verify_p7
from .multipoly import Limits, MonomialOrder, MultiPoly, ResourceExceeded, buchberger
from .numerics import TriState, format_rational, to_rational
from .search import SearchConfig, extract_pattern, search_growth
from .unipoly import (
    UniPoly,
    descartes_sign_changes,
    discriminant,
    divide_exact,
    isolate_real_roots,
    mobius_substitute,
    root_digits,
    NotDivisible,
)

EXIT_OK, EXIT_FAIL, EXIT_NOT_CP, EXIT_UNKNOWN, EXIT_PARTIAL, EXIT_BUDGET = 0, 1, 2, 3, 4, 5
EXIT_USAGE, EXIT_DATA, EXIT_NOINPUT = 64, 65, 66


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# -- helpers ------------------------------------------------------------------------


def _read(path: str) -> str:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(path)
    return p.read_text()


def _poly(arg: str) -> UniPoly:
    if arg.startswith("@"):
        return load_poly(arg[1:])
    return parse_poly(_read(arg))


def _sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _manifest(args, outputs: list[str], inputs: list[str], started: float) -> None:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "config") and not k.startswith("_")}
    doc = {
        "subcommand": args.command,
        "parameters": params,
        "inputs": {p: _sha(Path(p)) for p in inputs if p and not p.startswith("@") and Path(p).exists()},
        "outputs": {p: _sha(Path(p)) for p in outputs if p and p != "-"},
        "wall_seconds": round(time.time() - started, 3),
        "threads": getattr(args, "workers", 1),
        "version": __version__,
    }
    for p in outputs:
        if p and p != "-":
            Path(p + ".manifest.json").write_text(json.dumps(doc, indent=1, sort_keys=True, default=str) + "\n")


def _fraction(text: str) -> Fraction:
    try:
        return to_rational(text)
    except (ValueError, ZeroDivisionError) as err:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from err


def _entries(text: str) -> tuple[tuple[int, int], tuple[int, int]]:
    try:
        a, b = text.split(",")
        return (int(a[0]), int(a[1])), (int(b[0]), int(b[1]))
    except (ValueError, IndexError) as err:
        raise argparse.ArgumentTypeError("entries look like 21,12") from err


# -- matrices ----------------------------------------------------------------------


def cmd_growth(args) -> int:
    A = parse_matrix(_read(args.matrix))
    verdict = is_completely_pivoted(A)
    try:
        piv = eliminate(A).pivots
    except (SingularPivot, PossiblySingularPivot) as err:
        print(f"elimination failed: {err}")
        return EXIT_UNKNOWN if isinstance(err, PossiblySingularPivot) else EXIT_NOT_CP
    print("pivots: " + " ".join(_fmt(p) for p in piv))
    print(f"growth: {_fmt(growth_of(A, check=False))}")
    print(f"completely pivoted: {verdict.value}")
    return {TriState.CERTAINLY_YES: EXIT_OK, TriState.CERTAINLY_NO: EXIT_NOT_CP}.get(verdict, EXIT_UNKNOWN)


def _fmt(v) -> str:
    return format_rational(v) if isinstance(v, Fraction) else str(v)


def cmd_normalize(args) -> int:
    started = time.time()
    A = parse_matrix(_read(args.matrix))
    if not args.no_permute:
        A, _, _ = complete_pivoting(A)
    _write(args.out, format_matrix(normalize(A)))
    if args.out not in (None, "-"):
        _manifest(args, [args.out], [args.matrix], started)
    return EXIT_OK


def cmd_pattern(args) -> int:
    started = time.time()
    A = parse_matrix(_read(args.matrix))
    P = extract_pattern(A, args.tol)
    print(P.text(), end="")
    if args.json:
        Path(args.json).write_text(P.to_json())
        _manifest(args, [args.json], [args.matrix], started)
    return EXIT_OK


def cmd_search(args) -> int:
    started = time.time()
    cfg = SearchConfig(args.n, args.restarts, args.seed, workers=args.workers)
    r = search_growth(cfg)
    print(f"n = {args.n}  restarts = {args.restarts}  seed = {args.seed}")
    print(f"growth: {r.growth!r}  (restart {r.restart}, CP excess {r.violation:.1e})")
    print("pivots: " + " ".join(f"{p:.12g}" for p in r.pivots))
    M = [[Fraction(float(v)) for v in row] for row in r.matrix]
    text = str(len(M)) + "\n" + "\n".join(" ".join(repr(float(v)) for v in row) for row in r.matrix) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        P = extract_pattern(M, args.tol)
        Path(args.out + ".pattern.txt").write_text(P.text())
        Path(args.out + ".pattern.json").write_text(P.to_json())
        _manifest(args, [args.out, args.out + ".pattern.txt", args.out + ".pattern.json"], [], started)
    else:
        print(text, end="")
    return EXIT_OK


# -- covers and certificates ---------------------------------------------------------


def cmd_cover(args) -> int:
    started = time.time()
    tests = TestConfig.parse(args.tests)
    try:
        S = build_cover(args.g, args.level, tests, args.budget, args.workers, args.checkpoint)
    except BudgetExceeded as err:
        print(f"budget exceeded: {err.stats}", file=sys.stderr)
        return EXIT_BUDGET
    S.save(args.out)
    print(f"g = {format_rational(S.g)}  level = {S.level}  boxes = {len(S)}  hash = {S.content_hash}")
    print(f"stats: {S.stats}")
    _manifest(args, [args.out], [], started)
    return EXIT_OK


def cmd_project(args) -> int:
    started = time.time()
    S = CoverSet.load(args.cover)
    rects = project_cover(S, args.entries)
    _write(args.out, projection_csv(rects))
    if args.out not in (None, "-"):
        _manifest(args, [args.out], [args.cover], started)
    return EXIT_OK


def cmd_certify_upper(args) -> int:
    started = time.time()
    if args.long:
        args.g1, args.g2, args.level = Fraction(11, 5), Fraction(43, 20), 4
    tests = TestConfig.parse(args.tests)
    cert = theorem_pipeline(args.g1, args.g2, args.level, args.budget, args.workers, tests, args.cover_budget)
    cert.save(args.out)
    for name, c in cert.counts().items():
        print(f"case {name}: {c['certified']}/{c['boxes']} boxes certified, {c['leaves']} leaves")
    print(f"status: {cert.status}  bound: {format_rational(cert.bound)} = {float(cert.bound)}")
    _manifest(args, [args.out], [], started)
    if args.verify:
        rep = verify_certificate(cert)
        print(f"replay: {'ok' if rep.ok else 'FAILED'} ({rep.leaves_checked} leaves)")
        if not rep.ok:
            return EXIT_FAIL
    return EXIT_OK if cert.complete else EXIT_PARTIAL


def cmd_verify_certificate(args) -> int:
    cert = UpperBoundCertificate.from_json(_read(args.certificate))
    covers = None
    if args.rebuild_covers:
        covers = {c.cover_g: build_cover(c.cover_g, cert.level, TestConfig.parse(cert.metadata.get("tests", "T1+T2+T3+T4")))
                  for c in cert.cases}
    rep = verify_certificate(cert, args.exact_samples, covers=covers)
    print(f"boxes replayed: {rep.boxes_checked}  leaves: {rep.leaves_checked}  exact leaf checks: {rep.exact_leaves}")
    for p in rep.problems:
        print(f"problem: {p}")
    print(f"status: {cert.status}  bound: {format_rational(cert.bound)}  replay: {'ok' if rep.ok else 'FAILED'}")
    if not rep.ok:
        return EXIT_FAIL
    return EXIT_OK if rep.complete else EXIT_PARTIAL


# -- polynomials -------------------------------------------------------------------


def _interval_text(iv) -> str:
    return f"[{format_rational(iv.lo)}, {format_rational(iv.hi)}]"


def cmd_poly(args) -> int:
    P = _poly(args.poly)
    op = args.op
    if op in ("isolate", "refine"):
        isos = isolate_real_roots(P, args.lo, args.hi)
        print(f"{len(isos)} real root(s) in [{format_rational(args.lo)}, {format_rational(args.hi)}]")
        for iv in isos:
            if op == "isolate":
                print(_interval_text(iv))
            else:
                print(root_digits(P, iv, args.digits))
    elif op == "mobius":
        a, b, c, d = args.abcd
        print(format_poly(mobius_substitute(P, a, b, c, d)), end="")
    elif op == "descartes":
        if args.abcd:
            P = mobius_substitute(P, *args.abcd)
        print(descartes_sign_changes(P))
    elif op == "discriminant":
        print(format_rational(to_rational(discriminant(P))))
    elif op == "divide":
        Q = _poly(args.divisor)
        try:
            print(format_poly(divide_exact(P, Q)), end="")
        except NotDivisible as err:
            print(f"not divisible: {err}", file=sys.stderr)
            return EXIT_FAIL
    return EXIT_OK


def cmd_groebner(args) -> int:
    lines = list(args.polys)
    if args.file:
        lines += [l.split("#", 1)[0].strip() for l in _read(args.file).splitlines()]
    lines = [l for l in lines if l]
    vars = tuple(v.strip() for v in args.vars.split(","))
    F = [MultiPoly.parse(l, vars) for l in lines]
    order = MonomialOrder(vars, args.order)
    limits = Limits(max_pairs=args.max_pairs, max_degree=args.max_degree, max_seconds=args.max_seconds)
    try:
        G = buchberger(F, order, limits)
    except ResourceExceeded as err:
        print(f"resource limit: {err.stats}", file=sys.stderr)
        return EXIT_BUDGET
    for g in G:
        print(g.format(order))
    return EXIT_OK


# -- bundled verifications ------------------------------------------------------------


def _report(rep) -> int:
    for line in rep.lines():
        print(line)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_verify_p5(args) -> int:
    return _report(verify_p5(args.digits, discriminant=not args.no_discriminant, point=not args.no_point))


def cmd_verify_p7(args) -> int:
    return _report(verify_p7(args.digits))


def cmd_case_4e(args) -> int:
    return _report(case_4e(args.digits))


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cpgrowth", description="Growth factors of completely pivoted matrices.")
    p.add_argument("--version", action="version", version=f"cpgrowth {__version__}")
    p.add_argument("--config", help="JSON file of option defaults (or a run manifest)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p._subcommands = sub

    s = sub.add_parser("growth", help="pivots, growth and CP verdict of a matrix file")
    s.add_argument("matrix")
    s.set_defaults(func=cmd_growth)

    s = sub.add_parser("normalize", help="permute to CP order and normalize")
    s.add_argument("matrix")
    s.add_argument("--no-permute", action="store_true")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("pattern", help="fixed entries and tight CP constraints")
    s.add_argument("matrix")
    s.add_argument("--tol", type=float, default=1e-4)
    s.add_argument("--json")
    s.set_defaults(func=cmd_pattern)

    s = sub.add_parser("search", help="multistart search for large growth")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--restarts", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--tol", type=float, default=1e-4, help="pattern tolerance")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("cover", help="build a cover S_g")
    s.add_argument("--g", type=_fraction, required=True)
    s.add_argument("--level", type=int, required=True)
    s.add_argument("--tests", default="T1+T2+T3+T4")
    s.add_argument("--budget", type=int)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--checkpoint")
    s.add_argument("-o", "--out", required=True)
    s.set_defaults(func=cmd_cover)

    s = sub.add_parser("project", help="2D projection of a cover as CSV")
    s.add_argument("cover")
    s.add_argument("--entries", type=_entries, default=((2, 1), (1, 2)))
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("certify-upper", help="two-case upper-bound certificate")
    s.add_argument("--g1", type=_fraction, default=Fraction(56, 25))
    s.add_argument("--g2", type=_fraction, default=Fraction(11, 5))
    s.add_argument("--level", type=int, default=4)
    s.add_argument("--budget", type=int, default=10**6, help="leaf budget per box")
    s.add_argument("--cover-budget", type=int)
    s.add_argument("--tests", default="T1+T2+T3+T4")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--long", action="store_true", help="the full (2.2, 2.15, level 4) run")
    s.add_argument("--verify", action="store_true", help="replay the certificate after writing it")
    s.add_argument("-o", "--out", required=True)
    s.set_defaults(func=cmd_certify_upper)

    s = sub.add_parser("verify-certificate", help="replay an upper-bound certificate")
    s.add_argument("certificate")
    s.add_argument("--exact-samples", type=int, default=0, help="leaves per box re-proved in rationals")
    s.add_argument("--rebuild-covers", action="store_true")
    s.set_defaults(func=cmd_verify_certificate)

    s = sub.add_parser("poly", help="univariate polynomial operations")
    ops = s.add_subparsers(dest="op", required=True, parser_class=_Parser)
    for name in ("isolate", "refine"):
        o = ops.add_parser(name)
        o.add_argument("poly")
        o.add_argument("--lo", type=_fraction, required=True)
        o.add_argument("--hi", type=_fraction, required=True)
        o.add_argument("--digits", type=int, default=30)
    o = ops.add_parser("mobius", help="(ct+d)^deg P((at+b)/(ct+d))")
    o.add_argument("poly")
    o.add_argument("abcd", type=int, nargs=4, metavar="a b c d")
    o = ops.add_parser("descartes")
    o.add_argument("poly")
    o.add_argument("--mobius", dest="abcd", type=int, nargs=4, metavar=("A", "B", "C", "D"))
    o = ops.add_parser("discriminant")
    o.add_argument("poly")
    o = ops.add_parser("divide", help="exact quotient poly / divisor")
    o.add_argument("poly")
    o.add_argument("divisor")
    s.set_defaults(func=cmd_poly)

    s = sub.add_parser("groebner", help="Groebner basis of polynomials like 'x^2*y - 3/2*y'")
    s.add_argument("polys", nargs="*")
    s.add_argument("--file")
    s.add_argument("--vars", required=True, help="comma-separated, highest priority first")
    s.add_argument("--order", choices=("lex", "grevlex"), default="lex")
    s.add_argument("--max-pairs", type=int, default=10_000)
    s.add_argument("--max-degree", type=int)
    s.add_argument("--max-seconds", type=float)
    s.set_defaults(func=cmd_groebner)

    s = sub.add_parser("verify-p5", help="the n = 5 polynomial verification suite")
    s.add_argument("--digits", type=int, default=50)
    s.add_argument("--no-discriminant", action="store_true")
    s.add_argument("--no-point", action="store_true")
    s.set_defaults(func=cmd_verify_p5)

    s = sub.add_parser("verify-p7", help="the n = 7 polynomial root")
    s.add_argument("--digits", type=int, default=36)
    s.set_defaults(func=cmd_verify_p7)

    s = sub.add_parser("case-4e", help="the Case 4e octic bound")
    s.add_argument("--digits", type=int, default=30)
    s.set_defaults(func=cmd_case_4e)
    return p


def _config_defaults(path: str) -> dict:
    doc = json.loads(_read(path))
    return doc.get("parameters", doc)


def _coerce(action: argparse.Action, value):
    if isinstance(value, list):
        return tuple(tuple(v) if isinstance(v, list) else v for v in value)
    if isinstance(value, str) and callable(action.type):
        return action.type(value)
    return value


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    """Options from ``--config`` become defaults of the chosen subcommand; flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if known.config:
        conf = _config_defaults(known.config)
        cmd = next((a for a in rest if a in parser._subcommands.choices), None)
        if cmd is not None:
            for action in parser._subcommands.choices[cmd]._actions:
                if action.dest in conf and action.dest not in ("help", "command", "op"):
                    action.default = _coerce(action, conf[action.dest])
                    action.required = False
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except SystemExit as err:
        return int(err.code) if isinstance(err.code, int) else EXIT_USAGE
    except FileNotFoundError as err:
        print(f"input not found: {err}", file=sys.stderr)
        return EXIT_NOINPUT
    except DataHashMismatch as err:
        print(f"data hash mismatch: {err}", file=sys.stderr)
        return EXIT_DATA
    except (FormatError, json.JSONDecodeError) as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except NotCompletelyPivoted as err:
        print(f"not completely pivoted: {err}", file=sys.stderr)
        return EXIT_NOT_CP
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
