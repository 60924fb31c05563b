"""Command-line front end.

Exit codes: 0 success, 1 a checked property failed, 2 usage or input error.
A structure argument is a file path or ``fixture:NAME[:P1,P2,...]``.
"""

from __future__ import annotations

import argparse
import itertools
import random
import sys
from pathlib import Path
from typing import Sequence

from shelogic import __version__
from shelogic.classify import classify, classify_dsm, classify_with_equality, explain
from shelogic.dsm import CapExceeded, DSMError, enumerate_dsms, export_dot
from shelogic.logic import (FormulaError, evaluate_bruteforce, extension, free_vars,
                            parse_formula, theta_relation)
from shelogic.model import (FIXTURES, Structure, StructureError, fixture, parse_structure,
                            quotient, serialize_structure)
from shelogic.qe import EngineError, parse_engine, run
from shelogic.sampling import random_formula
from shelogic.shop import ShopError, Shop, preserves, she_monoid

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

DEFAULT_SEED = 20240101
GALOIS_CELLS = 9  # n ** arity limit for exhaustive relation search


class UsageError(Exception):
    pass


def load_structure(spec: str) -> Structure:
    if spec.startswith("fixture:"):
        _, _, rest = spec.partition(":")
        name, _, params = rest.partition(":")
        try:
            values = [int(p) for p in params.split(",") if p.strip()]
        except ValueError:
            raise UsageError(f"bad fixture parameters in {spec!r}") from None
        return fixture(name, values)
    path = Path(spec)
    if not path.is_file():
        raise UsageError(f"no such structure file: {spec}")
    return parse_structure(path.read_text(encoding="utf-8"))


def _out(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_she(args) -> int:
    B = load_structure(args.structure)
    D = she_monoid(B, cap=args.cap)
    _out(f"shes: {len(D)}")
    if B.n <= 3 or args.generators:
        _out("generators: " + " ".join(map(str, D.generators)))
    if args.all:
        sys.stdout.write(D.listing())
    return EXIT_OK


def cmd_classify(args) -> int:
    B = load_structure(args.structure)
    c = classify_with_equality(B) if args.equality else classify(B)
    if args.json:
        _out(c.to_json())
    else:
        _out(c.headline())
        sys.stdout.write(explain(c))
    return EXIT_OK


def cmd_eval(args) -> int:
    B = load_structure(args.structure)
    text = Path(args.file).read_text(encoding="utf-8") if args.file else args.formula
    if text is None:
        raise UsageError("give a formula or --file")
    phi = parse_formula(text, signature=B.signature)
    if free_vars(phi):
        raise UsageError(f"not a sentence: free variables {', '.join(sorted(free_vars(phi)))}")
    engine = parse_engine(args.engine, B.n)
    result = run(B, phi, engine)
    _out(f"value: {str(result.value).lower()}")
    _out(f"engine: {result.engine}")
    _out(f"residual: {result.residual}")
    if args.verify:
        oracle = evaluate_bruteforce(B, phi)
        agree = oracle == result.value
        _out(f"brute-force: {str(oracle).lower()} ({'agree' if agree else 'MISMATCH'})")
        if not agree:
            return EXIT_VIOLATION
    return EXIT_OK


def cmd_lattice(args) -> int:
    L = enumerate_dsms(args.n, allow_large=args.allow_large)
    verdicts = {i: classify_dsm(D).verdict for i, D in enumerate(L.nodes)}
    if args.dot:
        dot = export_dot(L, verdicts)
        if args.dot == "-":
            sys.stdout.write(dot)
            return EXIT_OK
        Path(args.dot).write_text(dot, encoding="utf-8")
    _out(f"dsms: {len(L.nodes)}")
    _out(f"covers: {len(L.edges)}")
    for i, D in enumerate(L.nodes):
        _out(f"{i}\tsize={len(D)}\t{D.label()}\t{verdicts[i]}")
    for a, b in L.edges:
        _out(f"{a} < {b}")
    return EXIT_OK


def _subsets(cells: list[tuple[int, ...]]):
    for mask in range(1, 1 << len(cells)):
        yield frozenset(c for i, c in enumerate(cells) if mask >> i & 1)


def cmd_galois(args) -> int:
    B = load_structure(args.structure)
    if args.max_arity < 1:
        raise UsageError("--max-arity must be at least 1")
    if B.n > 3 or B.n ** args.max_arity > GALOIS_CELLS:
        raise UsageError(f"galois check needs n <= 3 and n**max_arity <= {GALOIS_CELLS} "
                         f"(got n={B.n}, max_arity={args.max_arity})")
    if args.samples < 0:
        raise UsageError("--samples must be non-negative")
    rng = random.Random(args.seed)
    shes = she_monoid(B).sorted()
    # forward: definable relations are preserved by every she
    violations = 0
    for i in range(args.samples):
        k = rng.randint(1, args.max_arity)
        free = [f"u{j + 1}" for j in range(k)]
        phi = random_formula(rng, B.signature, free, depth=args.depth)
        ext = extension(B, phi, free)
        for f in shes:
            if not preserves(f, k, ext.tuples):
                violations += 1
                _out(f"forward violation: {f} does not preserve [{phi}]")
                break
    _out(f"forward: {args.samples} formulas x {len(shes)} shes, {violations} violations")
    # backward: every invariant relation is defined by its theta formula
    checked = mismatches = 0
    for k in range(1, args.max_arity + 1):
        cells = list(itertools.product(range(B.n), repeat=k))
        for S in _subsets(cells):
            if not all(preserves(f, k, S) for f in shes):
                continue
            checked += 1
            free = [f"u{j + 1}" for j in range(k)]
            got = extension(B, theta_relation(B, S), free).tuples
            if got != S:
                mismatches += 1
                _out(f"backward mismatch: arity {k} relation {sorted(S)}")
    _out(f"backward: {checked} invariant relations, {mismatches} mismatches")
    ok = violations == 0 and mismatches == 0
    _out("result: " + ("pass" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_quotient(args) -> int:
    B = load_structure(args.structure)
    f = Shop.parse(args.shop)
    Q = quotient(B, f)
    text = serialize_structure(Q)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    for name in sorted(FIXTURES):
        _out(f"{name}\t{FIXTURES[name]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shelogic",
                                description="Positive equality-free FO over finite structures.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("she", help="list the shes of a structure")
    s.add_argument("structure")
    s.add_argument("--all", action="store_true", help="print every member")
    s.add_argument("--generators", action="store_true", help="compute generators even for n=4")
    s.add_argument("--cap", type=int, default=4, help="largest domain to enumerate (default 4)")
    s.set_defaults(func=cmd_she)

    s = sub.add_parser("classify", help="complexity verdict")
    s.add_argument("structure")
    s.add_argument("--equality", action="store_true", help="allow equality in sentences")
    s.add_argument("--json", action="store_true", help="flat machine-readable record")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("eval", help="evaluate a sentence")
    s.add_argument("structure")
    s.add_argument("formula", nargs="?")
    s.add_argument("--file", help="read the sentence from a file")
    s.add_argument("--engine", default="auto",
                   help="auto, brute, forall:B, exists:B, forall_exists:B,B2, AE:B,B2, A:SHOP, E:SHOP")
    s.add_argument("--verify", action="store_true", help="cross-check against brute force")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("lattice", help="all DSMs on n elements")
    s.add_argument("n", type=int)
    s.add_argument("--dot", help="write Graphviz output to a path ('-' for stdout)")
    s.add_argument("--allow-large", action="store_true")
    s.set_defaults(func=cmd_lattice)

    s = sub.add_parser("galois", help="check both directions of the Galois connection")
    s.add_argument("structure")
    s.add_argument("--max-arity", type=int, default=2)
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--depth", type=int, default=4)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.set_defaults(func=cmd_galois)

    s = sub.add_parser("quotient", help="quotient by an equivalence she")
    s.add_argument("structure")
    s.add_argument("--shop", required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_quotient)

    s = sub.add_parser("fixtures", help="list built-in structures")
    s.set_defaults(func=cmd_fixtures)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, StructureError, FormulaError, ShopError, EngineError,
            CapExceeded, DSMError, OSError) as exc:
        sys.stderr.write(f"shelogic: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
