"""Command line: ``greechie gen``, ``greechie check`` and ``greechie table``."""

from __future__ import annotations

import argparse
import sys
import time
from typing import Optional

from .checker import check_batch
from .diagram import format_diagram
from .eqparser import BUILTIN_NAMES, EquationError, parse_inference, parse_law_spec
from .generate import GenerationConfig, GenerationError, count_table, generate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2

EQUATION_HELP = """\
equation grammar:
  binary terms are parenthesized: (XvY) join, (X^Y) meet, (X->nY) for the
  implications n = 0..5, (X==Y) biconditional; X' is the orthocomplement;
  0 and 1 are constants; variables are single letters a-z except v.
  A relation is X=Y or X<Y (less or equal).  An inference lists hypotheses,
  each optionally negated with ~, joined by & and followed by =>:
    "(av(b^(avc)))=((avb)^(avc))"
    "~((d->1a)<(a->1d)) & ~(((c->1d)^(d->1a))<(a->1d)) => ((((a->1b)^(b->1c))^(c->1d))^(d->1a))<(a->1d)"
laws for --law: modular, distributive, orthomodular, oa6,
  godowski:N (N >= 3), godowski_hyp:N (N >= 3), noa:N (N >= 4)
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _part(text: str) -> tuple:
    try:
        r, k = (int(x) for x in text.split("/"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected r/k, e.g. 0/4") from None
    if k < 1 or not 0 <= r < k:
        raise argparse.ArgumentTypeError("need 0 <= r < k")
    return r, k


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="greechie", description="Generate Greechie diagrams and test lattice equations on them.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="list connected 3-atom-block diagrams, one per isomorphism class")
    g.add_argument("-b", "--blocks", type=_positive, required=True, help="number of blocks")
    g.add_argument("--max-atoms", type=int, help="upper bound on the number of atoms")
    g.add_argument("--foot-free", action="store_true", help="only diagrams without feet")
    g.add_argument("--part", type=_part, metavar="R/K", help="emit part R of K (0-based) of the search tree")
    g.add_argument("-o", "--output", help="output file (default stdout)")

    c = sub.add_parser(
        "check",
        help="test an equation on every diagram of a file",
        epilog=EQUATION_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    c.add_argument("-i", "--input", required=True, help="diagram file, one diagram per line")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("equation", nargs="?", help="equation or inference text")
    src.add_argument("--law", help="named law: " + ", ".join(BUILTIN_NAMES) + " (size as name:N)")
    c.add_argument("-v", "--verbose", action="store_true", help="print evaluation counters to stderr")
    c.add_argument("--jobs", type=_positive, default=1, help="worker processes across diagrams")

    t = sub.add_parser("table", help="count diagrams per (atoms, blocks) as CSV, optionally plotted")
    t.add_argument("--max-beta", type=_positive, required=True, help="largest block count")
    t.add_argument("--max-atoms", type=int, help="upper bound on the number of atoms")
    t.add_argument("--csv", help="CSV output file (default stdout)")
    t.add_argument("--plot", help="write a heatmap PNG here")
    return p


def _cmd_gen(args) -> int:
    try:
        cfg = GenerationConfig(args.blocks, args.max_atoms, args.foot_free, args.part)
    except GenerationError as e:
        raise UsageError(str(e)) from None
    out = open(args.output, "w") if args.output else sys.stdout
    count = 0
    try:
        for d in generate(cfg):
            out.write(format_diagram(d) + "\n")
            count += 1
    finally:
        if args.output:
            out.close()
    print(f"{count} diagrams", file=sys.stderr)
    return EXIT_OK


def _cmd_check(args) -> int:
    try:
        inf = parse_law_spec(args.law) if args.law else parse_inference(args.equation)
    except EquationError as e:
        print(f"greechie: equation: {e}", file=sys.stderr)
        return EXIT_INPUT
    try:
        with open(args.input) as fh:
            lines = fh.readlines()
    except OSError as e:
        print(f"greechie: {args.input}: {e.strerror}", file=sys.stderr)
        return EXIT_INPUT
    header, *results = check_batch(lines, inf, jobs=args.jobs)
    print(header)
    ok = True
    for line, good, res in results:
        print(line)
        ok &= good
        if args.verbose and res is not None:
            print(f"  evaluations {res.evaluations}, early exits {res.early_exits}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_INPUT


def _cmd_table(args) -> int:
    from .report import plot_heatmap, write_csv

    t0 = time.perf_counter()
    table = count_table(args.max_beta, args.max_atoms)
    if args.csv:
        with open(args.csv, "w") as fh:
            write_csv(table, fh)
    else:
        write_csv(table, sys.stdout)
    if args.plot:
        plot_heatmap(table, args.plot)
    for b in range(1, args.max_beta + 1):
        total, free = table.totals(b)
        print(f"blocks {b}: {total} diagrams, {free} foot-free", file=sys.stderr)
    print(f"{time.perf_counter() - t0:.2f} s", file=sys.stderr)
    return EXIT_OK


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"gen": _cmd_gen, "check": _cmd_check, "table": _cmd_table}[args.command]
        return handler(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
