"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 domain error.
"""

from __future__ import annotations

import argparse
import io
import math
import sys

import numpy as np

from .errors import DomainError, InvalidGramError, LatticeError
from .families import (
    decomposable_gram,
    decomposable_params,
    indecomposable_gram,
    parse_param,
)
from .lattice import GramMatrix, load_gram, selling_reduce
from .moments import g_closed_form, g_decomposable
from .montecarlo import second_moment_mc
from .optimizer import decomposable_region_scan, find_critical_points
from .report import dumps, format_number, lattice_report
from .verify import verify_paper

COMMANDS = ("analyze", "sweep", "optimize", "sample", "verify-paper")
FAMILIES = ("indecomposable", "decomposable")

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2, 3
DECOMPOSABLE_BETA_MAX = 4.0


class InputError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="isoquant",
        description="Quantization error, packing and covering of 3D isodual lattices.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--gram", metavar="FILE", help='JSON file {"gram": [[...], [...], [...]]}')
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--alpha", help="decimal or token (2-sqrt2, sqrt3-1, 2/sqrt3, ...)")
    p.add_argument("--beta", help="decimal or token")
    p.add_argument("--grid", type=int, metavar="N")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    return p


def _family_point(args) -> tuple[float, float]:
    if args.alpha is None or args.beta is None:
        raise InputError("--family requires both --alpha and --beta")
    try:
        return parse_param(args.alpha), parse_param(args.beta)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _lattice_from_args(args) -> tuple[GramMatrix, dict]:
    if args.gram and args.family:
        raise InputError("give either --gram or --family, not both")
    if args.gram:
        try:
            return load_gram(args.gram), {"source": args.gram}
        except OSError as exc:
            raise InputError(f"{args.gram}: {exc.strerror}") from None
        except InvalidGramError as exc:
            raise InputError(str(exc)) from None
    if args.family:
        a, b = _family_point(args)
        if args.family == "indecomposable":
            g = indecomposable_gram((a, b))
        else:
            g = decomposable_gram(decomposable_params(a, b))
        return g, {"family": args.family, "alpha": a, "beta": b}
    raise InputError("this command needs --gram FILE or --family with --alpha/--beta")


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(
            format_number(v) if isinstance(v, (float, np.floating)) else str(v) for v in row
        ) + "\n")
    return buf.getvalue()


def _sweep_rows(family: str, n: int):
    if family == "indecomposable":
        axis = [(i + 1) / (n + 1) for i in range(n)]
        for a in axis:
            for b in axis:
                yield a, b, g_closed_form(a, b)
    else:
        # reduced region 2h <= alpha, alpha <= beta <= 4, on an (alpha, t) grid
        a_lo, a_hi = 1.0 / DECOMPOSABLE_BETA_MAX, 2.0 / math.sqrt(3.0)
        steps = max(n - 1, 1)
        for i in range(n):
            a = a_lo + (a_hi - a_lo) * i / steps
            lo = max(a, 1.0 / a)
            hi = max(min((a * a + 4.0) / (4.0 * a), DECOMPOSABLE_BETA_MAX), lo)
            for j in range(n):
                b = max(lo + (hi - lo) * j / steps, a)
                yield a, b, g_decomposable(decomposable_params(a, b))


def _run(args) -> tuple[int, str]:
    fmt = args.format
    if args.command == "analyze":
        gram, meta = _lattice_from_args(args)
        rep = lattice_report(gram)
        if fmt == "csv":
            d = rep.to_json()
            return EXIT_OK, _csv(list(d), [list(d.values())])
        out = dict(rep.to_json())
        out.update(meta)
        out.update(selling_reduce(gram).to_json())
        return EXIT_OK, dumps(out) + "\n"

    if args.command == "sweep":
        if not args.family:
            raise InputError("sweep requires --family")
        n = 21 if args.grid is None else args.grid
        if n < 1:
            raise InputError("--grid must be positive")
        rows = list(_sweep_rows(args.family, n))
        if fmt == "json":
            return EXIT_OK, dumps([{"alpha": a, "beta": b, "g": g} for a, b, g in rows]) + "\n"
        return EXIT_OK, _csv(["alpha", "beta", "g"], rows)

    if args.command == "optimize":
        family = args.family or "indecomposable"
        if family == "indecomposable":
            pts = find_critical_points(grid_n=40 if args.grid is None else args.grid)
            payload = {"family": family, "n_starts": pts.n_starts,
                       "n_converged": pts.n_converged, "points": [p.to_json() for p in pts]}
            rows = [(p.alpha, p.beta, p.g_value, p.classification, p.grad_norm) for p in pts]
        else:
            scan = decomposable_region_scan(grid_n=200 if args.grid is None else args.grid)
            payload = dict(family=family, **scan.to_json())
            rows = [(p.alpha, p.beta, p.g_value, p.classification, p.grad_norm) for p in scan.points]
        if fmt == "csv":
            return EXIT_OK, _csv(["alpha", "beta", "g", "classification", "grad_norm"], rows)
        return EXIT_OK, dumps(payload) + "\n"

    if args.command == "sample":
        if args.samples < 1000:
            raise InputError("--samples must be >= 1000")
        if args.seed < 0:
            raise InputError("--seed must be nonnegative")
        gram, meta = _lattice_from_args(args)
        rep = second_moment_mc(gram, args.samples, args.seed, workers=max(args.workers, 1))
        if fmt == "csv":
            d = rep.to_json()
            return EXIT_OK, _csv(list(d), [list(d.values())])
        return EXIT_OK, dumps(dict(rep.to_json(), **meta)) + "\n"

    if args.command == "verify-paper":
        rep = verify_paper(mc_samples=args.samples, seed=args.seed)
        text = rep.format_text() + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(dumps(rep) + "\n")
        return (EXIT_OK if rep.overall else EXIT_VERIFY), text

    raise InputError(f"unknown command {args.command}")  # pragma: no cover


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code, text = _run(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (LatticeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out and args.command != "verify-paper":
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
