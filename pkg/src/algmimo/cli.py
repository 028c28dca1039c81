"""Command-line front end (``algmimo <command> ...``).

Exit codes: 0 success, 2 parse error, 3 compile error, 4 numerical error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import montecarlo as mc
from . import numerics as nm
from .channels import Atoms, ChannelError, CorrWish, MP, compile_channel
from .exactalg import ExactAlgebraError
from .parse import ParseError, parse_channel_expr
from .transforms import SeriesError, shannon_coefficients

EXIT_PARSE, EXIT_COMPILE, EXIT_NUMERIC = 2, 3, 4

TWO_ATOM = Atoms(((Fraction(1, 2), Fraction(1)), (Fraction(1, 2), Fraction(2))))
TABLE_NT = (200, 100, 50, 26)
TABLE_NR = 50
FIG_GAMMAS = tuple(float(g) for g in np.logspace(-2, 1, 16))


def table_channel(which, c):
    return MP(c) if which == "table1a" else CorrWish(TWO_ATOM, TWO_ATOM, c)


def _gammas(args):
    if args.gamma and args.gamma_range:
        raise SystemExit("--gamma and --gamma-range are mutually exclusive")
    if args.gamma_range:
        a, b, n = args.gamma_range.split(":")
        gs = np.linspace(float(a), float(b), int(n))
    elif args.gamma:
        gs = np.array([float(g) for g in args.gamma.split(",")])
    else:
        gs = np.array([])
    if np.any(gs <= 0):
        raise ValueError("gamma must be positive")
    return gs


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sidecar(out, text):
    if out:
        with open(out + ".json", "w") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text + "\n")


def cmd_build(args):
    ch = compile_channel(parse_channel_expr(args.expr))
    p = ch.lmz
    lines = [p.dumps()] if args.dump_poly else [str(p), p.dumps()]
    lines.append(f"D_m = {p.deg1}, D_z = {p.deg2}, c = {ch.c}, mean = {ch.mean}")
    _emit("\n".join(lines) + "\n", args.out)


def cmd_moments(args):
    ch = compile_channel(parse_channel_expr(args.expr))
    ms = ch.moments(args.K)
    lines = [ms.to_json()]
    for k, (M, v) in enumerate(zip(ms.moments, shannon_coefficients(ms)), start=1):
        lines.append(f"k={k}  M={float(M):.10g}  nu={float(v):.10g}")
    _emit("\n".join(lines) + "\n", args.out)


def cmd_density(args):
    ch = compile_channel(parse_channel_expr(args.expr))
    d = nm.density(ch, args.grid, xi=args.xi)
    _emit(d.to_csv(), args.out)
    _sidecar(args.out, d.metadata_json())


def cmd_shannon(args):
    ch = compile_channel(parse_channel_expr(args.expr))
    gs = _gammas(args)
    if gs.size == 0:
        raise ValueError("give --gamma or --gamma-range")
    unit = 1 / math.log(2) if args.bits else 1.0
    quad = nm.shannon_transform(ch, gs).values
    nu = shannon_coefficients(ch.moments(args.K))
    lam = max(nm.support_candidates(ch.lmz), default=None)
    if ch.lmz.deg1 == 1:
        lam = max((x for x, _ in nm._atoms_degree_one(ch.lmz)), default=0.0)
    rows = ["gamma,V,method,converged"]
    for g, q in zip(gs, quad):
        s, ok = nm.shannon_series_eval(nu, g, args.K, lam)
        g = float(g)
        rows.append(f"{g!r},{float(q * unit)!r},quadrature,")
        rows.append(f"{g!r},{float(s * unit)!r},series,{str(ok).lower()}")
    _emit("\n".join(rows) + "\n", args.out)


def cmd_mc(args):
    expr = parse_channel_expr(args.expr)
    ch = compile_channel(expr)
    cfg = mc.McConfig(expr, args.Nr, args.Nt, args.trials, args.seed, tuple(_gammas(args)), args.K)
    est = mc.estimate(cfg, workers=args.workers)
    nu = shannon_coefficients(ch.moments(args.K))
    _emit(mc.write_table_csv(mc.table_rows(est, nu, cfg)), args.out)
    _sidecar(args.out, mc.metadata_json(est))


def reproduce_table(which, trials=2000, seed=1, workers=1):
    rows, meta = [], []
    for Nt in TABLE_NT:
        c = Fraction(TABLE_NR, Nt)
        expr = table_channel(which, c)
        ch = compile_channel(expr)
        cfg = mc.McConfig(expr, TABLE_NR, Nt, trials, seed, (), 3)
        est = mc.estimate(cfg, workers=workers)
        rows += mc.table_rows(est, shannon_coefficients(ch.moments(3)), cfg)
        meta.append(est.metadata)
    return rows, meta


def reproduce_fig1(trials=2000, seed=1, workers=1, gammas=FIG_GAMMAS):
    out = {}
    c = Fraction(TABLE_NR, 200)
    for name in ("table1a", "table1b"):
        expr = table_channel(name, c)
        ch = compile_channel(expr)
        cfg = mc.McConfig(expr, TABLE_NR, 200, trials, seed, tuple(gammas), 1)
        est = mc.estimate(cfg, workers=workers)
        theory = nm.shannon_transform(ch, gammas).values
        out[str(expr)] = (est, theory)
    return out


def cmd_reproduce(args):
    if args.which in ("table1a", "table1b"):
        rows, meta = reproduce_table(args.which, args.trials, args.seed, args.workers)
        _emit(mc.write_table_csv(rows), args.out)
        _sidecar(args.out, json.dumps(meta, indent=2, default=str))
    else:
        res = reproduce_fig1(args.trials, args.seed, args.workers)
        text = []
        for name, (est, theory) in res.items():
            text.append(f"# {name}\n" + mc.write_fig_csv(FIG_GAMMAS, est, theory))
        _emit("\n".join(text), args.out)
        _sidecar(args.out, json.dumps({k: v[0].metadata for k, v in res.items()}, indent=2, default=str))


def build_parser():
    ap = argparse.ArgumentParser(prog="algmimo", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, expr=True):
        p = sub.add_parser(name)
        if expr:
            p.add_argument("expr")
        p.add_argument("--out")
        p.set_defaults(fn=fn)
        return p

    p = add("build", cmd_build)
    p.add_argument("--dump-poly", action="store_true")
    p = add("moments", cmd_moments)
    p.add_argument("-K", type=int, default=4)
    p = add("density", cmd_density)
    p.add_argument("--grid", default="0:5:201")
    p.add_argument("--xi", type=float, default=nm.DEFAULT_XI)
    p = add("shannon", cmd_shannon)
    p.add_argument("--gamma")
    p.add_argument("--gamma-range")
    p.add_argument("-K", type=int, default=8)
    p.add_argument("--bits", action="store_true")
    p = add("mc", cmd_mc)
    p.add_argument("--Nr", type=int, required=True)
    p.add_argument("--Nt", type=int, required=True)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--gamma")
    p.add_argument("--gamma-range")
    p.add_argument("-K", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    p = add("reproduce", cmd_reproduce, expr=False)
    p.add_argument("which", choices=["table1a", "table1b", "fig1"])
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ChannelError, SeriesError, ExactAlgebraError) as exc:
        print(f"compile error: {exc}", file=sys.stderr)
        return EXIT_COMPILE
    except (nm.NumericalError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
