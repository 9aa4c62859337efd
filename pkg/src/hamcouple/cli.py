"""Command-line interface: ``hamcouple verify|simulate|compose|ocrr|project``.

Exit codes
----------
0  all checks pass
1  a check failed
2  usage error (unknown name, bad config, mismatched schemas)
3  time integration blew up
4  matched-pair compatibility failure
5  time-reversal parity undefined for the schema
"""
import argparse
import os
import sys

from . import brackets as br
from . import compose as cp
from . import dynamics as dy
from . import ocrr
from . import reduction as rd
from . import verify as vf
from .errors import BlowUpError, CompatibilityError, ParityError, SchemaError, StateValidityError
from .functional import test_functional_suite
from .grid import Grid3, PhaseGrid
from .state import Constants, random_state

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BLOWUP, EXIT_COMPAT, EXIT_PARITY = 0, 1, 2, 3, 4, 5
OUT_ENV = "HAMCOUPLE_OUT"


def _out_dir(args, sub=None):
    base = args.out or os.environ.get(OUT_ENV) or "hamcouple_out"
    return os.path.join(base, sub) if sub and not args.out else base


def _write(path, text):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _verify_csv(rows):
    lines = ["bracket,check,residual,tol,verdict,note"]
    for name, r in rows:
        note = r.note.replace(",", ";")
        lines.append(f"{name},{r.check},{r.residual!r},{r.tol!r},{r.verdict},{note}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------


def cmd_verify(args):
    if not args.all and not args.bracket:
        raise SchemaError("verify needs --bracket NAME or --all")
    names = list(br.BRACKET_NAMES) if args.all else [args.bracket]
    for n in names:
        br.get_bracket(n)
    ok, rows = True, []
    for n in names:
        res = vf.verify_bracket(n, n=args.grid, seed=args.seed, refinement=args.refinement)
        print(f"== {n}")
        print(vf.format_table(res))
        ok &= all(r.passed for r in res)
        rows += [(n, r) for r in res]
    if args.csv:
        _write(args.csv, _verify_csv(rows))
    return EXIT_OK if ok else EXIT_FAIL


def _resolve_config(path):
    if os.path.exists(path):
        return path
    return dy.shipped_config(path)


def cmd_simulate(args):
    cfg = dy.RunConfig.load(_resolve_config(args.config))
    if args.steps is not None:
        cfg.steps = args.steps
    if args.seed is not None:
        cfg.seed = args.seed
    if args.dt is not None:
        cfg.dt = args.dt
    cfg.__post_init__()
    out = _out_dir(args, cfg.name)
    res = dy.run(cfg, out)
    print(f"run {cfg.name}: bracket {cfg.bracket}, {cfg.steps} steps, dt {res.meta['dt']:.6g}")
    print(f"relative energy drift {res.meta['energy_drift']:.3e}")
    if "l2_error" in res.meta:
        print(f"L2 error vs analytic plane wave {res.meta['l2_error']:.3e}")
    for col in res.columns[3:]:
        v = res.column(col)
        if col.startswith("constraint:"):
            print(f"{col} max {abs(v).max():.3e}")
        else:
            print(f"{col} drift {abs(v - v[0]).max():.3e}")
    if not args.no_plot:
        from .plotting import plot_series
        plot_series(os.path.join(out, "series.csv"), os.path.join(out, "monitors.png"), cfg.name)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_compose(args):
    d = cp.load_spec(args.spec)
    if d.get("type") == "matched_pair":
        res = cp.build_matched_pair(d)
        print("\n".join(res.lines))
        print("PASS" if res.passed else "FAIL")
        return EXIT_OK if res.passed else EXIT_FAIL
    bracket = cp.build_fields(d)
    print(f"composed {bracket!r}")
    ok = True
    if d.get("compare_to"):
        ref = br.get_bracket(d["compare_to"])
        grid = Grid3((args.grid, args.grid, 1))
        resid = cp.equivalence_residual(bracket, ref, grid)
        good = resid <= 1e-12
        print(f"equivalence to catalog {ref.name}: max residual {resid:.3e} (tol 1e-12) {'PASS' if good else 'FAIL'}")
        ok &= good
    res = vf.verify_bracket(bracket, n=args.grid, seed=args.seed)
    print(vf.format_table(res))
    ok &= all(r.passed for r in res)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_ocrr(args):
    bracket = br.get_bracket(args.bracket)
    if bracket.schema.has_phase or any(v.parity is None for v in bracket.schema):
        raise ParityError(f"{bracket.name} has variables without time-reversal parity")
    n = args.grid or (3 if bracket.species == 2 else 4)
    grid = Grid3((n, n, 1))
    ok, csv_parts = True, []
    for k in range(args.states):
        x = random_state(bracket.schema, grid, args.seed + k)
        rep = ocrr.check_bivector_parity(bracket, x, tol=args.tol)
        print(f"-- state {k} (seed {args.seed + k})")
        print(rep.text())
        ok &= rep.passed
        body = rep.to_csv().splitlines()
        csv_parts += ([f"state,{body[0]}"] if k == 0 else []) + [f"{k},{line}" for line in body[1:]]
    if args.csv or args.out:
        path = args.csv or os.path.join(_out_dir(args), f"ocrr_{bracket.name}.csv")
        _write(path, "\n".join(csv_parts) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_project(args):
    fine, coarse = br.get_bracket(args.fine), br.get_bracket(args.coarse)
    species = max(fine.species, coarse.species)
    const = Constants.binary() if species == 2 else Constants()
    pmap = rd.get_projection(args.map, const, fine.schema)
    if fine.schema != pmap.fine or coarse.schema != pmap.coarse:
        raise SchemaError(f"map {pmap.name} goes {pmap.fine.names} -> {pmap.coarse.names}; "
                          f"got fine {fine.schema.names}, coarse {coarse.schema.names}")
    if fine.schema.has_phase:
        q = args.pgrid
        grid = PhaseGrid(Grid3((args.grid, args.grid, 1)), (q, q, 1), (1.0, 1.0, 1.0))
        states = [rd.resolved_maxwellian_state(grid, args.seed + k, constants=const) for k in range(args.states)]
        funcs = rd.moment_functionals(grid, args.seed)
        tol = 1e-5
    else:
        grid = Grid3((args.grid, args.grid, 1))
        states = [random_state(fine.schema, grid, args.seed + k) for k in range(args.states)]
        funcs = test_functional_suite(coarse.schema, grid, args.seed)
        tol = 1e-8
    rep = rd.verify_poisson_map(pmap, fine, coarse, states, funcs, const, tol)
    print(rep)
    if args.csv or args.out:
        path = args.csv or os.path.join(_out_dir(args), f"project_{pmap.name}.csv")
        lines = ["pair,abs_residual,rel_residual"] + [f"{i},{a!r},{r!r}" for i, (a, r) in enumerate(rep.residuals)]
        _write(path, "\n".join(lines) + "\n")
    return EXIT_OK if rep.passed else EXIT_FAIL


# --------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="hamcouple", description="Poisson brackets of matter and fields.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="antisymmetry, Leibniz, Jacobi and Casimir checks")
    v.add_argument("--bracket")
    v.add_argument("--all", action="store_true")
    v.add_argument("--grid", type=int, default=6, help="points per active axis (default 6)")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--refinement", action="store_true", help="add the Jacobi grid-refinement study")
    v.add_argument("--csv")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="run a config and write CSV, snapshot and plot")
    s.add_argument("--config", required=True, help="TOML file or shipped name")
    s.add_argument("--out")
    s.add_argument("--steps", type=int)
    s.add_argument("--dt", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--no-plot", action="store_true")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compose", help="build and verify a composed bracket or matched pair")
    c.add_argument("--spec", required=True, help="TOML file or shipped spec name")
    c.add_argument("--grid", type=int, default=6)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_compose)

    o = sub.add_parser("ocrr", help="Onsager-Casimir parity check of a bivector")
    o.add_argument("--bracket", required=True)
    o.add_argument("--grid", type=int)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--states", type=int, default=5)
    o.add_argument("--tol", type=float, default=1e-10)
    o.add_argument("--out")
    o.add_argument("--csv")
    o.set_defaults(func=cmd_ocrr)

    j = sub.add_parser("project", help="Poisson-map check of a projection")
    j.add_argument("--map", required=True)
    j.add_argument("--fine", required=True)
    j.add_argument("--coarse", required=True)
    j.add_argument("--grid", type=int, default=8)
    j.add_argument("--pgrid", type=int, default=32, help="momentum points per active axis")
    j.add_argument("--seed", type=int, default=0)
    j.add_argument("--states", type=int, default=2)
    j.add_argument("--out")
    j.add_argument("--csv")
    j.set_defaults(func=cmd_project)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARITY
    except CompatibilityError as exc:
        print(f"compatibility failure: {exc.identity} residual {exc.residual:.3e} at {exc.index}",
              file=sys.stderr)
        return EXIT_COMPAT
    except BlowUpError as exc:
        print(f"blow-up at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (SchemaError, StateValidityError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
