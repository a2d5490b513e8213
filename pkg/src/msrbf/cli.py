"""Command-line entry point: solve, sweep, table, and oracle subcommands.

Flags mirror the run-configuration fields; a flat ``key = value`` config
file can seed them, with explicit flags taking precedence.  Exit codes:
0 success, 1 usage or validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import fdm as fdm_mod
from .errors import AssemblyError, OutOfDomainError, SolverError, UndefinedMetricError
from .problems import PROBLEMS, make_problem
from .runner import (
    RunConfig,
    run,
    solution_samples,
    sweep,
    table,
    write_csv,
)

_USAGE_ERRORS = (ValueError, OutOfDomainError, FileNotFoundError)
_NUMERIC_ERRORS = (
    AssemblyError,
    SolverError,
    UndefinedMetricError,
    FloatingPointError,
    np.linalg.LinAlgError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_counts(text):
    """'20' -> 20, '10x10' -> (10, 10)."""
    if isinstance(text, (int, tuple)):
        return text
    parts = str(text).lower().replace("×", "x").split("x")
    if len(parts) == 1:
        return int(parts[0])
    return tuple(int(p) for p in parts)


def _parse_list(text, cast=float):
    return [cast(tok) for tok in str(text).split(",") if tok.strip()]


_CONFIG_KEYS = {
    "problem": str,
    "eps": float,
    "eps1": float,
    "eps2": float,
    "S": _parse_counts,
    "J": int,
    "Q": int,
    "beta": float,
    "seed": int,
    "n_q": int,
    "N_bper": int,
    "N_cper": int,
    "rcond": float,
    "driver": str,
    "continuity": str,
    "weights": lambda s: tuple(_parse_list(s)),
    "n_test": int,
    "reference": str,
    "fdm_h": float,
    "fdm_cache": str,
    "node_cap": int,
    "share_basis": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "out": str,
}


def read_config_file(path):
    """Parse a flat key = value (or key: value) document."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            for sep in ("=", ":"):
                if sep in line:
                    key, _, val = line.partition(sep)
                    break
            else:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _CONFIG_KEYS[key](val.strip())
    return values


def _add_run_flags(p):
    p.add_argument("--problem", help="problem name, e.g. " + ", ".join(sorted(PROBLEMS)))
    p.add_argument("--eps", type=float, help="scale ratio")
    p.add_argument("--eps1", type=float)
    p.add_argument("--eps2", type=float)
    p.add_argument("--S", type=_parse_counts, help="subdomains per axis: 20 or 10x10")
    p.add_argument("--J", type=int, help="kernels per subdomain")
    p.add_argument("--Q", type=int, help="test functions per direction")
    p.add_argument("--beta", type=float, help="shape-parameter upper bound")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--n-q", dest="n_q", type=int, help="quadrature nodes per axis")
    p.add_argument("--N-bper", dest="N_bper", type=int, help="boundary points per edge")
    p.add_argument("--N-cper", dest="N_cper", type=int, help="interface points per facet")
    p.add_argument("--rcond", type=float, help="least-squares truncation threshold")
    p.add_argument("--driver", choices=["gelsd", "gelsy"], help="least-squares driver")
    p.add_argument("--continuity", choices=["grad", "normal"])
    p.add_argument("--weights", type=lambda s: tuple(_parse_list(s)),
                   help="block weights w_e,w_b,w_c")
    p.add_argument("--n-test", dest="n_test", type=int, help="test-grid points per axis")
    p.add_argument("--reference", choices=["auto", "exact", "fdm"])
    p.add_argument("--fdm-h", dest="fdm_h", type=float, help="oracle grid step")
    p.add_argument("--fdm-cache", dest="fdm_cache", help="directory for cached oracle grids")
    p.add_argument("--node-cap", dest="node_cap", type=int,
                   help="max interior unknowns for the 2D oracle")
    p.add_argument("--share-basis", dest="share_basis", action="store_const", const=True,
                   help="reuse one random draw for every subdomain")
    p.add_argument("--config", help="flat key = value file supplying any of the above")
    p.add_argument("--out", help="CSV output path (default: stdout)")


def _build_config(args):
    values = read_config_file(args.config) if args.config else {}
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    params = {k: values.pop(k) for k in ("eps", "eps1", "eps2") if k in values}
    if "problem" not in values:
        raise ValueError("a problem name is required (--problem or config file)")
    if "weights" in values:
        values["block_weights"] = values.pop("weights")
    out = values.pop("out", None)
    cfg = RunConfig(params=params, **values)
    cfg.out = out
    # fail fast on unknown names/params before any heavy work
    make_problem(cfg.problem, **cfg.params)
    return cfg


def _write_samples(report, path, n):
    axes, u_num, u_ref = solution_samples(report, n=n)
    diff = np.abs(u_num - u_ref)
    rows = []
    if len(axes) == 1:
        for i, xv in enumerate(axes[0]):
            rows.append(
                {"x": xv, "u_num": u_num[i], "u_ref": u_ref[i], "abs_diff": diff[i]}
            )
    else:
        x, y = axes
        for i in range(x.size):
            for j in range(y.size):
                rows.append(
                    {
                        "x": x[i],
                        "y": y[j],
                        "u_num": u_num[i, j],
                        "u_ref": u_ref[i, j],
                        "abs_diff": diff[i, j],
                    }
                )
    write_csv(rows, path)
    return (axes, u_num, u_ref)


def _cmd_solve(args):
    cfg = _build_config(args)
    report = run(cfg, dump_system=args.dump_system)
    samples = None
    if args.samples:
        samples = _write_samples(report, args.samples, args.samples_n)
    if args.figures:
        from .plots import save_report_figures

        kw = {"samples": samples} if args.samples_n else {}
        for path in save_report_figures(report, args.figures, **kw):
            print(path, file=sys.stderr)
    write_csv([report.row()], cfg.out)
    return 0


def _cmd_sweep(args):
    base = _build_config(args)
    cast = _parse_counts if args.axis == "S" else (float if args.axis == "beta" else int)
    values = [cast(tok) for tok in str(args.values).split(",") if tok.strip()]
    seeds = _parse_list(args.seeds, int) if args.seeds else None
    rows = sweep(base, args.axis, values, seeds=seeds)
    write_csv(rows, base.out)
    return 0


def _cmd_table(args):
    rows_sel = _parse_list(args.rows, int) if args.rows else None
    rows = table(args.name, rows=rows_sel, seed=args.seed, fdm_cache=args.fdm_cache)
    write_csv(rows, args.out)
    return 0


def _cmd_oracle(args):
    params = {
        k: getattr(args, k) for k in ("eps", "eps1", "eps2") if getattr(args, k) is not None
    }
    problem = make_problem(args.problem, **params)
    if problem.dim == 1:
        h = args.h or fdm_mod.DEFAULT_H_1D
        sol = fdm_mod.fdm_solve_1d(problem, h)
    else:
        h = args.h or fdm_mod.DEFAULT_H_2D
        kw = {"node_cap": args.node_cap} if args.node_cap else {}
        sol = fdm_mod.fdm_solve_2d(problem, h, **kw)
    import os

    os.makedirs(args.cache_dir, exist_ok=True)
    path = fdm_mod.cache_path(args.cache_dir, problem, h)
    fdm_mod.save_solution(sol, path)
    print(path)
    print(
        f"nodes={'x'.join(str(a.size) for a in sol.axes)} residual={sol.residual:.3e}",
        file=sys.stderr,
    )
    return 0


def build_parser():
    parser = _Parser(prog="msrbf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="single solve from flags or a config file")
    _add_run_flags(p_solve)
    p_solve.add_argument("--samples", help="CSV dump of (x, u_num, u_ref, |diff|)")
    p_solve.add_argument("--samples-n", dest="samples_n", type=int,
                         help="per-axis resolution of the samples dump")
    p_solve.add_argument("--figures", help="directory for rendered PNG figures")
    p_solve.add_argument("--dump-system", dest="dump_system",
                         help="write the stacked (A, b) to this .npz file")
    p_solve.set_defaults(fn=_cmd_solve)

    p_sweep = sub.add_parser("sweep", help="repeat a solve along one parameter axis")
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=["J", "Q", "S", "beta", "seed"])
    p_sweep.add_argument("--values", required=True, help="comma-separated axis values")
    p_sweep.add_argument("--seeds", help="comma-separated seeds for replication")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_table = sub.add_parser("table", help="run a published-table preset")
    p_table.add_argument("name")
    p_table.add_argument("--rows", help="comma-separated row indices to run")
    p_table.add_argument("--seed", type=int)
    p_table.add_argument("--fdm-cache", dest="fdm_cache")
    p_table.add_argument("--out")
    p_table.set_defaults(fn=_cmd_table)

    p_oracle = sub.add_parser("oracle", help="build and cache a reference grid")
    p_oracle.add_argument("--problem", required=True)
    p_oracle.add_argument("--eps", type=float)
    p_oracle.add_argument("--eps1", type=float)
    p_oracle.add_argument("--eps2", type=float)
    p_oracle.add_argument("--h", type=float, help="grid step (defaults per dimension)")
    p_oracle.add_argument("--node-cap", dest="node_cap", type=int)
    p_oracle.add_argument("--cache-dir", dest="cache_dir", required=True)
    p_oracle.set_defaults(fn=_cmd_oracle)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _NUMERIC_ERRORS as exc:
        print(f"msrbf: numerical failure: {exc}", file=sys.stderr)
        return 2
    except _USAGE_ERRORS as exc:
        print(f"msrbf: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
