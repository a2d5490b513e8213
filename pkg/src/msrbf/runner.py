"""Experiment harness: single solves, parameter sweeps, and table presets.

A run executes the full pipeline: partition the domain, draw the frozen
random bases, sample collocation points, assemble the stacked weak-form
system, solve it by minimal-norm least squares, and score the stitched
solution against a reference (closed form or finite differences) on a
uniform test grid.  Timings split into preprocess (everything up to and
including assembly), optimize (the least-squares solve) and test
(reference evaluation and metrics).
"""

from __future__ import annotations

import csv
import io
import os
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import fdm as fdm_mod
from .assembly import assemble_system, stack
from .errors import UndefinedMetricError
from .lstsq import solve_min_norm
from .partition import decompose, sample_collocation
from .problems import make_problem
from .rbf import PiecewiseRbfSolution, RbfConfig, random_init

DEFAULT_NTEST_1D = 10001
DEFAULT_NTEST_2D = 1001
# stacked matrices above this byte count are factorized in place, with the
# residual recovered from a temporary on-disk copy
_OVERWRITE_BYTES = 1_000_000_000

SWEEP_AXES = ("J", "Q", "S", "beta", "seed")

CSV_COLUMNS = [
    "problem",
    "eps",
    "eps1",
    "eps2",
    "S",
    "J",
    "Q",
    "beta",
    "N",
    "M",
    "max_error",
    "rms_error",
    "t_pre",
    "t_opt",
    "t_test",
    "seed",
]


@dataclass
class RunConfig:
    """Everything one solve depends on; validated before running."""

    problem: str
    params: dict = field(default_factory=dict)
    S: object = None  # cells per axis: int, or (s1, s2) in two dimensions
    J: int = 50
    Q: int = 20
    beta: float = 2.0
    seed: int = 0
    n_q: int = None  # quadrature nodes per axis; defaults 80 (1D) / 10 (2D)
    N_bper: int = 10
    N_cper: int = 10
    rcond: float = None
    driver: str = None  # least-squares driver; None picks automatically
    continuity: str = "grad"  # "grad" = full-gradient rows, "normal" = normal-only
    block_weights: tuple = (1.0, 1.0, 1.0)
    n_test: int = None  # test-grid points per axis
    reference: str = "auto"  # "exact" | "fdm" | "auto"
    fdm_h: float = None
    fdm_cache: str = None  # directory of cached oracle grids
    node_cap: int = None
    share_basis: bool = False
    out: str = None  # CSV destination used by the command-line layer

    def counts(self, dim):
        if self.S is None:
            raise ValueError("S (subdomain counts) is required")
        if np.ndim(self.S) == 0:
            return (int(self.S),) if dim == 1 else (int(self.S), int(self.S))
        counts = tuple(int(s) for s in self.S)
        if len(counts) != dim:
            raise ValueError(f"S={self.S} does not match a {dim}-dimensional problem")
        return counts

    def validate(self, problem):
        counts = self.counts(problem.dim)
        if any(c < 1 for c in counts):
            raise ValueError(f"subdomain counts must be positive, got {counts}")
        if self.J < 1 or self.Q < 1:
            raise ValueError("J and Q must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.n_q is not None and self.n_q < 2:
            raise ValueError("n_q must be at least 2")
        if self.N_bper < 1 or self.N_cper < 1:
            raise ValueError("collocation counts must be positive")
        if self.continuity not in ("grad", "normal"):
            raise ValueError(f"unknown continuity mode {self.continuity!r}")
        if self.reference not in ("auto", "exact", "fdm"):
            raise ValueError(f"unknown reference source {self.reference!r}")
        if self.reference == "exact" and not problem.has_exact:
            raise ValueError(f"problem {problem.name} has no exact solution")
        if len(tuple(self.block_weights)) != 3:
            raise ValueError("block_weights needs exactly three entries")
        if self.n_test is not None and self.n_test < 2:
            raise ValueError("n_test must be at least 2")


@dataclass
class SolveReport:
    """Outcome of one run: errors per the relative sup/Euclidean metrics,
    solver diagnostics, and phase timings in seconds."""

    config: RunConfig
    N: int
    M: int
    max_error: float
    rms_error: float
    residual_norm: float
    rank: int
    singular_value_extremes: tuple
    timings: dict
    solution: PiecewiseRbfSolution

    @property
    def seed(self) -> int:
        return self.config.seed

    def row(self):
        """Flat CSV row in the stable column order."""
        p = self.config.params
        s = self.config.S
        s_txt = "x".join(str(c) for c in s) if np.ndim(s) else str(s)
        return {
            "problem": self.config.problem,
            "eps": p.get("eps", ""),
            "eps1": p.get("eps1", ""),
            "eps2": p.get("eps2", ""),
            "S": s_txt,
            "J": self.config.J,
            "Q": self.config.Q,
            "beta": self.config.beta,
            "N": self.N,
            "M": self.M,
            "max_error": self.max_error,
            "rms_error": self.rms_error,
            "t_pre": round(self.timings["preprocess"], 4),
            "t_opt": round(self.timings["optimize"], 4),
            "t_test": round(self.timings["test"], 4),
            "seed": self.config.seed,
        }


def metrics(u_approx, u_ref):
    """Relative sup-norm and Euclidean-norm errors over the test samples."""
    ua = np.asarray(u_approx, dtype=float).ravel()
    ur = np.asarray(u_ref, dtype=float).ravel()
    if ua.size == 0 or ua.shape != ur.shape:
        raise ValueError("metric inputs must be non-empty and equal length")
    ref_inf = np.abs(ur).max()
    ref_2 = np.linalg.norm(ur)
    if ref_inf == 0.0 or ref_2 == 0.0:
        raise UndefinedMetricError("reference norm is zero; relative errors undefined")
    diff = ua - ur
    return float(np.abs(diff).max() / ref_inf), float(np.linalg.norm(diff) / ref_2)


def _test_axes(problem, n_test):
    n = n_test or (DEFAULT_NTEST_1D if problem.dim == 1 else DEFAULT_NTEST_2D)
    return [
        np.linspace(problem.domain.lower[d], problem.domain.upper[d], n)
        for d in range(problem.dim)
    ]


def _reference_values(problem, config, axes):
    source = config.reference
    if source == "auto":
        source = "exact" if problem.has_exact else "fdm"
    if source == "exact":
        if problem.dim == 1:
            return problem.exact(axes[0])
        return problem.exact(axes[0][:, None], axes[1][None, :])
    h = config.fdm_h or (fdm_mod.DEFAULT_H_1D if problem.dim == 1 else fdm_mod.DEFAULT_H_2D)
    sol = None
    path = None
    if config.fdm_cache:
        path = fdm_mod.cache_path(config.fdm_cache, problem, h)
        if os.path.exists(path):
            sol = fdm_mod.load_solution(path)
    if sol is None:
        if problem.dim == 1:
            sol = fdm_mod.fdm_solve_1d(problem, h)
        else:
            kw = {"node_cap": config.node_cap} if config.node_cap else {}
            sol = fdm_mod.fdm_solve_2d(problem, h, **kw)
        if path is not None:
            os.makedirs(config.fdm_cache, exist_ok=True)
            fdm_mod.save_solution(sol, path)
    if problem.dim == 1:
        return fdm_mod.interpolate(sol, axes[0])
    gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
    vals = fdm_mod.interpolate(sol, np.column_stack([gx.ravel(), gy.ravel()]))
    return vals.reshape(gx.shape)


def run(config, dump_system=None):
    """Execute one full solve and score it; pure up to timing fields.

    ``dump_system`` optionally names a ``.npz`` file receiving the stacked
    (A, b) before the solve, for offline inspection.
    """
    problem = make_problem(config.problem, **config.params)
    config.validate(problem)
    counts = config.counts(problem.dim)

    t0 = time.perf_counter()
    partition = decompose(problem.domain, counts)
    rbf_cfg = RbfConfig(
        J=config.J,
        beta=config.beta,
        dim=problem.dim,
        seed=config.seed,
        share_basis=config.share_basis,
    )
    nets = random_init(rbf_cfg, partition.S)
    colloc_rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(1)[0])
    colloc = sample_collocation(partition, config.N_bper, config.N_cper, rng=colloc_rng)
    system = assemble_system(
        problem,
        partition,
        nets,
        config.Q,
        colloc,
        n_q=config.n_q,
        continuity=config.continuity,
    )
    A, b = stack(system, config.block_weights)
    t_pre = time.perf_counter() - t0
    if dump_system is not None:
        np.savez(dump_system, A=np.ascontiguousarray(A), b=b)

    t0 = time.perf_counter()
    result = solve_min_norm(
        A,
        b,
        rcond=config.rcond,
        driver=config.driver,
        overwrite_a=A.nbytes > _OVERWRITE_BYTES,
    )
    t_opt = time.perf_counter() - t0

    J = config.J
    fitted = [
        net.with_weights(result.weights[k * J : (k + 1) * J]) for k, net in enumerate(nets)
    ]
    solution = PiecewiseRbfSolution(partition, fitted, rbf_cfg)

    t0 = time.perf_counter()
    axes = _test_axes(problem, config.n_test)
    u_num = solution.evaluate_on_grid(*axes)
    u_ref = _reference_values(problem, config, axes)
    max_err, rms_err = metrics(u_num, u_ref)
    t_test = time.perf_counter() - t0

    return SolveReport(
        config=config,
        N=system.N,
        M=system.M,
        max_error=max_err,
        rms_error=rms_err,
        residual_norm=result.residual_norm,
        rank=result.rank,
        singular_value_extremes=result.singular_value_extremes,
        timings={"preprocess": t_pre, "optimize": t_opt, "test": t_test},
        solution=solution,
    )


def solution_samples(report, n=None):
    """(axes, u_num, u_ref) for a finished report, e.g. for dumps or plots.

    ``n`` overrides the per-axis sample count (defaults to the run's test
    grid).  Cached oracle grids are reused when the config names a cache.
    """
    problem = make_problem(report.config.problem, **report.config.params)
    axes = _test_axes(problem, n or report.config.n_test)
    u_num = report.solution.evaluate_on_grid(*axes)
    u_ref = _reference_values(problem, report.config, axes)
    return axes, u_num, u_ref


def _set_axis(config, axis, value):
    if axis in ("J", "Q", "seed"):
        return replace(config, **{axis: int(value)})
    if axis == "beta":
        return replace(config, beta=float(value))
    if axis == "S":
        return replace(config, S=value)
    raise ValueError(f"unknown sweep axis {axis!r}; choose one of {SWEEP_AXES}")


def sweep(base, axis, values, seeds=None):
    """One run per value (times seeds); rows ready for CSV.

    With several seeds each value yields a single aggregated row carrying
    median/min/max error columns; otherwise rows use the standard schema.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose one of {SWEEP_AXES}")
    if seeds is None or axis == "seed":
        seeds = [base.seed]
    rows = []
    for value in values:
        cfg = _set_axis(base, axis, value)
        reports = [run(replace(cfg, seed=int(s))) for s in seeds] if axis != "seed" else [
            run(cfg)
        ]
        if len(reports) == 1:
            rows.append(reports[0].row())
            continue
        maxes = [r.max_error for r in reports]
        rmses = [r.rms_error for r in reports]
        row = reports[0].row()
        row.pop("max_error")
        row.pop("rms_error")
        row.update(
            seed=";".join(str(s) for s in seeds),
            max_error_median=float(np.median(maxes)),
            max_error_min=min(maxes),
            max_error_max=max(maxes),
            rms_error_median=float(np.median(rmses)),
            rms_error_min=min(rmses),
            rms_error_max=max(rmses),
        )
        rows.append(row)
    return rows


def _table1():
    return [
        RunConfig(problem="periodic-1d", params={"eps": e}, S=s, J=100, Q=20, beta=2.0)
        for e, s in [(0.5, 5), (0.1, 10), (0.05, 20), (0.01, 50), (0.005, 100)]
    ]


def _double_scale_rows(eps_S):
    return [
        RunConfig(
            problem="double-scale-1d",
            params={"eps": e},
            S=s,
            J=50,
            Q=20,
            beta=5.0,
            reference="fdm",
        )
        for e, s in eps_S
    ]


def _table5():
    return [
        RunConfig(
            problem="three-scale-1d",
            params={"eps1": e1, "eps2": e2},
            S=s,
            J=50,
            Q=20,
            beta=5.0,
            reference="fdm",
        )
        for (e1, e2), s in [((0.1, 0.01), 100), ((0.05, 0.005), 200)]
    ]


def _table9():
    return [
        RunConfig(problem="radial-2d", params={"eps": e}, S=(s, s), J=200, Q=10, beta=1.0)
        for e, s in [(0.5, 5), (0.2, 8), (0.1, 10)]
    ]


def _table10():
    return [
        RunConfig(
            problem="double-scale-2d",
            params={"eps": e},
            S=(s, s),
            J=200,
            Q=9,
            beta=3.0,
            reference="fdm",
        )
        for e, s in [(0.5, 5), (0.2, 8), (0.1, 10)]
    ]


def _table11():
    return [RunConfig(problem="poisson-boltzmann-2d", S=(10, 10), J=200, Q=9, beta=2.0)]


TABLES = {
    "table1": _table1,
    "table2-rrnn": lambda: _double_scale_rows(
        [(0.5, 5), (0.1, 10), (0.05, 20), (0.01, 100), (0.005, 200)]
    ),
    "table4-rrnn": lambda: _double_scale_rows(
        [(0.05, 20), (0.01, 100), (0.005, 200), (0.002, 500)]
    ),
    "table5-rrnn": _table5,
    "table9-rrnn": _table9,
    "table10-rrnn": _table10,
    "table11-rrnn": _table11,
}


def table_configs(name):
    """Run configurations of one published-table preset."""
    try:
        build = TABLES[name]
    except KeyError:
        known = ", ".join(sorted(TABLES))
        raise ValueError(f"unknown table {name!r}; known tables: {known}") from None
    return build()


def table(name, rows=None, seed=None, fdm_cache=None):
    """Execute a table preset and return its CSV rows.

    ``rows`` optionally restricts to a subset of row indices (the larger
    presets include runs that take minutes each).
    """
    configs = table_configs(name)
    if rows is not None:
        configs = [configs[i] for i in rows]
    out = []
    for cfg in configs:
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        if fdm_cache is not None:
            cfg = replace(cfg, fdm_cache=fdm_cache)
        out.append(run(cfg).row())
    return out


def write_csv(rows, out=None):
    """Write dict rows as CSV to a path, a file object, or stdout."""
    if not rows:
        raise ValueError("no rows to write")
    cols = list(rows[0].keys())
    for row in rows[1:]:
        cols += [k for k in row if k not in cols]

    def _emit(fh):
        writer = csv.DictWriter(fh, fieldnames=cols, restval="")
        writer.writeheader()
        writer.writerows(rows)

    if out is None:
        _emit(sys.stdout)
    elif isinstance(out, (str, os.PathLike)):
        with open(out, "w", newline="") as fh:
            _emit(fh)
    else:
        _emit(out)


def format_csv(rows):
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()
