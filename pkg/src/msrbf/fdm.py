"""Finite-difference reference oracle for problems without closed forms.

Conservative second-order schemes on uniform grids: midpoint-coefficient
tridiagonal in one dimension, five-point edge-midpoint stencil in two.
Solutions can be cached to a small binary grid-file format so expensive
two-dimensional references are computed once.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg
from scipy.linalg import solve_banded

from .errors import OutOfDomainError, SolverError

DEFAULT_H_1D = 1e-4
DEFAULT_H_2D = 1.0 / 1024.0
# default refusal threshold on interior unknowns; finer two-dimensional
# grids (h = 5e-4, ~4e6 unknowns) are an explicit opt-in
DEFAULT_NODE_CAP = 1_200_000
# beyond this many unknowns a sparse direct solve is replaced by
# algebraic multigrid with conjugate-gradient acceleration
_DIRECT_LIMIT = 300_000
_RESIDUAL_TOL = 1e-10

_MAGIC = b"MSRBFGRD"


@dataclass(frozen=True)
class FdmSolution:
    """Nodal reference solution on a uniform grid.

    ``values`` has shape (n+1,) in one dimension and (nx+1, ny+1) in two,
    with entry [i, j] at (axes[0][i], axes[1][j]).  ``residual`` is the
    normwise relative residual of the discrete interior system.
    """

    problem: str
    params: dict
    h: float
    axes: tuple
    values: np.ndarray
    residual: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        for a in axes:
            a.setflags(write=False)
        object.__setattr__(self, "axes", axes)

    @property
    def dim(self) -> int:
        return len(self.axes)


def _grid_count(lo, hi, h):
    n = (hi - lo) / h
    if abs(n - round(n)) > 1e-8 * max(1.0, abs(n)):
        raise ValueError(f"step {h} does not divide the interval [{lo}, {hi}]")
    n = int(round(n))
    if n < 2:
        raise ValueError(f"step {h} leaves fewer than 2 cells on [{lo}, {hi}]")
    return n


def fdm_solve_1d(problem, h=DEFAULT_H_1D):
    """Conservative tridiagonal solve of -(A u')' + kappa u = f.

    Fluxes use A at cell midpoints:
    -[A_{i+1/2}(u_{i+1}-u_i) - A_{i-1/2}(u_i-u_{i-1})]/h^2 + kappa_i u_i = f_i.
    """
    if problem.dim != 1:
        raise ValueError("fdm_solve_1d needs a one-dimensional problem")
    lo, hi = float(problem.domain.lower[0]), float(problem.domain.upper[0])
    n = _grid_count(lo, hi, h)
    x = np.linspace(lo, hi, n + 1)
    a_mid = np.asarray(problem.coefficient(lo + (np.arange(n) + 0.5) * h), dtype=float)
    xi = x[1:-1]
    f = np.asarray(problem.source(xi), dtype=float)
    kap = np.zeros_like(xi)
    if problem.reaction is not None:
        kap = np.broadcast_to(np.asarray(problem.reaction(xi), dtype=float), xi.shape)
    g0 = float(np.asarray(problem.dirichlet(np.array([lo]))).ravel()[0])
    g1 = float(np.asarray(problem.dirichlet(np.array([hi]))).ravel()[0])

    # rows scaled by h^2 to keep entries O(A)
    lower = -a_mid[:-1]
    diag = a_mid[:-1] + a_mid[1:] + h * h * kap
    upper = -a_mid[1:]
    rhs = h * h * f
    rhs[0] += a_mid[0] * g0
    rhs[-1] += a_mid[-1] * g1

    ab = np.zeros((3, n - 1))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    u_int = solve_banded((1, 1), ab, rhs)

    r = diag * u_int - rhs
    r[1:] += lower[1:] * u_int[:-1]
    r[:-1] += upper[:-1] * u_int[1:]
    scale = (np.abs(lower).max(initial=0) + diag.max() + np.abs(upper).max(initial=0)) * np.abs(
        u_int
    ).max() + np.abs(rhs).max()
    residual = float(np.abs(r).max() / scale)
    if residual > _RESIDUAL_TOL:
        raise SolverError(f"tridiagonal solve residual {residual:.2e} above tolerance")
    u = np.concatenate(([g0], u_int, [g1]))
    return FdmSolution(problem.name, dict(problem.params), float(h), (x,), u, residual)


def fdm_solve_2d(problem, h=DEFAULT_H_2D, node_cap=DEFAULT_NODE_CAP):
    """Five-point conservative solve of -div(A grad u) + kappa u = f.

    Edge coefficients are A at edge midpoints, giving a symmetric
    positive-definite system; solved directly when small, by smoothed
    aggregation multigrid with CG acceleration when large.
    """
    if problem.dim != 2:
        raise ValueError("fdm_solve_2d needs a two-dimensional problem")
    lox, hix = float(problem.domain.lower[0]), float(problem.domain.upper[0])
    loy, hiy = float(problem.domain.lower[1]), float(problem.domain.upper[1])
    nx = _grid_count(lox, hix, h)
    ny = _grid_count(loy, hiy, h)
    n_unknowns = (nx - 1) * (ny - 1)
    if n_unknowns > node_cap:
        raise ValueError(
            f"grid step {h} gives {n_unknowns} unknowns, above the cap {node_cap}; "
            "raise node_cap to opt in"
        )
    x = np.linspace(lox, hix, nx + 1)
    y = np.linspace(loy, hiy, ny + 1)
    xi, yi = x[1:-1], y[1:-1]
    gx, gy = np.meshgrid(xi, yi, indexing="ij")

    aE = np.asarray(problem.coefficient(gx + 0.5 * h, gy), dtype=float)
    aW = np.asarray(problem.coefficient(gx - 0.5 * h, gy), dtype=float)
    aN = np.asarray(problem.coefficient(gx, gy + 0.5 * h), dtype=float)
    aS = np.asarray(problem.coefficient(gx, gy - 0.5 * h), dtype=float)
    f = np.asarray(problem.source(gx, gy), dtype=float)
    kap = np.zeros_like(gx)
    if problem.reaction is not None:
        kap = np.broadcast_to(np.asarray(problem.reaction(gx, gy), dtype=float), gx.shape)

    idx = np.arange(n_unknowns).reshape(nx - 1, ny - 1)
    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [(aE + aW + aN + aS + h * h * kap).ravel()]
    rhs = h * h * f

    # neighbor couplings; boundary neighbors move to the right-hand side
    rows += [idx[:-1, :].ravel(), idx[1:, :].ravel()]
    cols += [idx[1:, :].ravel(), idx[:-1, :].ravel()]
    vals += [-aE[:-1, :].ravel(), -aW[1:, :].ravel()]
    rows += [idx[:, :-1].ravel(), idx[:, 1:].ravel()]
    cols += [idx[:, 1:].ravel(), idx[:, :-1].ravel()]
    vals += [-aN[:, :-1].ravel(), -aS[:, 1:].ravel()]

    g = problem.dirichlet
    rhs[0, :] += aW[0, :] * np.asarray(g(np.full_like(yi, lox), yi), dtype=float)
    rhs[-1, :] += aE[-1, :] * np.asarray(g(np.full_like(yi, hix), yi), dtype=float)
    rhs[:, 0] += aS[:, 0] * np.asarray(g(xi, np.full_like(xi, loy)), dtype=float)
    rhs[:, -1] += aN[:, -1] * np.asarray(g(xi, np.full_like(xi, hiy)), dtype=float)

    A = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_unknowns, n_unknowns),
    ).tocsr()
    b = rhs.ravel()

    if n_unknowns <= _DIRECT_LIMIT:
        u_int = scipy.sparse.linalg.spsolve(A.tocsc(), b)
    else:
        import pyamg

        ml = pyamg.smoothed_aggregation_solver(A, symmetry="symmetric")
        u_int = ml.solve(b, tol=1e-11, accel="cg", maxiter=400)

    r = A @ u_int - b
    bnorm = float(np.linalg.norm(b))
    residual = float(np.linalg.norm(r) / bnorm) if bnorm > 0 else float(np.linalg.norm(r))
    if residual > _RESIDUAL_TOL:
        raise SolverError(f"sparse solve residual {residual:.2e} above tolerance")

    u = np.empty((nx + 1, ny + 1))
    u[1:-1, 1:-1] = u_int.reshape(nx - 1, ny - 1)
    u[0, :] = np.asarray(g(np.full_like(y, lox), y), dtype=float)
    u[-1, :] = np.asarray(g(np.full_like(y, hix), y), dtype=float)
    u[:, 0] = np.asarray(g(x, np.full_like(x, loy)), dtype=float)
    u[:, -1] = np.asarray(g(x, np.full_like(x, hiy)), dtype=float)
    return FdmSolution(problem.name, dict(problem.params), float(h), (x, y), u, residual)


def interpolate(sol, points):
    """Linear (1D) / bilinear (2D) interpolation of the nodal solution."""
    pts = np.asarray(points, dtype=float)
    if sol.dim == 1:
        x = pts.ravel() if pts.ndim > 1 else np.atleast_1d(pts)
        ax = sol.axes[0]
        if np.any(x < ax[0] - 1e-12) or np.any(x > ax[-1] + 1e-12):
            raise OutOfDomainError("interpolation point outside the grid")
        out = np.interp(x, ax, sol.values)
        return out if np.ndim(points) else float(out[0])
    if pts.ndim == 1:
        pts = pts.reshape(1, 2)
    ax, ay = sol.axes
    if (
        np.any(pts[:, 0] < ax[0] - 1e-12)
        or np.any(pts[:, 0] > ax[-1] + 1e-12)
        or np.any(pts[:, 1] < ay[0] - 1e-12)
        or np.any(pts[:, 1] > ay[-1] + 1e-12)
    ):
        raise OutOfDomainError("interpolation point outside the grid")
    i = np.clip(np.searchsorted(ax, pts[:, 0], side="right") - 1, 0, ax.size - 2)
    j = np.clip(np.searchsorted(ay, pts[:, 1], side="right") - 1, 0, ay.size - 2)
    tx = np.clip((pts[:, 0] - ax[i]) / (ax[i + 1] - ax[i]), 0.0, 1.0)
    ty = np.clip((pts[:, 1] - ay[j]) / (ay[j + 1] - ay[j]), 0.0, 1.0)
    v = sol.values
    out = (
        v[i, j] * (1 - tx) * (1 - ty)
        + v[i + 1, j] * tx * (1 - ty)
        + v[i, j + 1] * (1 - tx) * ty
        + v[i + 1, j + 1] * tx * ty
    )
    return out if np.asarray(points).ndim > 1 else float(out[0])


def cache_path(directory, problem, h):
    """Canonical cache filename for one oracle solution."""
    key = "".join(f"-{k}={problem.params[k]:g}" for k in sorted(problem.params))
    return f"{directory}/fdm-{problem.name}{key}-h{h!r}.grid"


def save_solution(sol, path):
    """Write the binary grid file: header (dim, h, extents, shape), then
    row-major 64-bit nodal values."""
    meta = json.dumps({"problem": sol.problem, "params": sol.params}).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<qd", sol.dim, sol.h))
        for a in sol.axes:
            fh.write(struct.pack("<dd", a[0], a[-1]))
        fh.write(struct.pack("<" + "q" * sol.dim, *sol.values.shape))
        fh.write(struct.pack("<d", sol.residual))
        fh.write(struct.pack("<q", len(meta)))
        fh.write(meta)
        fh.write(np.ascontiguousarray(sol.values).tobytes())


def load_solution(path):
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise ValueError(f"{path} is not an oracle grid file")
        dim, h = struct.unpack("<qd", fh.read(16))
        extents = [struct.unpack("<dd", fh.read(16)) for _ in range(dim)]
        shape = struct.unpack("<" + "q" * dim, fh.read(8 * dim))
        (residual,) = struct.unpack("<d", fh.read(8))
        (meta_len,) = struct.unpack("<q", fh.read(8))
        meta = json.loads(fh.read(meta_len).decode())
        values = np.frombuffer(fh.read(8 * int(np.prod(shape))), dtype=float).reshape(shape)
    axes = tuple(np.linspace(lo, hi, n) for (lo, hi), n in zip(extents, shape))
    return FdmSolution(meta["problem"], meta["params"], h, axes, values.copy(), residual)
