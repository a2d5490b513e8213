"""Per-subdomain Gaussian kernel expansions with frozen random parameters.

Each subdomain carries its own random feature basis

    rho_i(xhat) = exp(-sigma_i ||xhat - c_i||^2),   i = 1, ..., J,

living on the reference cube.  Centers and shape parameters are drawn once
from a seeded generator and never trained; only the linear output weights
are degrees of freedom.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import lstsq
from .partition import as_points, locate, _axis_cells


@dataclass(frozen=True)
class RbfConfig:
    """Sampling law for one family of local bases.

    J kernels per subdomain, shape parameters uniform on [0, beta],
    centers uniform on the reference cube.  With ``share_basis`` every
    subdomain reuses the same draw; otherwise draws are independent,
    consumed in subdomain-id order.
    """

    J: int
    beta: float
    dim: int
    seed: int = 0
    share_basis: bool = False

    def __post_init__(self):
        if self.J < 1:
            raise ValueError(f"J must be positive, got {self.J}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")


@dataclass(frozen=True)
class LocalRbfNet:
    """Frozen Gaussian features of one subdomain, plus optional output weights."""

    centers: np.ndarray  # (J, dim), in [-1, 1]^dim
    shapes: np.ndarray  # (J,), nonnegative
    weights: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        if c.ndim != 2:
            raise ValueError("centers must have shape (J, dim)")
        s = np.asarray(self.shapes, dtype=float)
        if s.shape != (c.shape[0],):
            raise ValueError("shapes must have one entry per kernel")
        if np.any(s < 0):
            raise ValueError("shape parameters must be nonnegative")
        if np.max(np.abs(c), initial=0.0) > 1.0:
            raise ValueError("centers must lie in the reference cube")
        c.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "shapes", s)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (c.shape[0],):
                raise ValueError("weights must have one entry per kernel")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    @property
    def J(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def with_weights(self, w):
        return replace(self, weights=np.array(w, dtype=float))


def random_init(cfg, S):
    """Draw the frozen bases for ``S`` subdomains from ``cfg.seed``."""
    if S < 1:
        raise ValueError(f"S must be positive, got {S}")
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))

    def draw():
        centers = rng.uniform(-1.0, 1.0, size=(cfg.J, cfg.dim))
        shapes = rng.uniform(0.0, cfg.beta, size=cfg.J)
        return LocalRbfNet(centers, shapes)

    if cfg.share_basis:
        net = draw()
        return [net] * S
    return [draw() for _ in range(S)]


def eval_basis(net, xhat):
    """Kernel values at reference points; shape (n, J)."""
    pts = as_points(net.dim, xhat)
    d2 = ((pts[:, None, :] - net.centers[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-net.shapes * d2)


def eval_basis_grad(net, xhat):
    """Kernel values and reference-coordinate gradients.

    Returns (rho, grad) with shapes (n, J) and (n, J, dim);
    grad = -2 sigma (xhat - c) rho.
    """
    pts = as_points(net.dim, xhat)
    diff = pts[:, None, :] - net.centers[None, :, :]
    rho = np.exp(-net.shapes * (diff**2).sum(axis=2))
    grad = -2.0 * net.shapes[None, :, None] * diff * rho[:, :, None]
    return rho, grad


def elm_fit(net, xhat, values, rcond=None):
    """Fit output weights to point samples by minimal-norm least squares.

    A pure interpolation utility: the PDE solver assembles weak-form rows
    instead, but fitting known samples exercises the same frozen basis.
    Returns the fitted copy of ``net``.
    """
    A = eval_basis(net, xhat)
    res = lstsq.solve_min_norm(A, np.asarray(values, dtype=float), rcond=rcond)
    return net.with_weights(res.weights)


@dataclass(frozen=True)
class PiecewiseRbfSolution:
    """Global solution stitched from fitted local nets, one per subdomain."""

    partition: object
    nets: tuple
    config: RbfConfig

    def __post_init__(self):
        object.__setattr__(self, "nets", tuple(self.nets))
        if len(self.nets) != self.partition.S:
            raise ValueError("need exactly one net per subdomain")
        if any(net.weights is None for net in self.nets):
            raise ValueError("all nets must carry fitted weights")

    @property
    def weights(self) -> np.ndarray:
        """All output weights, concatenated in subdomain-id order."""
        return np.concatenate([net.weights for net in self.nets])

    def evaluate(self, points):
        """Point values of the piecewise expansion; ownership resolves facets."""
        pts = as_points(self.partition.domain.dim, points)
        ids = locate(self.partition, pts)
        out = np.empty(pts.shape[0])
        for k in np.unique(ids):
            sel = ids == k
            sub = self.partition.subdomains[k]
            xhat = sub.to_reference(pts[sel])
            out[sel] = eval_basis(self.nets[k], xhat) @ self.nets[k].weights
        return out

    def evaluate_on_grid(self, *axes):
        """Values on a tensor grid, exploiting the separable kernels.

        One dimension: ``evaluate_on_grid(x)`` returns shape (nx,).  Two
        dimensions: ``evaluate_on_grid(x, y)`` returns shape (nx, ny) with
        entry [a, b] at point (x[a], y[b]).  Far cheaper than
        :meth:`evaluate` on the million-point grids used for error metrics.
        """
        dim = self.partition.domain.dim
        if len(axes) != dim:
            raise ValueError(f"expected {dim} axes, got {len(axes)}")
        if dim == 1:
            return self.evaluate(np.asarray(axes[0], dtype=float))
        x = np.asarray(axes[0], dtype=float)
        y = np.asarray(axes[1], dtype=float)
        ex, ey = self.partition.edges
        ix = _axis_cells(ex, x)
        iy = _axis_cells(ey, y)
        out = np.empty((x.size, y.size))
        s2 = self.partition.counts[1]
        for i1 in np.unique(ix):
            selx = np.flatnonzero(ix == i1)
            for i2 in np.unique(iy):
                sely = np.flatnonzero(iy == i2)
                sub = self.partition.subdomains[i1 * s2 + i2]
                net = self.nets[i1 * s2 + i2]
                xh = 2.0 * (x[selx] - sub.lo[0]) / sub.widths[0] - 1.0
                yh = 2.0 * (y[sely] - sub.lo[1]) / sub.widths[1] - 1.0
                Ex = np.exp(-net.shapes * (xh[:, None] - net.centers[:, 0]) ** 2)
                Ey = np.exp(-net.shapes * (yh[:, None] - net.centers[:, 1]) ** 2)
                out[np.ix_(selx, sely)] = (Ex * net.weights) @ Ey.T
        return out
