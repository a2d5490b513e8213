"""Axis-aligned box domains, uniform partitions, and collocation sampling.

Every subdomain carries an affine map onto the reference cube [-1, 1]^dim;
all kernel evaluation and quadrature happens in reference coordinates.
Points shared by several subdomains (internal facets, corners) are owned by
the lowest subdomain id, so location queries are unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfDomainError

_EDGE_RTOL = 1e-12  # slack for points that land on a facet up to roundoff


def _freeze(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box, by default the unit box [0, 1]^dim."""

    dim: int
    lower: np.ndarray = None
    upper: np.ndarray = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        lo = np.zeros(self.dim) if self.lower is None else np.atleast_1d(self.lower)
        hi = np.ones(self.dim) if self.upper is None else np.atleast_1d(self.upper)
        if lo.shape != (self.dim,) or hi.shape != (self.dim,):
            raise ValueError("lower/upper must have one entry per axis")
        if not np.all(lo < hi):
            raise ValueError(f"degenerate box: lower={lo}, upper={hi}")
        object.__setattr__(self, "lower", _freeze(lo))
        object.__setattr__(self, "upper", _freeze(hi))

    def contains(self, points):
        pts = as_points(self.dim, points)
        slack = _EDGE_RTOL * (self.upper - self.lower)
        return np.all((pts >= self.lower - slack) & (pts <= self.upper + slack), axis=1)


@dataclass(frozen=True)
class Subdomain:
    """One cell of the partition with its reference-cube map."""

    id: int
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", _freeze(np.atleast_1d(self.lo)))
        object.__setattr__(self, "hi", _freeze(np.atleast_1d(self.hi)))
        if not np.all(self.lo < self.hi):
            raise ValueError(f"degenerate subdomain {self.id}")

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def jacobian(self) -> float:
        """Volume scale of the map from the reference cube, prod(h_d / 2)."""
        return float(np.prod(self.widths / 2.0))

    def to_reference(self, points):
        """Map physical points into [-1, 1]^dim; errors if any lie outside."""
        pts = as_points(self.dim, points)
        xhat = 2.0 * (pts - self.lo) / self.widths - 1.0
        if xhat.size and np.max(np.abs(xhat)) > 1.0 + _EDGE_RTOL:
            k = int(np.argmax(np.max(np.abs(xhat), axis=1)))
            raise OutOfDomainError(
                f"point {pts[k]} lies outside subdomain {self.id} "
                f"[{self.lo}, {self.hi}]"
            )
        return np.clip(xhat, -1.0, 1.0)

    def from_reference(self, xhat):
        """Inverse of :meth:`to_reference`."""
        xhat = as_points(self.dim, xhat)
        if xhat.size and np.max(np.abs(xhat)) > 1.0 + _EDGE_RTOL:
            raise OutOfDomainError("reference point outside [-1, 1]^dim")
        return self.lo + 0.5 * (np.clip(xhat, -1.0, 1.0) + 1.0) * self.widths


@dataclass(frozen=True)
class Interface:
    """Facet shared by two subdomains; the normal points out of ``left_id``."""

    left_id: int
    right_id: int
    axis: int
    position: float
    span: tuple | None = None  # tangential interval, None in one dimension

    @property
    def normal(self) -> np.ndarray:
        dim = 1 if self.span is None else 2
        n = np.zeros(dim)
        n[self.axis] = 1.0
        return n


@dataclass(frozen=True)
class Partition:
    """Uniform decomposition of a box into counts[0] x counts[1] x ... cells."""

    domain: Domain
    counts: tuple
    edges: tuple
    subdomains: tuple
    interfaces: tuple

    @property
    def S(self) -> int:
        return len(self.subdomains)

    def boundary_edges(self):
        """Facets of the partition lying on the domain boundary.

        Returns a list of (owner_id, axis, value, lo, hi) tuples where
        ``axis`` is the constant coordinate of the facet and (lo, hi) its
        tangential extent.  One-dimensional partitions return
        (owner_id, 0, value, None, None) for each endpoint.
        """
        dom = self.domain
        if dom.dim == 1:
            return [
                (0, 0, float(dom.lower[0]), None, None),
                (self.S - 1, 0, float(dom.upper[0]), None, None),
            ]
        s1, s2 = self.counts
        ex, ey = self.edges
        out = []
        for i2 in range(s2):  # x = const walls
            out.append((i2, 0, float(ex[0]), float(ey[i2]), float(ey[i2 + 1])))
        for i2 in range(s2):
            out.append(((s1 - 1) * s2 + i2, 0, float(ex[s1]), float(ey[i2]), float(ey[i2 + 1])))
        for i1 in range(s1):  # y = const walls
            out.append((i1 * s2, 1, float(ey[0]), float(ex[i1]), float(ex[i1 + 1])))
        for i1 in range(s1):
            out.append((i1 * s2 + s2 - 1, 1, float(ey[s2]), float(ex[i1]), float(ex[i1 + 1])))
        return out


def decompose(domain, counts):
    """Partition ``domain`` uniformly into ``counts`` cells per axis.

    Subdomain ids run row-major: in two dimensions cell (i1, i2) gets
    id i1 * counts[1] + i2.
    """
    if np.ndim(counts) == 0:
        counts = (int(counts),)
    counts = tuple(int(c) for c in counts)
    if len(counts) != domain.dim:
        raise ValueError(f"expected {domain.dim} counts, got {counts}")
    if any(c < 1 for c in counts):
        raise ValueError(f"counts must be positive, got {counts}")
    edges = tuple(
        _freeze(np.linspace(domain.lower[d], domain.upper[d], counts[d] + 1))
        for d in range(domain.dim)
    )
    subs = []
    if domain.dim == 1:
        (e,) = edges
        for i in range(counts[0]):
            subs.append(Subdomain(i, e[i : i + 1], e[i + 1 : i + 2]))
    else:
        ex, ey = edges
        s1, s2 = counts
        for i1 in range(s1):
            for i2 in range(s2):
                subs.append(
                    Subdomain(
                        i1 * s2 + i2,
                        np.array([ex[i1], ey[i2]]),
                        np.array([ex[i1 + 1], ey[i2 + 1]]),
                    )
                )
    ifaces = []
    if domain.dim == 1:
        (e,) = edges
        for i in range(counts[0] - 1):
            ifaces.append(Interface(i, i + 1, 0, float(e[i + 1])))
    else:
        ex, ey = edges
        s1, s2 = counts
        for i1 in range(s1 - 1):  # facets with normal along x
            for i2 in range(s2):
                ifaces.append(
                    Interface(
                        i1 * s2 + i2,
                        (i1 + 1) * s2 + i2,
                        0,
                        float(ex[i1 + 1]),
                        (float(ey[i2]), float(ey[i2 + 1])),
                    )
                )
        for i1 in range(s1):  # facets with normal along y
            for i2 in range(s2 - 1):
                ifaces.append(
                    Interface(
                        i1 * s2 + i2,
                        i1 * s2 + i2 + 1,
                        1,
                        float(ey[i2 + 1]),
                        (float(ex[i1]), float(ex[i1 + 1])),
                    )
                )
    return Partition(domain, counts, edges, tuple(subs), tuple(ifaces))


def as_points(dim, points):
    """Canonicalize to an (n, dim) float array."""
    pts = np.asarray(points, dtype=float)
    if dim == 1 and pts.ndim <= 1:
        pts = pts.reshape(-1, 1)
    elif pts.ndim == 1 and pts.shape == (dim,):
        pts = pts.reshape(1, dim)
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {pts.shape}")
    return pts


def _axis_cells(edges, x):
    # lowest-id ownership: a point on an internal edge joins the cell below it
    idx = np.searchsorted(edges, x, side="left") - 1
    return np.clip(idx, 0, edges.size - 2)


def locate(partition, points):
    """Subdomain id owning each point; raises for points outside the domain."""
    pts = as_points(partition.domain.dim, points)
    inside = partition.domain.contains(pts)
    if not np.all(inside):
        k = int(np.argmin(inside))
        raise OutOfDomainError(f"point {pts[k]} lies outside the domain")
    if partition.domain.dim == 1:
        return _axis_cells(partition.edges[0], pts[:, 0])
    i1 = _axis_cells(partition.edges[0], pts[:, 0])
    i2 = _axis_cells(partition.edges[1], pts[:, 1])
    return i1 * partition.counts[1] + i2


@dataclass(frozen=True)
class CollocationSet:
    """Boundary and interface collocation points with their owners."""

    boundary_points: np.ndarray  # (N_b, dim)
    boundary_owner: np.ndarray  # (N_b,) subdomain ids
    interface_points: np.ndarray  # (N_c, dim)
    interface_index: np.ndarray  # (N_c,) indices into partition.interfaces

    def __post_init__(self):
        object.__setattr__(self, "boundary_points", _freeze(self.boundary_points))
        object.__setattr__(self, "interface_points", _freeze(self.interface_points))
        for name in ("boundary_owner", "interface_index"):
            a = np.asarray(getattr(self, name), dtype=int)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def N_b(self) -> int:
        return self.boundary_points.shape[0]

    @property
    def N_c(self) -> int:
        return self.interface_points.shape[0]


def sample_collocation(partition, n_boundary, n_interface, rng=None):
    """Draw collocation points on the domain boundary and internal facets.

    Two dimensions: ``n_boundary`` uniform points on each of the
    2 (s1 + s2) boundary edges and ``n_interface`` on each internal facet,
    drawn from ``rng``.  One dimension: facets are single points, so the
    counts collapse to the two endpoints and one point per interface and
    ``rng`` is never consulted.  Boundary points on shared corners are
    attributed to the edge's owner cell.
    """
    dim = partition.domain.dim
    if n_boundary < 1 or n_interface < 1:
        raise ValueError("collocation counts must be positive")
    if dim == 1:
        bpts = np.array([[partition.domain.lower[0]], [partition.domain.upper[0]]])
        bown = np.array([0, partition.S - 1])
        cpts = np.array([[f.position] for f in partition.interfaces]).reshape(-1, 1)
        cidx = np.arange(len(partition.interfaces))
        return CollocationSet(bpts, bown, cpts, cidx)
    if rng is None:
        rng = np.random.default_rng()
    bpts, bown = [], []
    for owner, axis, value, lo, hi in partition.boundary_edges():
        t = rng.uniform(lo, hi, n_boundary)
        pts = np.empty((n_boundary, 2))
        pts[:, axis] = value
        pts[:, 1 - axis] = t
        bpts.append(pts)
        bown.append(np.full(n_boundary, owner))
    cpts, cidx = [], []
    for j, face in enumerate(partition.interfaces):
        t = rng.uniform(face.span[0], face.span[1], n_interface)
        pts = np.empty((n_interface, 2))
        pts[:, face.axis] = face.position
        pts[:, 1 - face.axis] = t
        cpts.append(pts)
        cidx.append(np.full(n_interface, j))
    return CollocationSet(
        np.vstack(bpts), np.concatenate(bown), np.vstack(cpts), np.concatenate(cidx)
    )
