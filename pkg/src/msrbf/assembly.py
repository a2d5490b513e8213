"""Weak-form least-squares assembly over a partitioned domain.

Builds the three row blocks of the global system in the frozen kernel
basis: interior Petrov-Galerkin rows tested against Legendre differences,
Dirichlet collocation rows, and interface continuity rows.  Columns are
grouped by subdomain, J per cell, in subdomain-id order.

The interior rows integrate

    sum_q w_q jac_K [ A(x_q) grad u . grad v_k + kappa(x_q) u v_k ]
        = sum_q w_q jac_K f(x_q) v_k

in reference coordinates, with the chain factor (2/h_d)^2 on each gradient
term.  The boundary integral of the integration by parts vanishes
identically because every v_k is zero on the subdomain facets, so no
surface term is ever assembled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import gauss_lobatto, test_table
from .errors import AssemblyError
from .rbf import eval_basis, eval_basis_grad

# one stacked matrix above this size is assembled straight into shared
# storage so no second copy ever exists
DEFAULT_NQ_1D = 80
DEFAULT_NQ_2D = 10


@dataclass
class BlockSystem:
    """The three assembled row blocks plus layout metadata.

    ``A_e``/``b_e`` hold the interior weak-form rows (Q^dim per
    subdomain), ``A_b``/``b_b`` the Dirichlet rows (one per boundary
    point), ``A_c``/``b_c`` the continuity rows (2 per interface point in
    one dimension; 3 for mode "grad" / 2 for mode "normal" in two).  When
    built by :func:`assemble_system` all blocks are views into one
    contiguous matrix, exposed zero-copy by :func:`stack`.
    """

    A_e: np.ndarray
    b_e: np.ndarray
    A_b: np.ndarray
    b_b: np.ndarray
    A_c: np.ndarray
    b_c: np.ndarray
    S: int
    J: int
    Q: int
    dim: int
    continuity: str = "grad"
    _stacked: tuple = None

    @property
    def N(self) -> int:
        return self.A_e.shape[0] + self.A_b.shape[0] + self.A_c.shape[0]

    @property
    def M(self) -> int:
        return self.A_e.shape[1]

    def column_block(self, sub_id):
        """Column slice owned by one subdomain."""
        return slice(sub_id * self.J, (sub_id + 1) * self.J)


def rows_per_interface_point(dim, continuity="grad"):
    if continuity not in ("grad", "normal"):
        raise ValueError(f"unknown continuity mode {continuity!r}")
    if dim == 1:
        return 2
    return 3 if continuity == "grad" else 2


def _check_nets(partition, nets):
    if len(nets) != partition.S:
        raise ValueError(f"expected {partition.S} nets, got {len(nets)}")
    J = nets[0].J
    dim = partition.domain.dim
    for net in nets:
        if net.J != J or net.dim != dim:
            raise ValueError("all nets must share J and the domain dimension")
    return J


def _field(fn, pts, what, where):
    vals = np.asarray(fn(*(pts[:, d] for d in range(pts.shape[1]))), dtype=float)
    vals = np.broadcast_to(vals, (pts.shape[0],))
    if not np.isfinite(vals).all():
        k = int(np.argmin(np.isfinite(vals)))
        raise AssemblyError(f"{what} is not finite at point {pts[k]} ({where})")
    return vals


def assemble_pde_rows(problem, partition, nets, Q, n_q=None, out=None):
    """Interior weak-form rows for every subdomain.

    Returns (A_e, b_e) with Q^dim rows per subdomain, ordered by
    subdomain id; within a subdomain, two-dimensional test indices
    (k1, k2) run row-major.  ``out`` optionally supplies preallocated
    (A_e, b_e) to write into.
    """
    dim = partition.domain.dim
    J = _check_nets(partition, nets)
    if Q < 1:
        raise ValueError(f"Q must be positive, got {Q}")
    if n_q is None:
        n_q = DEFAULT_NQ_1D if dim == 1 else DEFAULT_NQ_2D
    rule = gauss_lobatto(n_q)
    S = partition.S
    Qr = Q**dim
    if out is None:
        A = np.zeros((S * Qr, S * J))
        b = np.zeros(S * Qr)
    else:
        A, b = out

    if dim == 1:
        V, dV = test_table(Q, rule.nodes)
        ref = rule.nodes.reshape(-1, 1)
        T_val, T_gx, T_gy = V, dV, None
        wq = rule.weights
    else:
        V, dV = test_table(Q, rule.nodes)
        T_val = np.einsum("ap,bq->abpq", V, V).reshape(Qr, n_q * n_q)
        T_gx = np.einsum("ap,bq->abpq", dV, V).reshape(Qr, n_q * n_q)
        T_gy = np.einsum("ap,bq->abpq", V, dV).reshape(Qr, n_q * n_q)
        wq = np.multiply.outer(rule.weights, rule.weights).ravel()
        gx, gy = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
        ref = np.column_stack([gx.ravel(), gy.ravel()])

    for K, (sub, net) in enumerate(zip(partition.subdomains, nets)):
        pts = sub.from_reference(ref)
        where = f"subdomain {K}"
        a = _field(problem.coefficient, pts, "coefficient", where)
        f = _field(problem.source, pts, "source", where)
        kap = None
        if problem.reaction is not None:
            kap = _field(problem.reaction, pts, "reaction", where)
        R, G = eval_basis_grad(net, ref)
        scale = wq * sub.jacobian
        if dim == 1:
            block = T_gx @ ((scale * a * (2.0 / sub.widths[0]) ** 2)[:, None] * G[:, :, 0])
        else:
            block = T_gx @ ((scale * a * (2.0 / sub.widths[0]) ** 2)[:, None] * G[:, :, 0])
            block += T_gy @ ((scale * a * (2.0 / sub.widths[1]) ** 2)[:, None] * G[:, :, 1])
        if kap is not None:
            block += T_val @ ((scale * kap)[:, None] * R)
        A[K * Qr : (K + 1) * Qr, K * J : (K + 1) * J] = block
        b[K * Qr : (K + 1) * Qr] = T_val @ (scale * f)
    return A, b


def assemble_boundary_rows(problem, partition, nets, colloc, out=None):
    """Dirichlet collocation rows, one per boundary point."""
    J = _check_nets(partition, nets)
    pts = colloc.boundary_points
    if out is None:
        A = np.zeros((pts.shape[0], partition.S * J))
        b = np.zeros(pts.shape[0])
    else:
        A, b = out
    b[:] = _field(problem.dirichlet, pts, "boundary data", "domain boundary")
    for k in np.unique(colloc.boundary_owner):
        sel = np.flatnonzero(colloc.boundary_owner == k)
        xhat = partition.subdomains[k].to_reference(pts[sel])
        A[sel, k * J : (k + 1) * J] = eval_basis(nets[k], xhat)
    return A, b


def assemble_continuity_rows(partition, nets, colloc, continuity="grad", out=None):
    """Interface matching rows enforcing a C^1 stitch across facets.

    Every interface point contributes a value-jump row u+ - u- and
    derivative-jump rows: the full physical gradient (mode "grad", the
    default) or only the facet-normal component (mode "normal").
    Right-hand sides are identically zero.
    """
    J = _check_nets(partition, nets)
    dim = partition.domain.dim
    rpp = rows_per_interface_point(dim, continuity)
    n_pts = colloc.N_c
    if out is None:
        A = np.zeros((rpp * n_pts, partition.S * J))
        b = np.zeros(rpp * n_pts)
    else:
        A, b = out
    b[:] = 0.0
    for j in np.unique(colloc.interface_index):
        face = partition.interfaces[j]
        sel = np.flatnonzero(colloc.interface_index == j)
        pts = colloc.interface_points[sel]
        left = partition.subdomains[face.left_id]
        right = partition.subdomains[face.right_id]
        RL, GL = eval_basis_grad(nets[face.left_id], left.to_reference(pts))
        RR, GR = eval_basis_grad(nets[face.right_id], right.to_reference(pts))
        colL = slice(face.left_id * J, (face.left_id + 1) * J)
        colR = slice(face.right_id * J, (face.right_id + 1) * J)
        if dim == 1:
            axes = [0]
        elif continuity == "grad":
            axes = [0, 1]
        else:
            axes = [face.axis]
        for i, p in enumerate(sel):
            r0 = rpp * p
            A[r0, colL] = RL[i]
            A[r0, colR] = -RR[i]
            for t, d in enumerate(axes):
                A[r0 + 1 + t, colL] = (2.0 / left.widths[d]) * GL[i, :, d]
                A[r0 + 1 + t, colR] = -(2.0 / right.widths[d]) * GR[i, :, d]
    return A, b


def assemble_system(problem, partition, nets, Q, colloc, n_q=None, continuity="grad"):
    """Assemble all three blocks into one shared matrix.

    The stacked storage is allocated once, column-major for the LAPACK
    solve, and each block is a row-section view into it, so even the
    largest published configurations fit in a single matrix-sized
    allocation.
    """
    dim = partition.domain.dim
    J = _check_nets(partition, nets)
    S = partition.S
    Qr = Q**dim
    rpp = rows_per_interface_point(dim, continuity)
    n_e = S * Qr
    n_b = colloc.N_b
    n_c = rpp * colloc.N_c
    N, M = n_e + n_b + n_c, S * J
    A = np.zeros((N, M), order="F")
    b = np.zeros(N)
    s_e = slice(0, n_e)
    s_b = slice(n_e, n_e + n_b)
    s_c = slice(n_e + n_b, N)
    assemble_pde_rows(problem, partition, nets, Q, n_q=n_q, out=(A[s_e], b[s_e]))
    assemble_boundary_rows(problem, partition, nets, colloc, out=(A[s_b], b[s_b]))
    assemble_continuity_rows(
        partition, nets, colloc, continuity=continuity, out=(A[s_c], b[s_c])
    )
    return BlockSystem(
        A_e=A[s_e],
        b_e=b[s_e],
        A_b=A[s_b],
        b_b=b[s_b],
        A_c=A[s_c],
        b_c=b[s_c],
        S=S,
        J=J,
        Q=Q,
        dim=dim,
        continuity=continuity,
        _stacked=(A, b),
    )


def stack(system, weights=(1.0, 1.0, 1.0)):
    """Stacked (A, b) of the full system, PDE rows first, then boundary,
    then continuity.

    ``weights`` scales the three blocks.  When the system was built by
    :func:`assemble_system` the return is the shared storage itself
    (zero-copy); non-unit weights are then applied in place, so stack once.
    """
    w_e, w_b, w_c = (float(w) for w in weights)
    if system._stacked is not None:
        A, b = system._stacked
        for w, Ab, bb in (
            (w_e, system.A_e, system.b_e),
            (w_b, system.A_b, system.b_b),
            (w_c, system.A_c, system.b_c),
        ):
            if w != 1.0:
                Ab *= w
                bb *= w
        return A, b
    A = np.vstack([w_e * system.A_e, w_b * system.A_b, w_c * system.A_c])
    b = np.concatenate([w_e * system.b_e, w_b * system.b_b, w_c * system.b_c])
    return A, b


def dump_system(system, path):
    """Debug dump of the stacked system as a compressed binary archive."""
    A, b = stack(system)
    np.savez(path, A=np.ascontiguousarray(A), b=b)
