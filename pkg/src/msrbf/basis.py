"""Gauss-Lobatto quadrature and Legendre-difference test functions on [-1, 1].

The weak-form rows of the solver integrate against polynomials

    v_k = P_{k+1} - P_{k-1},    k = 1, ..., Q,

which vanish at both endpoints, so facet terms never enter the assembled
system.  In two dimensions the test space is the tensor product
v_{k1}(x) v_{k2}(y).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_NEWTON_TOL = 1e-14
_NEWTON_MAXIT = 100


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on [-1, 1], exact for polynomials of degree <= 2n - 3."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.nodes.ndim != 1 or self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights must be 1d arrays of equal length")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n(self) -> int:
        return self.nodes.size


@dataclass(frozen=True)
class TestFunctionSet:
    """Index bookkeeping for the test space of one subdomain.

    ``indices`` lists the Legendre-difference orders row by row: integers
    1..Q in one dimension, pairs (k1, k2) in row-major order in two.
    """

    Q: int
    dim: int

    def __post_init__(self):
        if self.Q < 1:
            raise ValueError(f"Q must be positive, got {self.Q}")
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")

    @property
    def indices(self):
        if self.dim == 1:
            return [k for k in range(1, self.Q + 1)]
        return [(k1, k2) for k1 in range(1, self.Q + 1) for k2 in range(1, self.Q + 1)]

    @property
    def size(self) -> int:
        return self.Q**self.dim


def legendre_table(kmax, x):
    """Legendre values and derivatives P_0..P_kmax at the points ``x``.

    Parameters
    ----------
    kmax : int
        Highest polynomial degree, >= 0.
    x : array_like
        Evaluation points.

    Returns
    -------
    P, dP : ndarray, shape (kmax + 1, n)
        Values and first derivatives, row k holding degree k.
    """
    if kmax < 0:
        raise ValueError(f"kmax must be >= 0, got {kmax}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    P = np.empty((kmax + 1, x.size))
    dP = np.empty_like(P)
    P[0] = 1.0
    dP[0] = 0.0
    if kmax >= 1:
        P[1] = x
        dP[1] = 1.0
    for k in range(1, kmax):
        P[k + 1] = ((2 * k + 1) * x * P[k] - k * P[k - 1]) / (k + 1)
        dP[k + 1] = dP[k - 1] + (2 * k + 1) * P[k]
    return P, dP


def legendre(k, x):
    """(P_k(x), P_k'(x)); scalars in, scalars out."""
    P, dP = legendre_table(k, x)
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return P[k][0], dP[k][0]
    return P[k], dP[k]


def gauss_lobatto(n):
    """Gauss-Lobatto-Legendre rule with ``n`` nodes (n >= 2).

    Interior nodes are the roots of P'_{n-1}, found by Newton iteration
    from Chebyshev-Lobatto initial guesses; endpoints are -1 and 1.  The
    weights are 2 / (n (n-1) P_{n-1}(x)^2).
    """
    if n < 2:
        raise ValueError(f"a Gauss-Lobatto rule needs at least 2 nodes, got {n}")
    if n == 2:
        return QuadratureRule(np.array([-1.0, 1.0]), np.array([1.0, 1.0]))
    deg = n - 1
    x = np.cos(np.pi * np.arange(deg - 1, 0, -1) / deg)
    for _ in range(_NEWTON_MAXIT):
        P, dP = legendre_table(deg, x)
        # P''_deg from the Legendre ODE; interior points keep 1 - x^2 > 0
        d2 = (2.0 * x * dP[deg] - deg * (deg + 1) * P[deg]) / (1.0 - x * x)
        step = dP[deg] / d2
        x -= step
        if np.max(np.abs(step)) < _NEWTON_TOL:
            break
    x = 0.5 * (x - x[::-1])  # enforce symmetry about the origin
    nodes = np.concatenate(([-1.0], x, [1.0]))
    P, _ = legendre_table(deg, nodes)
    weights = 2.0 / (n * (n - 1) * P[deg] ** 2)
    return QuadratureRule(nodes, weights)


def test_table(Q, x):
    """Values and derivatives of v_1..v_Q at the points ``x``.

    Returns (V, dV), each of shape (Q, n), with row k - 1 holding
    v_k = P_{k+1} - P_{k-1}.
    """
    if Q < 1:
        raise ValueError(f"Q must be positive, got {Q}")
    P, dP = legendre_table(Q + 1, x)
    V = P[2 : Q + 2] - P[0:Q]
    dV = dP[2 : Q + 2] - dP[0:Q]
    return V, dV


def test_function(k, xhat):
    """Evaluate one test function and its reference-coordinate gradient.

    One dimension: ``k`` is an integer >= 1 and ``xhat`` a scalar or array;
    returns (value, derivative).  Two dimensions: ``k`` is a pair
    (k1, k2) and ``xhat`` a pair of coordinate arrays; returns
    (value, (d/dx, d/dy)).
    """
    if np.ndim(k) == 0:
        k = int(k)
        if k < 1:
            raise ValueError(f"test function order must be >= 1, got {k}")
        V, dV = test_table(k, xhat)
        if np.ndim(xhat) == 0:
            return V[k - 1][0], dV[k - 1][0]
        return V[k - 1], dV[k - 1]
    k1, k2 = (int(j) for j in k)
    if min(k1, k2) < 1:
        raise ValueError(f"test function orders must be >= 1, got {(k1, k2)}")
    x, y = xhat
    vx, dvx = test_function(k1, x)
    vy, dvy = test_function(k2, y)
    return vx * vy, (dvx * vy, vx * dvy)
