"""Benchmark problem library: multiscale elliptic equations on the unit box.

Every problem is an instance of

    -div(A grad u) + kappa u = f   in (0, 1)^dim,
    u = g                          on the boundary,

with a strictly positive, possibly rapidly oscillating coefficient A.
Factories return frozen :class:`ProblemSpec` objects; callables are
vectorized over numpy arrays (one positional array per axis).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .partition import Domain

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ProblemSpec:
    """One boundary value problem, with optional exact solution.

    Attributes
    ----------
    name : str
        Registry key, e.g. ``"periodic-1d"``.
    dim : int
        1 or 2.
    coefficient, source, dirichlet : callable
        A, f and g; called as fn(x) or fn(x, y) with arrays.
    reaction : callable or None
        kappa; None means the zero reaction term.
    exact : callable or None
        Closed-form solution when one exists.
    params : dict
        Scale parameters the problem was built with.
    ellipticity : tuple
        (min, max) of the coefficient over a fixed sample grid.
    """

    name: str
    dim: int
    coefficient: object
    source: object
    dirichlet: object
    reaction: object = None
    exact: object = None
    params: dict = field(default_factory=dict)
    domain: Domain = None
    ellipticity: tuple = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.domain is None:
            object.__setattr__(self, "domain", Domain(self.dim))
        if self.domain.dim != self.dim:
            raise ValueError("domain dimension does not match problem dimension")
        axes = [
            np.linspace(self.domain.lower[d], self.domain.upper[d], 257)
            for d in range(self.dim)
        ]
        if self.dim == 1:
            sample = (axes[0],)
        else:
            gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
            sample = (gx.ravel(), gy.ravel())
        a = np.asarray(self.coefficient(*sample), dtype=float)
        if a.shape != sample[0].shape:
            raise ValueError(f"{self.name}: coefficient is not vectorized correctly")
        if not np.isfinite(a).all() or np.min(a) <= 0.0:
            raise ValueError(f"{self.name}: coefficient must be positive and finite")
        if self.reaction is not None:
            k = np.asarray(self.reaction(*sample), dtype=float)
            if not np.isfinite(k).all() or np.min(k) < 0.0:
                raise ValueError(f"{self.name}: reaction must be nonnegative and finite")
        object.__setattr__(self, "ellipticity", (float(np.min(a)), float(np.max(a))))

    @property
    def has_exact(self) -> bool:
        return self.exact is not None


def _check_scales(**scales):
    for key, value in scales.items():
        if not value > 0:
            raise ValueError(f"{key} must be positive, got {value}")


def periodic_1d(eps=0.5):
    """Periodic oscillatory coefficient with a closed-form solution.

    A = 1 / (2 + cos(2 pi x / eps)), f = 1; the boundary values are those
    of the exact solution (both endpoints sit at -eps^2 / (2 pi^2) whenever
    1/eps is an integer).
    """
    eps = float(eps)
    _check_scales(eps=eps)

    def exact(x):
        w = _TWO_PI * x / eps
        return (
            x
            - x**2
            + eps * np.sin(w) * (1.0 / (4 * np.pi) - x / (2 * np.pi))
            - eps**2 / (4 * np.pi**2) * (np.cos(w) + 1.0)
        )

    return ProblemSpec(
        name="periodic-1d",
        dim=1,
        coefficient=lambda x: 1.0 / (2.0 + np.cos(_TWO_PI * x / eps)),
        source=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        dirichlet=exact,
        exact=exact,
        params={"eps": eps},
    )


def double_scale_1d(eps=0.5):
    """Coefficient mixing a fast scale eps with an O(1) modulation.

    A = 2 + sin(2 pi x / eps) cos(2 pi x), f = 1, g = 1.  No closed-form
    solution; pair with the finite difference oracle.
    """
    eps = float(eps)
    _check_scales(eps=eps)
    return ProblemSpec(
        name="double-scale-1d",
        dim=1,
        coefficient=lambda x: 2.0 + np.sin(_TWO_PI * x / eps) * np.cos(_TWO_PI * x),
        source=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        dirichlet=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        params={"eps": eps},
    )


def three_scale_1d(eps1=0.1, eps2=0.01):
    """Product of two oscillatory factors, A = (2 + cos(2 pi x / eps1)) (2 + cos(2 pi x / eps2)).

    f = 1, g = 1, no closed-form solution.
    """
    eps1, eps2 = float(eps1), float(eps2)
    _check_scales(eps1=eps1, eps2=eps2)
    return ProblemSpec(
        name="three-scale-1d",
        dim=1,
        coefficient=lambda x: (2.0 + np.cos(_TWO_PI * x / eps1))
        * (2.0 + np.cos(_TWO_PI * x / eps2)),
        source=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        dirichlet=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        params={"eps1": eps1, "eps2": eps2},
    )


def radial_oscillation_2d(eps=0.5):
    """Coefficient oscillating in rings of x^2 + y^2, with exact solution.

    A = 1 / (4 + cos(2 pi (x^2+y^2) / eps)) and f = -(x^2 + y^2); the flux
    A grad u works out to (x^2+y^2)/4 * (2x, 2y) exactly, for every eps.
    """
    eps = float(eps)
    _check_scales(eps=eps)

    def exact(x, y):
        s = x**2 + y**2
        w = _TWO_PI * s / eps
        return (
            0.25 * s**2
            + eps / (16 * np.pi) * s * np.sin(w)
            + eps**2 / (32 * np.pi**2) * np.cos(w)
        )

    return ProblemSpec(
        name="radial-2d",
        dim=2,
        coefficient=lambda x, y: 1.0 / (4.0 + np.cos(_TWO_PI * (x**2 + y**2) / eps)),
        source=lambda x, y: -(x**2 + y**2),
        dirichlet=exact,
        exact=exact,
        params={"eps": eps},
    )


def double_scale_2d(eps=0.5):
    """Ratio-form oscillatory coefficient in both axes; no exact solution.

    A = (1.5 + sin(2 pi x/eps)) / (1.5 + sin(2 pi y/eps))
      + (1.5 + sin(2 pi y/eps)) / (1.5 + cos(2 pi x/eps))
      + sin(4 x^2 y^2) + 1,  f = -10, g = 0.
    """
    eps = float(eps)
    _check_scales(eps=eps)

    def coefficient(x, y):
        sx = np.sin(_TWO_PI * x / eps)
        sy = np.sin(_TWO_PI * y / eps)
        cx = np.cos(_TWO_PI * x / eps)
        return (
            (1.5 + sx) / (1.5 + sy)
            + (1.5 + sy) / (1.5 + cx)
            + np.sin(4.0 * x**2 * y**2)
            + 1.0
        )

    return ProblemSpec(
        name="double-scale-2d",
        dim=2,
        coefficient=coefficient,
        source=lambda x, y: np.full_like(np.asarray(x, dtype=float), -10.0),
        dirichlet=lambda x, y: np.zeros_like(np.asarray(x, dtype=float)),
        params={"eps": eps},
    )


def poisson_boltzmann_2d():
    """Poisson-Boltzmann equation with oscillatory dielectric coefficient.

    -div(A grad u) + kappa u = f with kappa = pi^2,
    A = 1 + 0.5 cos(10 pi x) cos(20 pi y), and the manufactured solution
    u = sin(pi x) sin(pi y) + 0.05 sin(10 pi x) sin(20 pi y) defining f and g.
    """

    def exact(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y) + 0.05 * np.sin(
            10 * np.pi * x
        ) * np.sin(20 * np.pi * y)

    def coefficient(x, y):
        return 1.0 + 0.5 * np.cos(10 * np.pi * x) * np.cos(20 * np.pi * y)

    def source(x, y):
        pi = np.pi
        sx, cx = np.sin(pi * x), np.cos(pi * x)
        sy, cy = np.sin(pi * y), np.cos(pi * y)
        s10, c10 = np.sin(10 * pi * x), np.cos(10 * pi * x)
        s20, c20 = np.sin(20 * pi * y), np.cos(20 * pi * y)
        a = 1.0 + 0.5 * c10 * c20
        ax = -5.0 * pi * s10 * c20
        ay = -10.0 * pi * c10 * s20
        ux = pi * cx * sy + 0.5 * pi * c10 * s20
        uy = pi * sx * cy + pi * s10 * c20
        lap = -2.0 * pi**2 * sx * sy - 25.0 * pi**2 * s10 * s20
        return -(ax * ux + ay * uy + a * lap) + pi**2 * exact(x, y)

    return ProblemSpec(
        name="poisson-boltzmann-2d",
        dim=2,
        coefficient=coefficient,
        source=source,
        dirichlet=exact,
        reaction=lambda x, y: np.full_like(np.asarray(x, dtype=float), np.pi**2),
        exact=exact,
        params={},
    )


def quadratic_1d():
    """Constant-coefficient sanity problem: A = 1, f = 2, u = x (1 - x)."""
    return ProblemSpec(
        name="quadratic-1d",
        dim=1,
        coefficient=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        source=lambda x: np.full_like(np.asarray(x, dtype=float), 2.0),
        dirichlet=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        exact=lambda x: x * (1.0 - x),
        params={},
    )


def sine_2d():
    """Constant-coefficient sanity problem: A = 1, u = sin(pi x) sin(pi y)."""

    def exact(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    return ProblemSpec(
        name="sine-2d",
        dim=2,
        coefficient=lambda x, y: np.ones_like(np.asarray(x, dtype=float)),
        source=lambda x, y: 2.0 * np.pi**2 * exact(x, y),
        dirichlet=lambda x, y: np.zeros_like(np.asarray(x, dtype=float)),
        exact=exact,
        params={},
    )


PROBLEMS = {
    "periodic-1d": periodic_1d,
    "double-scale-1d": double_scale_1d,
    "three-scale-1d": three_scale_1d,
    "radial-2d": radial_oscillation_2d,
    "double-scale-2d": double_scale_2d,
    "poisson-boltzmann-2d": poisson_boltzmann_2d,
    "quadratic-1d": quadratic_1d,
    "sine-2d": sine_2d,
}


def make_problem(name, **params):
    """Instantiate a registered problem, passing scale parameters through."""
    try:
        factory = PROBLEMS[name]
    except KeyError:
        known = ", ".join(sorted(PROBLEMS))
        raise ValueError(f"unknown problem {name!r}; known problems: {known}") from None
    return factory(**params)
