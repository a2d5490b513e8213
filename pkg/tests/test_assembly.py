"""Weak-form, boundary, and continuity row assembly.

The interior rows are checked against adaptive quadrature on the physical
subdomain, with the compact test functions rebuilt from numpy's Legendre
module, so the oracle shares no code with the assembly path.
"""

from types import SimpleNamespace

import numpy as np
import numpy.polynomial.legendre as npleg
import pytest
from scipy.integrate import dblquad, quad

from msrbf import (
    AssemblyError,
    BlockSystem,
    Domain,
    LocalRbfNet,
    assemble_boundary_rows,
    assemble_continuity_rows,
    assemble_pde_rows,
    assemble_system,
    decompose,
    eval_basis,
    eval_basis_grad,
    rows_per_interface_point,
    sample_collocation,
    stack,
)


def v_coef(k):
    c = np.zeros(k + 2)
    c[k + 1] = 1.0
    c[k - 1] = -1.0
    return c


def v_val(k, t):
    return npleg.legval(t, v_coef(k))


def v_der(k, t):
    return npleg.legval(t, npleg.legder(v_coef(k)))


def fixed_net_1d():
    return LocalRbfNet(centers=np.array([[-0.3], [0.5]]), shapes=np.array([0.8, 2.0]))


def fixed_net_2d():
    return LocalRbfNet(
        centers=np.array([[-0.3, 0.2], [0.5, -0.6]]), shapes=np.array([0.9, 1.7])
    )


class TestWeakRows1D:
    def setup_method(self):
        self.problem = SimpleNamespace(
            coefficient=lambda x: 1.0 + x,
            reaction=lambda x: 2.0 + x,
            source=lambda x: np.sin(3.0 * x),
            dirichlet=lambda x: np.zeros_like(x),
        )
        self.part = decompose(Domain(1, lower=[0.2], upper=[0.7]), (1,))
        self.net = fixed_net_1d()

    def oracle_row(self, k):
        sub = self.part.subdomains[0]
        x0, h = sub.lo[0], sub.widths[0]
        cols = []
        for i in range(self.net.J):
            c, s = self.net.centers[i, 0], self.net.shapes[i]

            def integrand(x):
                t = 2.0 * (x - x0) / h - 1.0
                rho = np.exp(-s * (t - c) ** 2)
                drho = -2.0 * s * (t - c) * rho * (2.0 / h)
                return self.problem.coefficient(x) * drho * v_der(k, t) * (
                    2.0 / h
                ) + self.problem.reaction(x) * rho * v_val(k, t)

            val, err = quad(integrand, x0, x0 + h, limit=200, epsabs=1e-13, epsrel=1e-13)
            assert err <= 1e-11
            cols.append(val)
        return np.array(cols)

    def oracle_rhs(self, k):
        sub = self.part.subdomains[0]
        x0, h = sub.lo[0], sub.widths[0]

        def integrand(x):
            t = 2.0 * (x - x0) / h - 1.0
            return self.problem.source(x) * v_val(k, t)

        val, _ = quad(integrand, x0, x0 + h, limit=200, epsabs=1e-13, epsrel=1e-13)
        return val

    def test_rows_match_adaptive_quadrature(self):
        A, b = assemble_pde_rows(self.problem, self.part, [self.net], Q=3, n_q=60)
        assert A.shape == (3, 2) and b.shape == (3,)
        for k in (1, 2, 3):
            np.testing.assert_allclose(A[k - 1], self.oracle_row(k), atol=1e-11)
            assert abs(b[k - 1] - self.oracle_rhs(k)) <= 1e-11

    def test_zero_reaction_drops_term(self):
        no_kappa = SimpleNamespace(
            coefficient=self.problem.coefficient,
            reaction=None,
            source=self.problem.source,
        )
        A, _ = assemble_pde_rows(no_kappa, self.part, [self.net], Q=2, n_q=60)
        self.problem.reaction = lambda x: np.zeros_like(x)
        A0, _ = assemble_pde_rows(self.problem, self.part, [self.net], Q=2, n_q=60)
        np.testing.assert_allclose(A, A0, atol=1e-14)


class TestWeakRows2D:
    def setup_method(self):
        self.problem = SimpleNamespace(
            coefficient=lambda x, y: 1.0 + x * y,
            reaction=lambda x, y: 0.5 + x + y,
            source=lambda x, y: np.cos(2.0 * x + y),
            dirichlet=lambda x, y: np.zeros_like(x),
        )
        self.part = decompose(
            Domain(2, lower=[0.1, 0.2], upper=[0.6, 0.5]), (1, 1)
        )
        self.net = fixed_net_2d()

    def oracle_entry(self, k1, k2, i):
        sub = self.part.subdomains[0]
        (x0, y0), (hx, hy) = sub.lo, sub.widths
        c, s = self.net.centers[i], self.net.shapes[i]

        def integrand(y, x):
            tx = 2.0 * (x - x0) / hx - 1.0
            ty = 2.0 * (y - y0) / hy - 1.0
            rho = np.exp(-s * ((tx - c[0]) ** 2 + (ty - c[1]) ** 2))
            dpx = -2.0 * s * (tx - c[0]) * rho * (2.0 / hx)
            dpy = -2.0 * s * (ty - c[1]) * rho * (2.0 / hy)
            vx, vy = v_val(k1, tx), v_val(k2, ty)
            dvx = v_der(k1, tx) * (2.0 / hx)
            dvy = v_der(k2, ty) * (2.0 / hy)
            grad_pair = dpx * dvx * vy + dpy * vx * dvy
            return self.problem.coefficient(x, y) * grad_pair + self.problem.reaction(
                x, y
            ) * rho * vx * vy

        val, err = dblquad(
            integrand, x0, x0 + hx, y0, y0 + hy, epsabs=1e-12, epsrel=1e-12
        )
        assert err <= 1e-10
        return val

    def oracle_rhs(self, k1, k2):
        sub = self.part.subdomains[0]
        (x0, y0), (hx, hy) = sub.lo, sub.widths

        def integrand(y, x):
            tx = 2.0 * (x - x0) / hx - 1.0
            ty = 2.0 * (y - y0) / hy - 1.0
            return self.problem.source(x, y) * v_val(k1, tx) * v_val(k2, ty)

        val, _ = dblquad(integrand, x0, x0 + hx, y0, y0 + hy, epsabs=1e-12, epsrel=1e-12)
        return val

    def test_rows_match_adaptive_quadrature(self):
        Q = 2
        A, b = assemble_pde_rows(self.problem, self.part, [self.net], Q=Q, n_q=30)
        assert A.shape == (4, 2) and b.shape == (4,)
        for k1 in (1, 2):
            for k2 in (1, 2):
                r = (k1 - 1) * Q + (k2 - 1)
                for i in range(2):
                    assert abs(A[r, i] - self.oracle_entry(k1, k2, i)) <= 1e-10
                assert abs(b[r] - self.oracle_rhs(k1, k2)) <= 1e-10


class TestSurfaceTerm:
    """The integration by parts drops the facet flux because every test
    function vanishes identically on the subdomain boundary."""

    def test_test_functions_vanish_at_endpoints(self):
        for k in range(1, 25):
            assert abs(v_val(k, 1.0)) <= 1e-13
            assert abs(v_val(k, -1.0)) <= 1e-13

    def test_facet_flux_integral_is_null_1d(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            J = int(rng.integers(1, 8))
            net = LocalRbfNet(
                centers=rng.uniform(-1, 1, (J, 1)), shapes=rng.uniform(0, 5, J)
            )
            k = int(rng.integers(1, 12))
            for t, sign in ((1.0, 1.0), (-1.0, -1.0)):
                _, grad = eval_basis_grad(net, np.array([[t]]))
                flux = (2.0 + np.sin(3 * t)) * grad[0, :, 0] * sign
                assert np.abs(flux * v_val(k, t)).max() <= 1e-13

    def test_facet_flux_integral_is_null_2d(self):
        rng = np.random.default_rng(10)
        glx, glw = np.polynomial.legendre.leggauss(32)
        for _ in range(10):
            J = int(rng.integers(1, 6))
            net = LocalRbfNet(
                centers=rng.uniform(-1, 1, (J, 2)), shapes=rng.uniform(0, 5, J)
            )
            k1, k2 = rng.integers(1, 9, 2)
            # walk the four facets of the reference square
            for axis, side in ((0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0)):
                pts = np.empty((32, 2))
                pts[:, axis] = side
                pts[:, 1 - axis] = glx
                _, grad = eval_basis_grad(net, pts)
                a = 2.0 + np.cos(pts[:, 0] * pts[:, 1])
                v = v_val(int(k1), pts[:, 0]) * v_val(int(k2), pts[:, 1])
                line = np.abs((glw * a * v) @ grad[:, :, axis])
                assert line.max() <= 1e-12


class TestBoundaryRows:
    def test_structure_and_values(self):
        part = decompose(Domain(2), (2, 2))
        rng = np.random.default_rng(3)
        nets = [
            LocalRbfNet(centers=rng.uniform(-1, 1, (3, 2)), shapes=rng.uniform(0, 2, 3))
            for _ in range(4)
        ]
        problem = SimpleNamespace(dirichlet=lambda x, y: x + 2 * y)
        colloc = sample_collocation(part, 4, 2, rng=np.random.default_rng(1))
        A, b = assemble_boundary_rows(problem, part, nets, colloc)
        assert A.shape == (colloc.N_b, 12)
        for r, (p, owner) in enumerate(
            zip(colloc.boundary_points, colloc.boundary_owner)
        ):
            assert abs(b[r] - (p[0] + 2 * p[1])) <= 1e-14
            sub = part.subdomains[owner]
            expect = eval_basis(nets[owner], sub.to_reference(p[None]))[0]
            np.testing.assert_allclose(A[r, owner * 3 : owner * 3 + 3], expect)
            mask = np.ones(12, bool)
            mask[owner * 3 : owner * 3 + 3] = False
            assert np.all(A[r, mask] == 0.0)


class TestContinuityRows:
    def jump_sides(self, part, nets, w, p, face):
        J = nets[0].J
        out = []
        for sid in (face.left_id, face.right_id):
            sub = part.subdomains[sid]
            rho, grad = eval_basis_grad(nets[sid], sub.to_reference(p[None]))
            wk = w[sid * J : (sid + 1) * J]
            val = rho[0] @ wk
            phys = [
                (2.0 / sub.widths[d]) * (grad[0, :, d] @ wk)
                for d in range(sub.lo.size)
            ]
            out.append((val, phys))
        return out

    def test_rows_encode_value_and_derivative_jumps_1d(self):
        part = decompose(Domain(1), (2,))
        rng = np.random.default_rng(4)
        nets = [
            LocalRbfNet(centers=rng.uniform(-1, 1, (5, 1)), shapes=rng.uniform(0, 3, 5))
            for _ in range(2)
        ]
        colloc = sample_collocation(part, 1, 1)
        A, b = assemble_continuity_rows(part, nets, colloc)
        assert A.shape == (2, 10)
        assert np.all(b == 0.0)
        w = rng.standard_normal(10)
        (vl, gl), (vr, gr) = self.jump_sides(
            part, nets, w, colloc.interface_points[0], part.interfaces[0]
        )
        assert abs(A[0] @ w - (vl - vr)) <= 1e-12
        assert abs(A[1] @ w - (gl[0] - gr[0])) <= 1e-12

    @pytest.mark.parametrize("mode,rpp", [("grad", 3), ("normal", 2)])
    def test_rows_encode_jumps_2d(self, mode, rpp):
        part = decompose(Domain(2), (2, 1))
        rng = np.random.default_rng(5)
        nets = [
            LocalRbfNet(centers=rng.uniform(-1, 1, (6, 2)), shapes=rng.uniform(0, 3, 6))
            for _ in range(2)
        ]
        colloc = sample_collocation(part, 2, 3, rng=np.random.default_rng(2))
        A, b = assemble_continuity_rows(part, nets, colloc, continuity=mode)
        assert A.shape == (rpp * 3, 12)
        assert np.all(b == 0.0)
        w = rng.standard_normal(12)
        face = part.interfaces[0]
        for p_idx, point in enumerate(colloc.interface_points):
            (vl, gl), (vr, gr) = self.jump_sides(part, nets, w, point, face)
            r0 = rpp * p_idx
            assert abs(A[r0] @ w - (vl - vr)) <= 1e-12
            if mode == "grad":
                assert abs(A[r0 + 1] @ w - (gl[0] - gr[0])) <= 1e-12
                assert abs(A[r0 + 2] @ w - (gl[1] - gr[1])) <= 1e-12
            else:
                d = face.axis
                assert abs(A[r0 + 1] @ w - (gl[d] - gr[d])) <= 1e-12


class TestSystemLayout:
    def make(self, continuity="grad"):
        problem = SimpleNamespace(
            coefficient=lambda x, y: 1.0 + x * y,
            reaction=None,
            source=lambda x, y: np.ones_like(x),
            dirichlet=lambda x, y: np.zeros_like(x),
        )
        part = decompose(Domain(2), (3, 2))
        rng = np.random.default_rng(6)
        nets = [
            LocalRbfNet(centers=rng.uniform(-1, 1, (5, 2)), shapes=rng.uniform(0, 2, 5))
            for _ in range(6)
        ]
        colloc = sample_collocation(part, 3, 2, rng=np.random.default_rng(7))
        sys = assemble_system(problem, part, nets, Q=2, colloc=colloc,
                              continuity=continuity)
        return problem, part, nets, colloc, sys

    def test_dimensions(self):
        _, part, _, colloc, sys = self.make()
        # 6 cells x Q^2 rows + 10 edges x 3 points + 7 faces x 2 points x 3 rows
        assert sys.N == 6 * 4 + 30 + 7 * 2 * 3
        assert sys.M == 30
        assert sys.A_e.shape == (24, 30)
        assert sys.A_b.shape == (30, 30)
        assert sys.A_c.shape == (42, 30)

    def test_blocks_are_views_into_stacked_storage(self):
        _, _, _, _, sys = self.make()
        A, b = stack(sys)
        assert A.shape == (sys.N, sys.M)
        for block in (sys.A_e, sys.A_b, sys.A_c):
            assert np.shares_memory(block, A)
        A2, _ = stack(sys)
        assert A2 is A  # zero-copy, idempotent at unit weights

    def test_matches_standalone_assembly(self):
        problem, part, nets, colloc, sys = self.make()
        A_e, b_e = assemble_pde_rows(problem, part, nets, Q=2)
        A_b, b_b = assemble_boundary_rows(problem, part, nets, colloc)
        A_c, b_c = assemble_continuity_rows(part, nets, colloc)
        np.testing.assert_array_equal(sys.A_e, A_e)
        np.testing.assert_array_equal(sys.A_b, A_b)
        np.testing.assert_array_equal(sys.A_c, A_c)
        np.testing.assert_array_equal(sys.b_e, b_e)
        np.testing.assert_array_equal(sys.b_b, b_b)
        np.testing.assert_array_equal(sys.b_c, b_c)

    def test_block_weights(self):
        problem, part, nets, colloc, sys = self.make()
        A0, b0 = stack(self.make()[4])  # unit-weight copy for reference
        A, b = stack(sys, weights=(2.0, 3.0, 4.0))
        n_e, n_b = sys.A_e.shape[0], sys.A_b.shape[0]
        np.testing.assert_allclose(A[:n_e], 2.0 * A0[:n_e])
        np.testing.assert_allclose(A[n_e : n_e + n_b], 3.0 * A0[n_e : n_e + n_b])
        np.testing.assert_allclose(A[n_e + n_b :], 4.0 * A0[n_e + n_b :])
        np.testing.assert_allclose(b[:n_e], 2.0 * b0[:n_e])

    def test_stack_without_shared_storage(self):
        problem, part, nets, colloc, _ = self.make()
        A_e, b_e = assemble_pde_rows(problem, part, nets, Q=2)
        A_b, b_b = assemble_boundary_rows(problem, part, nets, colloc)
        A_c, b_c = assemble_continuity_rows(part, nets, colloc)
        sys = BlockSystem(
            A_e=A_e, b_e=b_e, A_b=A_b, b_b=b_b, A_c=A_c, b_c=b_c,
            S=6, J=5, Q=2, dim=2,
        )
        A, b = stack(sys)
        np.testing.assert_array_equal(A, np.vstack([A_e, A_b, A_c]))
        np.testing.assert_array_equal(b, np.concatenate([b_e, b_b, b_c]))

    def test_column_block(self):
        _, _, _, _, sys = self.make()
        assert sys.column_block(2) == slice(10, 15)


class TestErrors:
    def test_non_finite_field_is_reported_with_location(self):
        problem = SimpleNamespace(
            coefficient=lambda x: np.where(x > 0.5, np.nan, 1.0),
            reaction=None,
            source=lambda x: np.ones_like(x),
        )
        part = decompose(Domain(1), (2,))
        net = fixed_net_1d()
        with pytest.raises(AssemblyError, match="subdomain"):
            assemble_pde_rows(problem, part, [net, net], Q=2, n_q=10)

    def test_wrong_net_count(self):
        part = decompose(Domain(1), (3,))
        with pytest.raises(ValueError, match="nets"):
            assemble_pde_rows(
                SimpleNamespace(coefficient=None, reaction=None, source=None),
                part,
                [fixed_net_1d()],
                Q=2,
            )

    def test_mixed_basis_sizes(self):
        part = decompose(Domain(1), (2,))
        small = LocalRbfNet(centers=np.zeros((1, 1)), shapes=np.ones(1))
        with pytest.raises(ValueError):
            assemble_pde_rows(
                SimpleNamespace(coefficient=None, reaction=None, source=None),
                part,
                [fixed_net_1d(), small],
                Q=2,
            )

    def test_unknown_continuity_mode(self):
        with pytest.raises(ValueError):
            rows_per_interface_point(2, "curl")
        assert rows_per_interface_point(1) == 2
        assert rows_per_interface_point(2, "grad") == 3
        assert rows_per_interface_point(2, "normal") == 2
