"""Domain decomposition, reference maps, and collocation sampling."""

import numpy as np
import pytest

from msrbf import (
    Domain,
    OutOfDomainError,
    Partition,
    Subdomain,
    decompose,
    locate,
    sample_collocation,
)


class TestDomain:
    def test_unit_box_default(self):
        d1 = Domain(1)
        np.testing.assert_array_equal(d1.lower, [0.0])
        np.testing.assert_array_equal(d1.upper, [1.0])
        d2 = Domain(2)
        assert d2.contains(np.array([[0.5, 0.5], [0.0, 1.0]])).all()
        assert not d2.contains(np.array([[1.5, 0.5]])).any()

    def test_degenerate_box_rejected(self):
        with pytest.raises(ValueError):
            Domain(1, lower=[0.0], upper=[0.0])
        with pytest.raises(ValueError):
            Domain(2, lower=[0.0, 1.0], upper=[1.0, 0.0])


class TestSubdomain:
    def test_reference_map_roundtrip(self):
        sub = Subdomain(0, lo=np.array([0.2, 0.5]), hi=np.array([0.6, 0.7]))
        rng = np.random.default_rng(1)
        x = rng.uniform([0.2, 0.5], [0.6, 0.7], (50, 2))
        xhat = sub.to_reference(x)
        assert np.all(xhat >= -1.0) and np.all(xhat <= 1.0)
        np.testing.assert_allclose(sub.from_reference(xhat), x, atol=1e-14)

    def test_corners_map_to_reference_corners(self):
        sub = Subdomain(0, lo=np.array([0.2]), hi=np.array([0.6]))
        np.testing.assert_allclose(
            sub.to_reference(np.array([[0.2], [0.4], [0.6]])),
            [[-1.0], [0.0], [1.0]],
            atol=1e-14,
        )

    def test_jacobian_and_widths(self):
        sub = Subdomain(3, lo=np.array([0.0, 0.5]), hi=np.array([0.5, 0.75]))
        np.testing.assert_allclose(sub.widths, [0.5, 0.25])
        assert abs(sub.jacobian - 0.25 * 0.125) <= 1e-16

    def test_outside_point_rejected(self):
        sub = Subdomain(0, lo=np.array([0.0]), hi=np.array([0.5]))
        with pytest.raises(OutOfDomainError):
            sub.to_reference(np.array([[0.7]]))


class TestDecompose1D:
    def test_uniform_cells(self):
        part = decompose(Domain(1), (4,))
        assert part.S == 4
        np.testing.assert_allclose(part.edges[0], [0.0, 0.25, 0.5, 0.75, 1.0])
        for k, sub in enumerate(part.subdomains):
            assert sub.id == k
            np.testing.assert_allclose(sub.lo, [0.25 * k], atol=1e-15)
            np.testing.assert_allclose(sub.hi, [0.25 * (k + 1)], atol=1e-15)

    def test_interfaces(self):
        part = decompose(Domain(1), (4,))
        assert len(part.interfaces) == 3
        for k, face in enumerate(part.interfaces):
            assert (face.left_id, face.right_id) == (k, k + 1)
            assert face.axis == 0
            assert abs(face.position - 0.25 * (k + 1)) <= 1e-15
            np.testing.assert_array_equal(face.normal, [1.0])

    def test_boundary_edges(self):
        part = decompose(Domain(1), (4,))
        edges = part.boundary_edges()
        assert len(edges) == 2
        owners = sorted(e[0] for e in edges)
        assert owners == [0, 3]


class TestDecompose2D:
    def test_counts_and_row_major_ids(self):
        part = decompose(Domain(2), (3, 2))
        assert part.S == 6
        ex, ey = part.edges
        np.testing.assert_allclose(ex, np.linspace(0, 1, 4))
        np.testing.assert_allclose(ey, np.linspace(0, 1, 3))
        for i1 in range(3):
            for i2 in range(2):
                sub = part.subdomains[i1 * 2 + i2]
                np.testing.assert_allclose(sub.lo, [ex[i1], ey[i2]], atol=1e-15)
                np.testing.assert_allclose(
                    sub.hi, [ex[i1 + 1], ey[i2 + 1]], atol=1e-15
                )

    def test_interface_enumeration(self):
        # (3, 2) grid: 2*2 vertical faces plus 3*1 horizontal faces
        part = decompose(Domain(2), (3, 2))
        assert len(part.interfaces) == 7
        vertical = [f for f in part.interfaces if f.axis == 0]
        horizontal = [f for f in part.interfaces if f.axis == 1]
        assert len(vertical) == 4 and len(horizontal) == 3
        for f in vertical:
            assert f.right_id - f.left_id == 2
            np.testing.assert_array_equal(f.normal, [1.0, 0.0])
        for f in horizontal:
            assert f.right_id - f.left_id == 1
            np.testing.assert_array_equal(f.normal, [0.0, 1.0])
        # neighbors straddle the stated position along the face axis
        for f in part.interfaces:
            left = part.subdomains[f.left_id]
            right = part.subdomains[f.right_id]
            assert abs(left.hi[f.axis] - f.position) <= 1e-15
            assert abs(right.lo[f.axis] - f.position) <= 1e-15
            assert f.span[0] < f.span[1]

    def test_boundary_edge_count_and_owners(self):
        part = decompose(Domain(2), (3, 2))
        edges = part.boundary_edges()
        assert len(edges) == 2 * (3 + 2)
        for owner, axis, value, lo, hi in edges:
            sub = part.subdomains[owner]
            assert value in (0.0, 1.0)
            assert abs(sub.lo[axis] - value) <= 1e-15 or abs(sub.hi[axis] - value) <= 1e-15
            assert lo < hi

    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            decompose(Domain(2), (0, 3))
        with pytest.raises(ValueError):
            decompose(Domain(1), (2, 2))


class TestLocate:
    def test_interior_points_1d(self):
        part = decompose(Domain(1), (4,))
        ids = locate(part, np.array([[0.1], [0.3], [0.6], [0.9]]))
        np.testing.assert_array_equal(ids, [0, 1, 2, 3])

    def test_shared_edge_goes_to_lower_id(self):
        part = decompose(Domain(1), (4,))
        ids = locate(part, np.array([[0.25], [0.5], [0.75]]))
        np.testing.assert_array_equal(ids, [0, 1, 2])

    def test_domain_endpoints(self):
        part = decompose(Domain(1), (4,))
        ids = locate(part, np.array([[0.0], [1.0]]))
        np.testing.assert_array_equal(ids, [0, 3])

    def test_2d_corner_tie_break(self):
        part = decompose(Domain(2), (2, 2))
        # center point touches all four cells; lowest id wins
        ids = locate(part, np.array([[0.5, 0.5]]))
        np.testing.assert_array_equal(ids, [0])

    def test_membership(self):
        part = decompose(Domain(2), (3, 2))
        rng = np.random.default_rng(5)
        pts = rng.uniform(0, 1, (200, 2))
        ids = locate(part, pts)
        for p, k in zip(pts, ids):
            sub = part.subdomains[k]
            assert np.all(p >= sub.lo - 1e-15) and np.all(p <= sub.hi + 1e-15)

    def test_outside_rejected(self):
        part = decompose(Domain(1), (4,))
        with pytest.raises(OutOfDomainError):
            locate(part, np.array([[1.2]]))


class TestCollocation1D:
    def test_deterministic_facet_points(self):
        part = decompose(Domain(1), (5,))
        colloc = sample_collocation(part, 10, 10)
        np.testing.assert_allclose(colloc.boundary_points, [[0.0], [1.0]])
        np.testing.assert_array_equal(colloc.boundary_owner, [0, 4])
        np.testing.assert_allclose(colloc.interface_points.ravel(), [0.2, 0.4, 0.6, 0.8])
        np.testing.assert_array_equal(colloc.interface_index, [0, 1, 2, 3])
        assert colloc.N_b == 2 and colloc.N_c == 4


class TestCollocation2D:
    def test_counts(self):
        part = decompose(Domain(2), (3, 2))
        colloc = sample_collocation(part, 4, 3, rng=np.random.default_rng(0))
        assert colloc.N_b == 10 * 4
        assert colloc.N_c == 7 * 3

    def test_points_lie_on_their_facets(self):
        part = decompose(Domain(2), (3, 2))
        colloc = sample_collocation(part, 4, 3, rng=np.random.default_rng(0))
        on_wall = (
            np.isclose(colloc.boundary_points, 0.0) | np.isclose(colloc.boundary_points, 1.0)
        ).any(axis=1)
        assert on_wall.all()
        for p, owner in zip(colloc.boundary_points, colloc.boundary_owner):
            sub = part.subdomains[owner]
            assert np.all(p >= sub.lo - 1e-12) and np.all(p <= sub.hi + 1e-12)
        for p, k in zip(colloc.interface_points, colloc.interface_index):
            face = part.interfaces[k]
            assert abs(p[face.axis] - face.position) <= 1e-15
            t = p[1 - face.axis]
            assert face.span[0] <= t <= face.span[1]

    def test_seed_reproducibility(self):
        part = decompose(Domain(2), (2, 2))
        a = sample_collocation(part, 5, 5, rng=np.random.default_rng(42))
        b = sample_collocation(part, 5, 5, rng=np.random.default_rng(42))
        c = sample_collocation(part, 5, 5, rng=np.random.default_rng(43))
        np.testing.assert_array_equal(a.boundary_points, b.boundary_points)
        np.testing.assert_array_equal(a.interface_points, b.interface_points)
        assert not np.array_equal(a.interface_points, c.interface_points)

    def test_arrays_frozen(self):
        part = decompose(Domain(2), (2, 2))
        colloc = sample_collocation(part, 3, 3, rng=np.random.default_rng(0))
        with pytest.raises(ValueError):
            colloc.boundary_points[0, 0] = 9.9
        with pytest.raises(ValueError):
            colloc.interface_points[0, 0] = 9.9
