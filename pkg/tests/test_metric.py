import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decor_uniform import corpus
from decor_uniform.errors import FactorOverflowError, TriangleInequalityError
from decor_uniform.mesh import edge_key
from decor_uniform.metric import (
    DecoratedMetric,
    apply_conformal,
    conformal_length,
    conformal_radii,
    inversive_distance,
    validate,
)


class TestInversiveDistance:
    def test_values(self):
        assert inversive_distance(3.0, 1.0, 1.0) == pytest.approx(3.5)
        assert inversive_distance(2.0, 1.0, 1.0) == pytest.approx(1.0)

    def test_orthogonal_circles(self):
        r_i, r_j = 0.7, 1.3
        assert inversive_distance(math.sqrt(r_i**2 + r_j**2), r_i, r_j) == pytest.approx(0.0, abs=1e-15)


class TestValidate:
    def test_valid_tetrahedron(self):
        mesh, metric = corpus.tetrahedron_problem()
        report = validate(metric, mesh)
        assert report.ok
        assert all(v == pytest.approx(3.5) for v in metric.inversive_distances().values())

    def test_triangle_violation_reported(self):
        mesh, metric = corpus.tetrahedron_problem()
        metric.lengths[edge_key(0, 1)] = 6.5  # other two sides are 3
        report = validate(metric, mesh)
        assert not report.ok
        assert report.triangle_violations
        assert "triangle inequality" in report.describe()

    def test_separation_violation_reported(self):
        mesh, metric = corpus.tetrahedron_problem()
        metric.lengths[edge_key(0, 1)] = 2.0  # tangent circles at r = 1
        report = validate(metric, mesh)
        assert any(e == (0, 1) for e, _ in report.separation_violations)


class TestConformalRadii:
    def test_identity(self):
        r0 = np.array([1.0, 2.0, 0.5])
        assert np.array_equal(conformal_radii(r0, np.zeros(3)), r0)

    def test_global_scaling(self):
        r0 = np.array([1.0, 2.0, 0.5])
        out = conformal_radii(r0, np.full(3, 0.7))
        assert np.allclose(out, math.exp(0.7) * r0, rtol=1e-15)

    def test_single_vertex_doubling(self):
        out = conformal_radii(np.array([1.0, 1.0]), np.array([math.log(2.0), 0.0]))
        assert out == pytest.approx([2.0, 1.0])

    def test_overflow_guard(self):
        with pytest.raises(FactorOverflowError):
            conformal_radii(np.ones(2), np.array([0.0, 701.0]))


class TestConformalLength:
    def test_identity(self):
        assert conformal_length(3.0, 1.0, 1.0, 0.0, 0.0) == pytest.approx(3.0)

    def test_global_scaling(self):
        c = -0.4
        assert conformal_length(3.0, 1.0, 0.5, c, c) == pytest.approx(math.exp(c) * 3.0, rel=1e-14)

    def test_worked_example(self):
        # l = 3, r_i = r_j = 1, u_i = ln 2, u_j = 0:
        # (4 - 2) * 1 + (1 - 2) * 1 + 2 * 9 = 19
        assert conformal_length(3.0, 1.0, 1.0, math.log(2.0), 0.0) == pytest.approx(math.sqrt(19.0), rel=1e-14)

    @given(st.floats(0.1, 0.5), st.floats(0.1, 0.5), st.floats(1.2, 5.0),
           st.floats(-3, 3), st.floats(-3, 3))
    @settings(max_examples=80)
    def test_matches_literal_formula(self, r_i, r_j, inv, u_i, u_j):
        l = math.sqrt(r_i * r_i + r_j * r_j + 2 * r_i * r_j * inv)
        got = conformal_length(l, r_i, r_j, u_i, u_j)
        literal = math.sqrt(
            (math.exp(2 * u_i) - math.exp(u_i + u_j)) * r_i**2
            + (math.exp(2 * u_j) - math.exp(u_i + u_j)) * r_j**2
            + math.exp(u_i + u_j) * l**2)
        assert got == pytest.approx(literal, rel=1e-12)


class TestApplyConformal:
    def test_identity(self):
        mesh, metric = corpus.tetrahedron_problem()
        out = apply_conformal(metric, np.zeros(4), mesh)
        assert np.allclose(out.radii, metric.radii)
        for e in mesh.edges:
            assert out.lengths[e] == pytest.approx(metric.lengths[e], rel=1e-15)

    def test_global_scaling_preserves_angles(self):
        from decor_uniform.curvature import vertex_cone_angles
        mesh, metric = corpus.genus2_problem()
        out = apply_conformal(metric, np.full(15, 0.9), mesh)
        assert np.allclose(vertex_cone_angles(mesh, out), vertex_cone_angles(mesh, metric),
                           rtol=0, atol=1e-12)

    def test_inversive_distance_invariance(self, rng):
        mesh, metric = corpus.tetrahedron_problem()
        before = metric.inversive_distances()
        for _ in range(20):
            u = rng.normal(0, 0.2, 4)
            out = apply_conformal(metric, u, mesh)
            after = out.inversive_distances()
            for e in mesh.edges:
                assert after[e] == pytest.approx(before[e], rel=1e-12)

    def test_composition(self, rng):
        mesh, metric = corpus.torus_problem()
        u = rng.normal(0, 0.1, 9)
        v = rng.normal(0, 0.1, 9)
        one = apply_conformal(metric, u + v, mesh)
        two = apply_conformal(apply_conformal(metric, u, mesh), v, mesh)
        assert np.allclose(two.radii, one.radii, rtol=1e-12)
        for e in mesh.edges:
            assert two.lengths[e] == pytest.approx(one.lengths[e], rel=1e-12)

    def test_triangle_violation_raised(self):
        mesh, metric = corpus.tetrahedron_problem()
        u = np.array([3.0, -3.0, 0.0, 0.0])
        with pytest.raises(TriangleInequalityError):
            apply_conformal(metric, u, mesh)


def test_metric_copy_is_deep():
    mesh, metric = corpus.tetrahedron_problem()
    clone = metric.copy()
    clone.lengths[edge_key(0, 1)] = 99.0
    clone.radii[0] = 99.0
    assert metric.lengths[edge_key(0, 1)] == 3.0
    assert metric.radii[0] == 1.0
