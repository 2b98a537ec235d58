import math

import numpy as np
import pytest

from conftest import random_state
from decor_uniform import corpus
from decor_uniform.curvature import (
    ALPHA0_GAUSS_BONNET,
    NEG_EULER_NONPOS,
    POS_EULER_NEG_ALPHA_POS,
    TWO_PI,
    UNCLASSIFIED,
    ZERO_EULER_ZERO,
    alpha_curvature,
    angle_defects,
    classify_target,
    constraint_residual,
    curvature_field,
    make_target,
)
from decor_uniform.delaunay import evaluate_at


class TestAngleDefects:
    def test_regular_tetrahedron(self, tetra_state):
        assert np.allclose(angle_defects(tetra_state), math.pi, atol=1e-14)

    def test_flat_torus(self, torus_state):
        assert np.allclose(angle_defects(torus_state), 0.0, atol=1e-13)

    def test_genus2_seam_defects(self, genus2_state):
        K = angle_defects(genus2_state)
        seam = np.isclose(K, -4 * math.pi / 3, atol=1e-12)
        flat = np.isclose(K, 0.0, atol=1e-12)
        assert seam.sum() == 3 and flat.sum() == 12

    def test_gauss_bonnet_random_states(self, rng):
        for builder, chi in ((corpus.tetrahedron_problem, 2),
                             (corpus.torus_problem, 0),
                             (corpus.genus2_problem, -2)):
            for _ in range(4):
                state = random_state(builder, rng, sigma=0.3)
                assert abs(np.sum(angle_defects(state)) - TWO_PI * chi) < 1e-10

    def test_invariant_under_global_shift(self, genus2_state, rng):
        K0 = angle_defects(genus2_state)
        evaluate_at(genus2_state, np.full(15, 1.3))
        assert np.allclose(angle_defects(genus2_state), K0, atol=1e-12)


class TestAlphaCurvature:
    def test_tetrahedron_alpha2(self, tetra_state):
        K = angle_defects(tetra_state)
        R = alpha_curvature(K, tetra_state.realized_metric().radii, 2.0)
        assert np.allclose(R, math.pi, atol=1e-14)

    def test_alpha0_is_defect(self):
        K = np.array([0.3, -0.2])
        assert np.array_equal(alpha_curvature(K, np.array([2.0, 3.0]), 0.0), K)

    def test_radius_two(self):
        assert alpha_curvature(np.array([math.pi]), np.array([2.0]), 2.0)[0] == pytest.approx(math.pi / 4)

    def test_field_parametrizations_agree(self, rng):
        state = random_state(corpus.genus2_problem, rng, sigma=0.3)
        alpha = 1.7
        field = curvature_field(state, alpha)
        r0 = corpus.genus2_problem()[1].radii
        assert np.allclose(field.cal_R_alpha, field.R_alpha * r0**alpha, rtol=1e-10, atol=1e-12)
        assert np.array_equal(np.sign(field.cal_R_alpha), np.sign(field.R_alpha))


class TestClassifyTarget:
    def test_neg_euler_nonpos(self):
        assert classify_target(2.0, -np.ones(5), -2) == NEG_EULER_NONPOS

    def test_zero_euler_zero(self):
        assert classify_target(3.0, np.zeros(5), 0) == ZERO_EULER_ZERO

    def test_pos_euler_neg_alpha(self):
        assert classify_target(-1.0, np.ones(5), 2) == POS_EULER_NEG_ALPHA_POS

    def test_alpha0_gauss_bonnet(self):
        values = np.full(4, math.pi)
        assert classify_target(0.0, values, 2) == ALPHA0_GAUSS_BONNET

    def test_unclassified_cases(self):
        assert classify_target(2.0, np.ones(5), 2) == UNCLASSIFIED          # chi>0, alpha>0
        assert classify_target(2.0, np.zeros(5), -2) == UNCLASSIFIED        # zero target, chi<0
        assert classify_target(0.0, np.full(4, 7.0), 2) == UNCLASSIFIED     # >= 2 pi
        assert classify_target(0.0, np.full(4, 0.9 * math.pi), 2) == UNCLASSIFIED  # bad sum


class TestConstraintResidual:
    def test_zero_at_exact_solution(self, tetra_state):
        # the tetrahedron itself solves alpha = -2, target = K / r^-2 at u = 0
        K = angle_defects(tetra_state)
        r0 = tetra_state.realized_metric().radii
        target = make_target(-2.0, K / r0**-2.0, r0, 2)
        assert abs(constraint_residual(target, np.zeros(4), 2)) < 1e-12

    def test_scaled_target_linear(self, tetra_state):
        K = angle_defects(tetra_state)
        r0 = tetra_state.realized_metric().radii
        chi = 2
        for t in (0.25, 3.0):
            target = make_target(-2.0, t * K / r0**-2.0, r0, chi)
            assert constraint_residual(target, np.zeros(4), chi) == pytest.approx(
                TWO_PI * chi * (t - 1.0), rel=1e-12)

    def test_zero_target(self):
        r0 = np.ones(9)
        target = make_target(2.0, np.zeros(9), r0, 0)
        assert constraint_residual(target, np.zeros(9), 0) == pytest.approx(0.0)
        # chi != 0 with zero target reports -2 pi chi
        target = make_target(2.0, np.zeros(9), r0, -2)
        assert constraint_residual(target, np.zeros(9), -2) == pytest.approx(4 * math.pi)
