"""Angle defects, combinatorial alpha-curvature, and target classification.

Two parametrizations of the same curvature are carried side by side: the
radius form K_i / r_i^alpha and the factor form K_i / e^{alpha u_i}. They
differ vertexwise by the positive constant (r0_i)^alpha, so their signs
agree; the solver works internally in the factor form and converts on
output.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import triangle_angles
from .mesh import edge_key

TWO_PI = 2.0 * math.pi

# target sign cases
NEG_EULER_NONPOS = "NegEulerNonPos"          # chi < 0, alpha != 0, target <= 0, not all zero
ZERO_EULER_ZERO = "ZeroEulerZero"            # chi = 0, alpha != 0, target == 0
POS_EULER_NEG_ALPHA_POS = "PosEulerNegAlphaPos"  # chi > 0, alpha < 0, target > 0
ALPHA0_GAUSS_BONNET = "Alpha0GaussBonnet"    # alpha = 0, target < 2 pi, sum = 2 pi chi
UNCLASSIFIED = "Unclassified"


def vertex_cone_angles(mesh, metric):
    """Total inner angle accumulated at each vertex."""
    theta = np.zeros(mesh.vertex_count)
    lengths = metric.lengths
    for (i, j, k) in mesh.faces:
        ang = triangle_angles((lengths[edge_key(i, j)], lengths[edge_key(j, k)], lengths[edge_key(k, i)]))
        theta[i] += ang.at_i
        theta[j] += ang.at_j
        theta[k] += ang.at_k
    return theta


def angle_defects(state):
    """K_i = 2 pi - theta_i on the state's realized metric."""
    return TWO_PI - vertex_cone_angles(state.mesh, state.realized_metric())


def alpha_curvature(K, radii, alpha):
    """Elementwise K_i / r_i^alpha; alpha = 0 returns K itself."""
    K = np.asarray(K, dtype=float)
    if alpha == 0:
        return K.copy()
    return K / np.asarray(radii, dtype=float) ** alpha


@dataclass
class CurvatureField:
    """Angle defect plus both curvature parametrizations at one state."""

    K: np.ndarray
    R_alpha: np.ndarray
    cal_R_alpha: np.ndarray


def curvature_field(state, alpha):
    K = angle_defects(state)
    radii = state.realized_metric().radii
    return CurvatureField(
        K=K,
        R_alpha=alpha_curvature(K, radii, alpha),
        cal_R_alpha=K / np.exp(alpha * state.cur_u),
    )


def classify_target(alpha, values, chi):
    """Match (alpha, target, Euler number) against the supported sign cases."""
    values = np.asarray(values, dtype=float)
    if alpha == 0:
        total = float(np.sum(values))
        if np.all(values < TWO_PI) and abs(total - TWO_PI * chi) <= 1e-8 * max(1.0, abs(TWO_PI * chi)):
            return ALPHA0_GAUSS_BONNET
        return UNCLASSIFIED
    if chi < 0 and np.all(values <= 0) and np.any(values < 0):
        return NEG_EULER_NONPOS
    if chi == 0 and np.all(values == 0):
        return ZERO_EULER_ZERO
    if chi > 0 and alpha < 0 and np.all(values > 0):
        return POS_EULER_NEG_ALPHA_POS
    return UNCLASSIFIED


@dataclass
class CurvatureTarget:
    """Prescribed curvature in the radius form plus its derived factor form."""

    alpha: float
    values: np.ndarray       # radius-form target
    cal_values: np.ndarray   # factor-form target: values * r0^alpha
    case_label: str


def make_target(alpha, values, ref_radii, chi):
    values = np.asarray(values, dtype=float)
    cal = values * np.asarray(ref_radii, dtype=float) ** alpha
    return CurvatureTarget(float(alpha), values, cal, classify_target(alpha, values, chi))


def constraint_residual(target, u, chi):
    """sum_i calR_i e^{alpha u_i} - 2 pi chi; zero at any exact solution."""
    u = np.asarray(u, dtype=float)
    return float(np.sum(target.cal_values * np.exp(target.alpha * u)) - TWO_PI * chi)
