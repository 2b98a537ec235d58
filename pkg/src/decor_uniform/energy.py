"""Variational energies: gradient, Hessian, and path-integrated values.

The plain energy has gradient K (the angle defects); the prescribed-curvature
energy subtracts the factor-form target, g_i = K_i - calR_i e^{alpha u_i}.
Energy values are always relative to a base point: the absolute potential is
never evaluated, only its gradient, which is integrated along straight
segments with 16-node Gauss-Legendre quadrature split at flip events. The
target contribution has the closed-form antiderivative
sum_i calR_i e^{alpha u_i} / alpha, so only the defect part needs quadrature.
"""

import math
from dataclasses import dataclass

import numpy as np

from .curvature import angle_defects
from .delaunay import evaluate_at
from .mesh import edge_key

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def grad_energy(state):
    """Gradient of the plain energy: the angle defects K."""
    return angle_defects(state)


def grad_prescribed(state, target):
    """Gradient of the prescribed-curvature energy: K_i - calR_i e^{alpha u_i}."""
    return angle_defects(state) - target.cal_values * np.exp(target.alpha * state.cur_u)


@dataclass
class EnergyHessian:
    """dk_du is the dK/du block; matrix adds the target's diagonal term."""

    dk_du: np.ndarray
    matrix: np.ndarray


def hessian(state, target=None):
    """Assemble the dense Hessian from per-triangle angle derivatives.

    Within one face with sides a = l_jk, b = l_ki, c = l_ij the angle
    derivatives with respect to the sides follow from the law of cosines,

        dA/da = a / (2T),  dA/db = -a cos C / (2T),  dA/dc = -a cos B / (2T),

    and the sides respond to the factors through dl_ij/du_i =
    (l_ij^2 + r_i^2 - r_j^2) / (2 l_ij) with the realized radii. Valid for
    states strictly inside their cell; near cell walls the underlying
    potential is only C^2, so assembly per current triangulation applies.
    """
    mesh = state.mesh
    metric = state.realized_metric()
    n = mesh.vertex_count
    lengths = metric.lengths
    r = metric.radii
    dk = np.zeros((n, n))
    for (i, j, k) in mesh.faces:
        c = lengths[edge_key(i, j)]
        a = lengths[edge_key(j, k)]
        b = lengths[edge_key(k, i)]
        cos_a = (b * b + c * c - a * a) / (2.0 * b * c)
        cos_b = (a * a + c * c - b * b) / (2.0 * a * c)
        cos_c = (a * a + b * b - c * c) / (2.0 * a * b)
        s = 0.5 * (a + b + c)
        area = math.sqrt(max(s * (s - a) * (s - b) * (s - c), 0.0))
        if area == 0.0:
            raise ZeroDivisionError(f"degenerate face {(i, j, k)} in Hessian assembly")
        inv2t = 1.0 / (2.0 * area)
        # rows: angles at i, j, k; columns: sides a, b, c
        dtheta_dl = (
            (a * inv2t, -a * cos_c * inv2t, -a * cos_b * inv2t),
            (-b * cos_c * inv2t, b * inv2t, -b * cos_a * inv2t),
            (-c * cos_b * inv2t, -c * cos_a * inv2t, c * inv2t),
        )
        ri2, rj2, rk2 = r[i] * r[i], r[j] * r[j], r[k] * r[k]
        # rows: sides a, b, c; columns: factors u_i, u_j, u_k
        dl_du = (
            (0.0, (a * a + rj2 - rk2) / (2.0 * a), (a * a + rk2 - rj2) / (2.0 * a)),
            ((b * b + ri2 - rk2) / (2.0 * b), 0.0, (b * b + rk2 - ri2) / (2.0 * b)),
            ((c * c + ri2 - rj2) / (2.0 * c), (c * c + rj2 - ri2) / (2.0 * c), 0.0),
        )
        verts = (i, j, k)
        for p in range(3):
            row = dtheta_dl[p]
            for q in range(3):
                val = row[0] * dl_du[0][q] + row[1] * dl_du[1][q] + row[2] * dl_du[2][q]
                # dK_p/du_q = -dtheta_p/du_q
                dk[verts[p], verts[q]] -= val
    if target is None:
        return EnergyHessian(dk, dk)
    diag = -target.alpha * target.cal_values * np.exp(target.alpha * state.cur_u)
    return EnergyHessian(dk, dk + np.diag(diag))


def _target_potential(target, u):
    if target.alpha == 0.0:
        return float(target.cal_values @ u)
    return float(np.sum(target.cal_values * np.exp(target.alpha * u)) / target.alpha)


def _gl16(f, a, b):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * sum(w * f(mid + half * x) for x, w in zip(_GL_NODES, _GL_WEIGHTS))


def _gl16_adaptive(f, a, b, depth=0):
    whole = _gl16(f, a, b)
    mid = 0.5 * (a + b)
    split = _gl16(f, a, mid) + _gl16(f, mid, b)
    if abs(whole - split) <= 1e-12 * (1.0 + abs(split)) or depth >= 18 or (b - a) < 1e-9:
        return split
    return _gl16_adaptive(f, a, mid, depth + 1) + _gl16_adaptive(f, mid, b, depth + 1)


def path_energy_delta(state, new_u, target=None):
    """Energy change along the straight segment from the state's factor to new_u.

    Returns (delta, end_state); the input state is left untouched. A scouting
    walk records where flips happen, the defect part is integrated piecewise
    between those events, and the target part is added in closed form.
    """
    base_u = state.cur_u.copy()
    new_u = np.asarray(new_u, dtype=float)
    delta_u = new_u - base_u
    end = state.copy()
    if not np.any(delta_u):
        return 0.0, end
    log = evaluate_at(end, new_u)
    cuts = sorted({0.0, 1.0, *(rec.t for rec in log if rec.flips > 0)})
    walker = state.copy()

    def defect_rate(t):
        evaluate_at(walker, base_u + t * delta_u)
        return float(angle_defects(walker) @ delta_u)

    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        total += _gl16_adaptive(defect_rate, lo, hi)
    if target is not None:
        total -= _target_potential(target, new_u) - _target_potential(target, base_u)
    return total, end


def energy_value(state, u, target=None):
    """Energy at ``u`` relative to the state's own factor (base value 0)."""
    return path_energy_delta(state, u, target)[0]
