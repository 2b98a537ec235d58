"""Decorated PE metrics: lengths, radii, inversive distances, conformal change.

The conformal change scales radii by e^{u_i} and transforms squared lengths
by a quadratic formula that keeps every edgewise inversive distance fixed.
Lengths are evaluated through the inversive-distance form

    l~^2 = r~_i^2 + r~_j^2 + 2 r~_i r~_j I_ij,

which is algebraically identical to the defining quadratic formula but free
of catastrophic cancellation for large |u_i - u_j|.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    FactorOverflowError,
    NonPositiveSquaredLengthError,
    TriangleInequalityError,
)
from .mesh import edge_key

SEP_EPS = 1e-9   # separation margin: edges with I <= 1 + SEP_EPS are rejected
U_MAX = 700.0    # conformal factor overflow guard


@dataclass
class DecoratedMetric:
    """Per-edge lengths keyed by (i, j) with i < j, and per-vertex radii."""

    lengths: dict
    radii: np.ndarray

    def copy(self):
        return DecoratedMetric(dict(self.lengths), self.radii.copy())

    def inversive_distances(self):
        r = self.radii
        return {e: inversive_distance(l, r[e[0]], r[e[1]]) for e, l in self.lengths.items()}


@dataclass
class MetricReport:
    """Validation outcome; empty violation lists mean the metric is usable."""

    triangle_violations: list
    separation_violations: list

    @property
    def ok(self):
        return not self.triangle_violations and not self.separation_violations

    def describe(self):
        lines = []
        for face_idx, face, lengths in self.triangle_violations:
            lines.append(f"face {face_idx} {face}: triangle inequality fails for lengths {lengths}")
        for edge, value in self.separation_violations:
            lines.append(f"edge {edge}: inversive distance {value:.12g} <= 1 + {SEP_EPS}")
        return "\n".join(lines) if lines else "metric valid"


def inversive_distance(l, r_i, r_j):
    """(l^2 - r_i^2 - r_j^2) / (2 r_i r_j); > 1 means separated circles."""
    return (l * l - r_i * r_i - r_j * r_j) / (2.0 * r_i * r_j)


def validate(metric, mesh):
    """Report triangle-inequality and separation violations; never raises."""
    tri_viol = []
    for idx, (i, j, k) in enumerate(mesh.faces):
        a = metric.lengths[edge_key(i, j)]
        b = metric.lengths[edge_key(j, k)]
        c = metric.lengths[edge_key(k, i)]
        if a + b <= c or b + c <= a or c + a <= b or min(a, b, c) <= 0:
            tri_viol.append((idx, (i, j, k), (a, b, c)))
    sep_viol = []
    for e in mesh.edges:
        val = inversive_distance(metric.lengths[e], metric.radii[e[0]], metric.radii[e[1]])
        if val <= 1.0 + SEP_EPS:
            sep_viol.append((e, val))
    return MetricReport(tri_viol, sep_viol)


def conformal_radii(r0, u):
    """Elementwise e^{u_i} r_i with an explicit overflow guard."""
    u = np.asarray(u, dtype=float)
    if np.max(np.abs(u)) > U_MAX:
        raise FactorOverflowError(f"|u| exceeds {U_MAX}")
    return np.exp(u) * np.asarray(r0, dtype=float)


def conformal_length(l, r_i, r_j, u_i, u_j):
    """Transformed edge length, evaluated through the inversive-distance form."""
    if abs(u_i) > U_MAX or abs(u_j) > U_MAX:
        raise FactorOverflowError(f"|u| exceeds {U_MAX}")
    inv = inversive_distance(l, r_i, r_j)
    ri = math.exp(u_i) * r_i
    rj = math.exp(u_j) * r_j
    sq = ri * ri + rj * rj + 2.0 * ri * rj * inv
    if sq <= 0.0:
        raise NonPositiveSquaredLengthError(
            f"squared length {sq} for l={l}, r=({r_i},{r_j}), u=({u_i},{u_j})")
    return math.sqrt(sq)


def length_vector(metric, mesh):
    """Edge lengths as a vector aligned with mesh.edges."""
    lengths = metric.lengths
    return np.fromiter((lengths[e] for e in mesh.edges), dtype=float, count=mesh.edge_count)


def apply_conformal(metric, u, mesh):
    """Transform every radius and edge length by the factor ``u``.

    Raises TriangleInequalityError when some face of ``mesh`` degenerates,
    which signals that ``u`` left the cell where this triangulation realizes
    the metric; callers flip or substep.
    """
    u = np.asarray(u, dtype=float)
    new_radii = conformal_radii(metric.radii, u)
    ev = mesh.edges_arr
    L = length_vector(metric, mesh)
    r_i = metric.radii[ev[:, 0]]
    r_j = metric.radii[ev[:, 1]]
    inv = (L * L - r_i * r_i - r_j * r_j) / (2.0 * r_i * r_j)
    nr_i = new_radii[ev[:, 0]]
    nr_j = new_radii[ev[:, 1]]
    sq = nr_i * nr_i + nr_j * nr_j + 2.0 * nr_i * nr_j * inv
    if np.any(sq <= 0.0):
        raise NonPositiveSquaredLengthError("non-positive squared length under this factor")
    new_l = np.sqrt(sq)
    fl = new_l[mesh.face_edge_idx]
    bad = ((fl[:, 0] + fl[:, 1] <= fl[:, 2])
           | (fl[:, 1] + fl[:, 2] <= fl[:, 0])
           | (fl[:, 2] + fl[:, 0] <= fl[:, 1]))
    if np.any(bad):
        faces = [int(f) for f in np.nonzero(bad)[0]]
        raise TriangleInequalityError(f"{len(faces)} faces degenerate under this factor", faces=faces)
    return DecoratedMetric(dict(zip(mesh.edges, new_l.tolist())), new_radii)
