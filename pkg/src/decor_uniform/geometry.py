"""Metric computations inside a single decorated Euclidean triangle.

A decorated triangle carries three edge lengths and a circle of given radius
at each vertex. The central object is the face-circle: the unique circle
orthogonal to the three vertex-circles (its center is their radical center).
Its signed distances to the edges drive the weighted Delaunay predicate.

Sign convention: h_e > 0 when the face-circle center lies on the interior
side of edge e. arccos arguments are clamped to [-1, 1]; an edge line missed
by the circle still yields a well-defined clamped angle (0 or pi), which is
all the Delaunay predicate needs.
"""

import math
from dataclasses import dataclass

from .errors import DegenerateTriangleError, ImaginaryRadicalCircleError, NonConvexQuadError

GEOM_EPS = 1e-12   # predicate tolerance
ORTHO_TOL = 1e-10  # relative residual allowed in orthogonality checks


@dataclass(frozen=True)
class DecoratedTriangle:
    """Triangle (i, j, k): lengths (l_ij, l_jk, l_ki), radii (r_i, r_j, r_k)."""

    lengths: tuple
    radii: tuple


@dataclass(frozen=True)
class TriangleAngles:
    """Inner angles (at_i, at_j, at_k), each in (0, pi), summing to pi."""

    at_i: float
    at_j: float
    at_k: float

    def as_tuple(self):
        return (self.at_i, self.at_j, self.at_k)


@dataclass(frozen=True)
class FaceCircle:
    """Radical circle in the triangle's layout frame.

    ``signed_edge_distances`` are (h_ij, h_jk, h_ki), positive toward the
    triangle interior.
    """

    center: tuple
    radius: float
    signed_edge_distances: tuple


@dataclass(frozen=True)
class EdgeCircleAngles:
    """Intersection angles of the face-circle with the edge lines: (a_ij, a_jk, a_ki)."""

    a_ij: float
    a_jk: float
    a_ki: float

    def as_tuple(self):
        return (self.a_ij, self.a_jk, self.a_ki)


def _check_triangle(lengths):
    l_ij, l_jk, l_ki = lengths
    if min(lengths) <= 0.0:
        raise DegenerateTriangleError(f"non-positive length in {lengths}")
    if l_ij + l_jk <= l_ki or l_jk + l_ki <= l_ij or l_ki + l_ij <= l_jk:
        raise DegenerateTriangleError(f"triangle inequality fails for {lengths}")


def _clamp(x):
    return -1.0 if x < -1.0 else (1.0 if x > 1.0 else x)


def triangle_angles(lengths):
    """Inner angles from the law of cosines; raises on degenerate input."""
    _check_triangle(lengths)
    l_ij, l_jk, l_ki = lengths
    at_i = math.acos(_clamp((l_ij * l_ij + l_ki * l_ki - l_jk * l_jk) / (2.0 * l_ij * l_ki)))
    at_j = math.acos(_clamp((l_ij * l_ij + l_jk * l_jk - l_ki * l_ki) / (2.0 * l_ij * l_jk)))
    at_k = math.acos(_clamp((l_jk * l_jk + l_ki * l_ki - l_ij * l_ij) / (2.0 * l_jk * l_ki)))
    return TriangleAngles(at_i, at_j, at_k)


def triangle_area(lengths):
    """Heron's formula."""
    _check_triangle(lengths)
    a, b, c = lengths
    s = 0.5 * (a + b + c)
    return math.sqrt(s * (s - a) * (s - b) * (s - c))


def layout_triangle(tri):
    """Plane positions: i at the origin, j on the positive x-axis, k above.

    Accepts a DecoratedTriangle or a bare length triple.
    """
    lengths = tri.lengths if isinstance(tri, DecoratedTriangle) else tuple(tri)
    _check_triangle(lengths)
    l_ij, l_jk, l_ki = lengths
    x = (l_ij * l_ij + l_ki * l_ki - l_jk * l_jk) / (2.0 * l_ij)
    h2 = l_ki * l_ki - x * x
    if h2 <= 0.0:
        raise DegenerateTriangleError(f"collapsed layout for {lengths}")
    return ((0.0, 0.0), (l_ij, 0.0), (x, math.sqrt(h2)))


def _signed_distance(a, b, p):
    # positive when p lies left of the directed line a->b (= interior for ccw layouts)
    ux, uy = b[0] - a[0], b[1] - a[1]
    return (ux * (p[1] - a[1]) - uy * (p[0] - a[0])) / math.hypot(ux, uy)


def face_circle(tri):
    """Circle orthogonal to the three vertex-circles, in the layout frame.

    The center solves the two radical-axis equations; the squared radius is
    the common power of the center with respect to each vertex-circle.
    """
    p_i, p_j, p_k = layout_triangle(tri)
    r_i, r_j, r_k = tri.radii
    # radical axis of circles (p, r_p), (q, r_q): 2(q - p).x = |q|^2 - |p|^2 - r_q^2 + r_p^2
    a11 = 2.0 * (p_j[0] - p_i[0])
    a12 = 2.0 * (p_j[1] - p_i[1])
    b1 = (p_j[0] ** 2 + p_j[1] ** 2) - (p_i[0] ** 2 + p_i[1] ** 2) - r_j * r_j + r_i * r_i
    a21 = 2.0 * (p_k[0] - p_i[0])
    a22 = 2.0 * (p_k[1] - p_i[1])
    b2 = (p_k[0] ** 2 + p_k[1] ** 2) - (p_i[0] ** 2 + p_i[1] ** 2) - r_k * r_k + r_i * r_i
    det = a11 * a22 - a12 * a21
    if det == 0.0:
        raise DegenerateTriangleError("radical axes are parallel (collinear layout)")
    cx = (b1 * a22 - b2 * a12) / det
    cy = (a11 * b2 - a21 * b1) / det
    rad2 = (cx - p_i[0]) ** 2 + (cy - p_i[1]) ** 2 - r_i * r_i
    if rad2 <= 0.0:
        raise ImaginaryRadicalCircleError(
            f"radical circle has squared radius {rad2}; vertex-circles not separated")
    center = (cx, cy)
    h_ij = _signed_distance(p_i, p_j, center)
    h_jk = _signed_distance(p_j, p_k, center)
    h_ki = _signed_distance(p_k, p_i, center)
    return FaceCircle(center, math.sqrt(rad2), (h_ij, h_jk, h_ki))


def edge_circle_angles(tri):
    """Angles alpha_e = arccos(clamp(h_e / radius)) for the three edges."""
    fc = face_circle(tri)
    h_ij, h_jk, h_ki = fc.signed_edge_distances
    rho = fc.radius
    return EdgeCircleAngles(
        math.acos(_clamp(h_ij / rho)),
        math.acos(_clamp(h_jk / rho)),
        math.acos(_clamp(h_ki / rho)),
    )


def flip_diagonal_length(tri_ijk, tri_ijl):
    """Length of the opposite diagonal of the quad formed across the shared edge.

    Both triangles must list the shared edge first: tri_ijk has lengths
    (l_ij, l_jk, l_ki), tri_ijl has (l_ij, l_jl, l_li), with matching radii
    at i and j. The two triangles are laid out on opposite sides of the
    shared edge; the result is the distance between the apexes. Raises
    NonConvexQuadError when the diagonal misses the open shared edge.
    """
    l_ij = tri_ijk.lengths[0]
    if abs(l_ij - tri_ijl.lengths[0]) > GEOM_EPS * max(1.0, l_ij):
        raise ValueError("shared edge lengths disagree between the flanking triangles")
    for a, b in zip(tri_ijk.radii[:2], tri_ijl.radii[:2]):
        if abs(a - b) > GEOM_EPS * max(1.0, a):
            raise ValueError("shared vertex radii disagree between the flanking triangles")
    _, _, p_k = layout_triangle(tri_ijk)
    l_jl, l_li = tri_ijl.lengths[1], tri_ijl.lengths[2]
    _check_triangle(tri_ijl.lengths)
    xl = (l_ij * l_ij + l_li * l_li - l_jl * l_jl) / (2.0 * l_ij)
    h2 = l_li * l_li - xl * xl
    if h2 <= 0.0:
        raise DegenerateTriangleError(f"collapsed layout for {tri_ijl.lengths}")
    p_l = (xl, -math.sqrt(h2))
    # crossing point of segment k-l with the x-axis must fall inside the open edge
    xk, yk = p_k
    t = yk / (yk - p_l[1])
    x_cross = xk + t * (p_l[0] - xk)
    if not (0.0 < x_cross < l_ij):
        raise NonConvexQuadError(
            f"diagonal crosses the shared edge line at x={x_cross:.6g} outside (0, {l_ij:.6g})")
    return math.hypot(xk - p_l[0], yk - p_l[1])
