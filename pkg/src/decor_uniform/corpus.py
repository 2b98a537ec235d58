"""Reference surfaces used by the test suite, the scripts, and the demos.

All metrics here are valid decorated metrics (strict triangle inequalities,
separated vertex-circles) and, except for the long-edge bipyramid, already
weighted Delaunay in their listed triangulation.
"""

import numpy as np

from .mesh import build_connectivity, edge_key
from .metric import DecoratedMetric


def _uniform_metric(mesh, length, radius):
    lengths = {e: float(length) for e in mesh.edges}
    return DecoratedMetric(lengths, np.full(mesh.vertex_count, float(radius)))


def tetrahedron_mesh():
    """Boundary of a tetrahedron: the minimal sphere, chi = 2."""
    faces = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]
    return build_connectivity(faces, 4)


def tetrahedron_problem(length=3.0, radius=1.0):
    mesh = tetrahedron_mesh()
    return mesh, _uniform_metric(mesh, length, radius)


def torus_mesh(n=3):
    """n x n grid torus, each square split into two triangles; chi = 0."""
    def v(i, j):
        return (i % n) * n + (j % n)
    faces = []
    for i in range(n):
        for j in range(n):
            faces.append((v(i, j), v(i + 1, j), v(i + 1, j + 1)))
            faces.append((v(i, j), v(i + 1, j + 1), v(i, j + 1)))
    return build_connectivity(faces, n * n)


def torus_problem(length=1.0, radius=0.3, n=3):
    """Flat equilateral torus: six equilateral corners per vertex, K = 0."""
    mesh = torus_mesh(n)
    return mesh, _uniform_metric(mesh, length, radius)


def genus2_mesh():
    """Genus-2 surface glued from two 9-vertex tori minus one face each; chi = -2.

    The removed faces' boundary triangles are identified vertexwise, leaving
    15 vertices, 51 edges, and 34 faces.
    """
    def v(i, j):
        return (i % 3) * 3 + (j % 3)
    torus_faces = []
    for i in range(3):
        for j in range(3):
            torus_faces.append((v(i, j), v(i + 1, j), v(i + 1, j + 1)))
            torus_faces.append((v(i, j), v(i + 1, j + 1), v(i, j + 1)))
    removed = torus_faces[0]  # (0, 3, 4)
    faces_a = [f for f in torus_faces if f != removed]
    glue = {9 + removed[0]: removed[0], 9 + removed[1]: removed[1], 9 + removed[2]: removed[2]}
    # reverse the second torus's orientation so the glued surface stays orientable
    relabel = {}
    next_id = 9
    faces_b = []
    for f in torus_faces:
        if f == removed:
            continue
        mapped = []
        for w in f:
            old = 9 + w
            if old in glue:
                mapped.append(glue[old])
            else:
                if old not in relabel:
                    relabel[old] = next_id
                    next_id += 1
                mapped.append(relabel[old])
        faces_b.append((mapped[0], mapped[2], mapped[1]))
    return build_connectivity(faces_a + faces_b, next_id)


def genus2_problem(length=1.0, radius=0.3):
    """Equilateral metric on the glued surface; defects -4*pi/3 at the 3 seam vertices."""
    mesh = genus2_mesh()
    return mesh, _uniform_metric(mesh, length, radius)


def bipyramid_mesh():
    """Triangle double pyramid: 5 vertices, 6 faces, chi = 2."""
    faces = [(0, 1, 3), (1, 2, 3), (2, 0, 3), (1, 0, 4), (2, 1, 4), (0, 2, 4)]
    return build_connectivity(faces, 5)


def bipyramid_long_edge_problem(radius=0.2):
    """Bipyramid where the stretched equator edge (0,1) is the only non-Delaunay edge.

    The flanking triangles (1, 1, 1.9) are obtuse enough that flipping (0,1)
    to the apex diagonal (3,4) restores weighted Delaunayness in one move.
    """
    mesh = bipyramid_mesh()
    lengths = {e: 1.0 for e in mesh.edges}
    lengths[edge_key(0, 1)] = 1.9
    lengths[edge_key(0, 2)] = 1.2
    lengths[edge_key(1, 2)] = 1.2
    return mesh, DecoratedMetric(lengths, np.full(5, float(radius)))


def bipyramid_square_problem(radius=0.3):
    """Bipyramid whose equator edge (0,1) sits exactly on the Delaunay boundary.

    Faces (0,1,3) and (1,0,4) are right isosceles halves of a unit square,
    so the margin on the shared diagonal is exactly zero.
    """
    mesh = bipyramid_mesh()
    lengths = {e: 1.0 for e in mesh.edges}
    lengths[edge_key(0, 1)] = float(np.sqrt(2.0))
    return mesh, DecoratedMetric(lengths, np.full(5, float(radius)))


SURFACES = {
    "tetrahedron": tetrahedron_problem,
    "torus": torus_problem,
    "genus2": genus2_problem,
}
