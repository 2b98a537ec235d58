"""Connectivity of closed oriented triangulated surfaces, independent of geometry.

Vertices are dense integer indices 0..n-1. Edges are canonicalized as
(min, max) pairs so they stay stable keys across flips. Faces are stored
with a globally consistent orientation; flips preserve it.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryEdgeError,
    DisconnectedError,
    FlipForbiddenError,
    InvalidFaceError,
    NonManifoldError,
    NonOrientableError,
)


def edge_key(i, j):
    """Canonical undirected edge key."""
    return (i, j) if i < j else (j, i)


class MeshConnectivity:
    """Closed oriented triangulated surface.

    Built through :func:`build_connectivity`; treat instances as immutable.
    Flips produce a fresh object so states sharing a mesh stay consistent.
    """

    __slots__ = ("vertex_count", "faces", "edge_faces", "directed", "vertex_corners",
                 "edges", "edge_index", "edges_arr", "faces_arr", "face_edge_idx")

    def __init__(self, vertex_count, faces, edge_faces, directed, vertex_corners):
        self.vertex_count = vertex_count
        self.faces = faces
        self.edge_faces = edge_faces          # (i,j) i<j -> (face_a, face_b)
        self.directed = directed              # (a,b) directed -> face index
        self.vertex_corners = vertex_corners  # vertex -> [(face, corner), ...]
        self.edges = sorted(edge_faces)
        self.edge_index = {e: n for n, e in enumerate(self.edges)}
        # index arrays for vectorized passes over faces and edges
        self.edges_arr = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.faces_arr = np.asarray(faces, dtype=np.int64)
        idx = self.edge_index
        self.face_edge_idx = np.asarray(
            [(idx[edge_key(i, j)], idx[edge_key(j, k)], idx[edge_key(k, i)]) for i, j, k in faces],
            dtype=np.int64)

    @property
    def face_count(self):
        return len(self.faces)

    @property
    def edge_count(self):
        return len(self.edge_faces)

    @property
    def chi(self):
        return self.vertex_count - self.edge_count + self.face_count

    def opposite_vertices(self, edge):
        """Apex vertices of the two faces flanking ``edge``."""
        i, j = edge
        out = []
        for f in self.edge_faces[edge]:
            a, b, c = self.faces[f]
            out.append(a if a not in (i, j) else (b if b not in (i, j) else c))
        return tuple(out)

    def oriented_quad(self, edge):
        """Return (i, j, k, l): face (i,j,k) carries the directed edge i->j, (j,i,l) the reverse."""
        i, j = edge
        fk = self.directed[(i, j)]
        fl = self.directed[(j, i)]
        k = next(v for v in self.faces[fk] if v not in (i, j))
        l = next(v for v in self.faces[fl] if v not in (i, j))
        return i, j, k, l

    def canonical_faces(self):
        """Faces as a set, each rotated so its smallest vertex comes first."""
        out = set()
        for a, b, c in self.faces:
            m = min(a, b, c)
            if a == m:
                out.add((a, b, c))
            elif b == m:
                out.add((b, c, a))
            else:
                out.add((c, a, b))
        return frozenset(out)

    def __eq__(self, other):
        if not isinstance(other, MeshConnectivity):
            return NotImplemented
        return (self.vertex_count == other.vertex_count
                and self.canonical_faces() == other.canonical_faces())

    def __hash__(self):
        return hash((self.vertex_count, self.canonical_faces()))

    def __repr__(self):
        return (f"MeshConnectivity(V={self.vertex_count}, E={self.edge_count}, "
                f"F={self.face_count}, chi={self.chi})")


@dataclass(frozen=True)
class EulerData:
    chi: int

    @property
    def genus(self):
        return (2 - self.chi) // 2

    def __post_init__(self):
        if self.chi % 2 != 0 or self.chi > 2:
            raise InvalidFaceError(f"Euler characteristic {self.chi} impossible for a closed orientable surface")


def _orient_faces(faces, edge_to_faces):
    """Propagate a consistent orientation from face 0, reversing faces as needed."""
    oriented = [None] * len(faces)
    oriented[0] = tuple(faces[0])
    stack = [0]
    seen = {0}
    # adjacency through shared undirected edges
    while stack:
        f = stack.pop()
        a, b, c = oriented[f]
        for u, v in ((a, b), (b, c), (c, a)):
            key = edge_key(u, v)
            for g in edge_to_faces[key]:
                if g == f:
                    continue
                ga, gb, gc = faces[g] if oriented[g] is None else oriented[g]
                # neighbor is consistent iff it traverses the shared edge as v->u
                directed = {(ga, gb), (gb, gc), (gc, ga)}
                if (u, v) in directed:
                    fixed = (ga, gc, gb)
                elif (v, u) in directed:
                    fixed = (ga, gb, gc)
                else:  # pragma: no cover - adjacency table guarantees membership
                    raise NonManifoldError("edge table inconsistent with face list")
                if oriented[g] is None:
                    oriented[g] = fixed
                    seen.add(g)
                    stack.append(g)
                elif oriented[g] != fixed:
                    raise NonOrientableError(f"faces {f} and {g} demand conflicting orientations")
    if len(seen) != len(faces):
        raise DisconnectedError(f"face adjacency graph has {len(faces) - len(seen)} unreachable faces")
    return oriented


def build_connectivity(faces, vertex_count):
    """Build validated adjacency for a closed, connected, orientable triangulation.

    Raises the specific mesh error when an invariant fails: boundary edges,
    non-manifold edges, inconsistent orientability, disconnectedness, or a
    pair of faces sharing more than one edge.
    """
    faces = [tuple(int(v) for v in f) for f in faces]
    if vertex_count <= 0:
        raise InvalidFaceError("vertex_count must be positive")
    for idx, f in enumerate(faces):
        if len(f) != 3 or len(set(f)) != 3:
            raise InvalidFaceError(f"face {idx} = {f} must have 3 distinct vertices")
        if any(v < 0 or v >= vertex_count for v in f):
            raise InvalidFaceError(f"face {idx} = {f} has a vertex index out of range")

    edge_to_faces = {}
    for idx, (a, b, c) in enumerate(faces):
        for u, v in ((a, b), (b, c), (c, a)):
            edge_to_faces.setdefault(edge_key(u, v), []).append(idx)

    for key, fs in edge_to_faces.items():
        if len(fs) == 1:
            raise BoundaryEdgeError(f"edge {key} has a single incident face {fs[0]}")
        if len(fs) > 2:
            raise NonManifoldError(f"edge {key} has {len(fs)} incident faces")
        if fs[0] == fs[1]:
            raise NonManifoldError(f"edge {key} appears twice in face {fs[0]}")

    # two faces may share at most one edge
    pair_seen = {}
    for key, (f1, f2) in edge_to_faces.items():
        pair = (f1, f2) if f1 < f2 else (f2, f1)
        if pair in pair_seen:
            raise NonManifoldError(f"faces {pair} share edges {pair_seen[pair]} and {key}")
        pair_seen[pair] = key

    oriented = _orient_faces(faces, edge_to_faces)

    directed = {}
    for idx, (a, b, c) in enumerate(oriented):
        for u, v in ((a, b), (b, c), (c, a)):
            if (u, v) in directed:
                raise NonOrientableError(f"directed edge {(u, v)} used by faces {directed[(u, v)]} and {idx}")
            directed[(u, v)] = idx

    used = set()
    for f in oriented:
        used.update(f)
    if len(used) != vertex_count:
        raise DisconnectedError(f"{vertex_count - len(used)} vertices belong to no face")

    vertex_corners = [[] for _ in range(vertex_count)]
    for idx, f in enumerate(oriented):
        for corner, v in enumerate(f):
            vertex_corners[v].append((idx, corner))

    return MeshConnectivity(vertex_count, oriented, edge_to_faces, directed, vertex_corners)


def euler_characteristic(mesh):
    return EulerData(mesh.chi)


def flip_connectivity(mesh, edge):
    """Replace the two faces flanking ``edge`` by the faces on the opposite diagonal.

    The quad's four vertices are distinct by the mesh invariants; the flip is
    refused when the opposite diagonal is already an edge.
    """
    edge = edge_key(*edge)
    if edge not in mesh.edge_faces:
        raise FlipForbiddenError(f"{edge} is not an edge of the mesh")
    i, j, k, l = mesh.oriented_quad(edge)
    if k == l or edge_key(k, l) in mesh.edge_faces:
        raise FlipForbiddenError(f"diagonal {edge_key(k, l)} of quad around {edge} already present")
    fk = mesh.directed[(i, j)]
    fl = mesh.directed[(j, i)]
    new_faces = list(mesh.faces)
    new_faces[fk] = (l, j, k)
    new_faces[fl] = (k, i, l)
    return build_connectivity(new_faces, mesh.vertex_count)
