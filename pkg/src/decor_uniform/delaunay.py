"""Weighted Delaunay predicate, flip engine, and navigation of the conformal class.

A ConformalState pins a reference decorated metric to the factor ref_u at
which it is realized; the metric at any other factor follows from the
conformal change relative to ref_u. Flips exchange a non-Delaunay edge for
the opposite diagonal of its quad without changing the underlying decorated
surface, so angle defects and total area are preserved.

The Delaunay margin of an edge is cos(a_ij^k) + cos(a_ij^l) computed from
the two flanking face-circles; an edge is weighted Delaunay iff the margin
is >= -DEL_EPS. Flips execute only on strict violations (margin < -DEL_EPS)
to avoid cycling at cell boundaries where both triangulations are legal.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    FlipForbiddenError,
    FlipLimitError,
    InvariantViolationError,
    MetricValidityError,
    NonConvexQuadError,
    StepUnderflowError,
    TriangleInequalityError,
)
from .errors import DegenerateTriangleError, ImaginaryRadicalCircleError
from .geometry import DecoratedTriangle, face_circle, flip_diagonal_length, _clamp
from .mesh import edge_key, flip_connectivity
from .metric import SEP_EPS, apply_conformal, inversive_distance, length_vector, validate

DEL_EPS = 1e-10            # tolerance on the cosine-sum margin
MAX_FLIP_FACTOR = 50       # flip guard: MAX_FLIP_FACTOR * |E| flips per pass
STEP_UNDERFLOW = 1e-14     # minimal substep as a fraction of the segment
WALL_BAND = 2e-10          # flips fire with a margin inside (-WALL_BAND, -DEL_EPS)
WALL_T_TOL = 1e-13         # wall location tolerance along the segment


@dataclass(frozen=True)
class FlipRecord:
    edge: tuple
    margin: float
    new_edge: tuple
    new_length: float


@dataclass(frozen=True)
class StepRecord:
    t: float
    flips: int


@dataclass
class ConformalState:
    """Current triangulation plus the factor at which its metric is realized."""

    mesh: object
    ref_metric: object
    ref_u: np.ndarray
    cur_u: np.ndarray
    flip_records: list = field(default_factory=list)

    @classmethod
    def from_metric(cls, mesh, metric, make_delaunay=True):
        report = validate(metric, mesh)
        if not report.ok:
            raise MetricValidityError("invalid decorated metric:\n" + report.describe(), report=report)
        n = mesh.vertex_count
        state = cls(mesh, metric.copy(), np.zeros(n), np.zeros(n))
        if make_delaunay:
            make_weighted_delaunay(state)
        return state

    def realized_metric(self):
        if np.array_equal(self.ref_u, self.cur_u):
            return self.ref_metric
        return apply_conformal(self.ref_metric, self.cur_u - self.ref_u, self.mesh)

    def copy(self):
        return ConformalState(self.mesh, self.ref_metric.copy(),
                              self.ref_u.copy(), self.cur_u.copy(),
                              list(self.flip_records))

    @property
    def flip_count(self):
        return len(self.flip_records)


def _flank_triangles(mesh, metric, edge):
    i, j, k, l = mesh.oriented_quad(edge)
    lengths = metric.lengths
    r = metric.radii
    tri_k = DecoratedTriangle(
        (lengths[edge_key(i, j)], lengths[edge_key(j, k)], lengths[edge_key(k, i)]),
        (r[i], r[j], r[k]))
    tri_l = DecoratedTriangle(
        (lengths[edge_key(i, j)], lengths[edge_key(j, l)], lengths[edge_key(l, i)]),
        (r[i], r[j], r[l]))
    return (i, j, k, l), tri_k, tri_l


def _edge_margin(mesh, metric, edge):
    _, tri_k, tri_l = _flank_triangles(mesh, metric, edge)
    fc_k = face_circle(tri_k)
    fc_l = face_circle(tri_l)
    return (_clamp(fc_k.signed_edge_distances[0] / fc_k.radius)
            + _clamp(fc_l.signed_edge_distances[0] / fc_l.radius))


def _margin_vector(mesh, metric):
    """Margins of all edges (aligned with mesh.edges) in one vectorized face pass.

    Per face the layout puts i at the origin and j on the x-axis; the radical
    center's x solves the (i, j) radical-axis equation, its y the (i, k) one.
    """
    L = length_vector(metric, mesh)
    r = metric.radii
    fv = mesh.faces_arr
    fe = mesh.face_edge_idx
    c = L[fe[:, 0]]   # l_ij
    a = L[fe[:, 1]]   # l_jk
    b = L[fe[:, 2]]   # l_ki
    r_i = r[fv[:, 0]]
    r_j = r[fv[:, 1]]
    r_k = r[fv[:, 2]]
    x = (c * c + b * b - a * a) / (2.0 * c)
    y2 = b * b - x * x
    if np.any(y2 <= 0.0):
        raise DegenerateTriangleError("degenerate face in margin computation")
    y = np.sqrt(y2)
    cx = (c * c + r_i * r_i - r_j * r_j) / (2.0 * c)
    cy = (b * b + r_i * r_i - r_k * r_k - 2.0 * x * cx) / (2.0 * y)
    rad2 = cx * cx + cy * cy - r_i * r_i
    if np.any(rad2 <= 0.0):
        raise ImaginaryRadicalCircleError("imaginary radical circle in margin computation")
    rho = np.sqrt(rad2)
    h_ij = cy
    h_jk = ((x - c) * cy - y * (cx - c)) / a
    h_ki = (y * (cx - x) - x * (cy - y)) / b
    cos_vals = np.clip(np.stack((h_ij, h_jk, h_ki), axis=1) / rho[:, None], -1.0, 1.0)
    margins = np.zeros(mesh.edge_count)
    np.add.at(margins, fe, cos_vals)
    return margins


def _worst_margin(mesh, metric):
    return float(np.min(_margin_vector(mesh, metric)))


def is_weighted_delaunay(state, edge):
    """Predicate for one edge; returns (is_delaunay, margin)."""
    margin = _edge_margin(state.mesh, state.realized_metric(), edge_key(*edge))
    return margin >= -DEL_EPS, margin


def delaunay_margins(state):
    return dict(zip(state.mesh.edges, _margin_vector(state.mesh, state.realized_metric()).tolist()))


def _reanchor(state):
    if not np.array_equal(state.ref_u, state.cur_u):
        state.ref_metric = apply_conformal(state.ref_metric, state.cur_u - state.ref_u, state.mesh)
        state.ref_u = state.cur_u.copy()


def flip_edge(state, edge, margin=None):
    """Flip one edge of a re-anchored state, updating mesh and metric together.

    The six boundary lengths of the quad are untouched; the new diagonal gets
    the distance between the apexes in the joint layout.
    """
    _reanchor(state)
    edge = edge_key(*edge)
    metric = state.ref_metric
    if margin is None:
        margin = _edge_margin(state.mesh, metric, edge)
    (i, j, k, l), tri_k, tri_l = _flank_triangles(state.mesh, metric, edge)
    new_length = flip_diagonal_length(tri_k, tri_l)
    new_mesh = flip_connectivity(state.mesh, edge)
    new_edge = edge_key(k, l)
    del metric.lengths[edge]
    metric.lengths[new_edge] = new_length
    _check_new_triangles(metric, new_mesh, new_edge)
    state.mesh = new_mesh
    record = FlipRecord(edge, margin, new_edge, new_length)
    state.flip_records.append(record)
    return record


def _check_new_triangles(metric, mesh, new_edge):
    # theory guarantees validity of the two new faces; verify loudly
    inv = inversive_distance(metric.lengths[new_edge],
                             metric.radii[new_edge[0]], metric.radii[new_edge[1]])
    if inv <= 1.0 + SEP_EPS:
        raise InvariantViolationError(
            f"flip produced edge {new_edge} with inversive distance {inv}")
    for f in mesh.edge_faces[new_edge]:
        a, b, c = mesh.faces[f]
        la = metric.lengths[edge_key(a, b)]
        lb = metric.lengths[edge_key(b, c)]
        lc = metric.lengths[edge_key(c, a)]
        if la + lb <= lc or lb + lc <= la or lc + la <= lb:
            raise InvariantViolationError(
                f"flip produced degenerate face {(a, b, c)} with lengths {(la, lb, lc)}")


def make_weighted_delaunay(state, before_flip=None, after_flip=None):
    """Flip until every edge satisfies the weighted Delaunay predicate.

    Violations are processed worst-first. An edge whose opposite diagonal
    already exists is deferred, since flipping another violated edge can
    remove the blocking diagonal; the pass fails loudly only when every
    remaining violation is blocked, which means the weighted Delaunay
    triangulation of this surface is not simplicial and falls outside the
    supported mesh class. Returns the ordered list of FlipRecords.
    """
    _reanchor(state)
    metric = state.ref_metric
    flips = []
    limit = MAX_FLIP_FACTOR * state.mesh.edge_count
    while True:
        margins = _margin_vector(state.mesh, metric)
        violated = sorted((float(margins[n]), state.mesh.edges[n])
                          for n in np.nonzero(margins < -DEL_EPS)[0])
        if not violated:
            return flips
        if len(flips) >= limit:
            raise FlipLimitError(f"exceeded {limit} flips; margins are cycling")
        progressed = False
        for margin, e in violated:
            i, j, k, l = state.mesh.oriented_quad(e)
            if k == l or edge_key(k, l) in state.mesh.edge_faces:
                continue  # blocked: flipping another violation may free this one
            if before_flip is not None:
                before_flip(state, e)
            try:
                record = flip_edge(state, e, margin)
            except NonConvexQuadError as exc:
                raise InvariantViolationError(
                    f"strictly non-Delaunay edge {e} presented a non-convex quad: {exc}") from exc
            flips.append(record)
            if after_flip is not None:
                after_flip(state, record)
            progressed = True
            break
        if not progressed:
            raise FlipForbiddenError(
                f"{len(violated)} non-Delaunay edges all have their opposite diagonal present; "
                "the weighted Delaunay triangulation here is not simplicial")


def _locate_wall(state, u_start, delta, new_u, lo, hi, m_hi, u_hi, realized_hi):
    """Shrink (lo, hi] until the worst margin at hi sits just past the flip threshold.

    The committed state at lo satisfies every margin >= -DEL_EPS while hi
    violates one; safeguarded false position on the worst margin lands hi in
    the band (-WALL_BAND, -DEL_EPS), so the subsequent flip happens at the
    cell wall up to that band. Transporting a triangulation past its wall and
    flipping later yields a different (wrong) metric, hence the root-find.
    """
    m_lo = _worst_margin(state.mesh, state.ref_metric)
    while hi - lo > WALL_T_TOL and m_hi < -WALL_BAND:
        if m_lo > m_hi:
            frac = (m_lo + DEL_EPS) / (m_lo - m_hi)
            frac = min(max(frac, 0.1), 0.9)
        else:
            frac = 0.5
        mid = lo + (hi - lo) * frac
        u_mid = u_start + mid * delta
        try:
            realized_mid = apply_conformal(state.ref_metric, u_mid - state.ref_u, state.mesh)
        except TriangleInequalityError:
            hi, m_hi = mid, -1.0
            continue
        m_mid = _worst_margin(state.mesh, realized_mid)
        if m_mid < -DEL_EPS:
            hi, m_hi, u_hi, realized_hi = mid, m_mid, u_mid, realized_mid
        else:
            lo, m_lo = mid, m_mid
    return hi, u_hi, realized_hi


def evaluate_at(state, new_u, before_flip=None, after_flip=None):
    """Move the state to the factor ``new_u``, flipping as cells are crossed.

    Walks the straight segment from cur_u to new_u with adaptive substeps.
    A substep halves whenever the conformal change degenerates a triangle;
    a substep that ends weighted Delaunay commits directly; otherwise the
    first cell wall inside it is located and the flip happens there. After
    each committed substep the reference metric is re-anchored. Returns the
    list of StepRecords (substep end parameter, flips executed there).
    """
    new_u = np.asarray(new_u, dtype=float)
    if not np.all(np.isfinite(new_u)):
        raise ValueError("target factor contains non-finite entries")
    u_start = state.cur_u.copy()
    delta = new_u - u_start
    log = []
    if not np.any(delta):
        return log
    t = 0.0
    step = 1.0
    while t < 1.0 - 1e-15:
        step = min(step, 1.0 - t)
        while True:
            final = t + step >= 1.0 - 1e-15
            u_trial = new_u if final else u_start + (t + step) * delta
            try:
                realized = apply_conformal(state.ref_metric, u_trial - state.ref_u, state.mesh)
                break
            except TriangleInequalityError:
                step *= 0.5
                if step < STEP_UNDERFLOW:
                    raise StepUnderflowError(
                        f"substep underflow at t={t:.3e} moving |delta|={np.max(np.abs(delta)):.3e}")
        worst = _worst_margin(state.mesh, realized)
        if worst < -DEL_EPS:
            t_end, u_trial, realized = _locate_wall(
                state, u_start, delta, new_u, t, t + step, worst, u_trial, realized)
        else:
            t_end = 1.0 if final else t + step
        state.ref_metric = realized
        state.ref_u = u_trial.copy()
        state.cur_u = u_trial.copy()
        flips = make_weighted_delaunay(state, before_flip=before_flip, after_flip=after_flip)
        log.append(StepRecord(t_end, len(flips)))
        t = t_end
        step = min(step * 2.0, 1.0)
    return log
