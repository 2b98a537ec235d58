"""Problem and result files: strict JSON schemas and round-trip stable writes.

Edge lengths are keyed by canonical "i-j" strings with i < j. Unknown fields
are rejected so typos in scientific inputs fail loudly instead of being
silently ignored. Floats go through the json module's shortest round-trip
formatting, which makes load -> save -> load bit-stable.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .mesh import build_connectivity, edge_key
from .metric import DecoratedMetric

_PROBLEM_KEYS = {"mesh", "metric", "target", "solver"}
_MESH_KEYS = {"vertex_count", "faces"}
_METRIC_KEYS = {"lengths", "radii"}
_TARGET_KEYS = {"alpha", "values", "constant"}
_SOLVER_KEYS = {"tol", "max_iters", "seed", "normalize"}
_RESULT_KEYS = {"u", "mesh", "metric", "curvature", "target", "residual",
                "constraint_residual", "lagrange_mu_check", "case_label",
                "uniqueness", "flip_count", "iterations", "verification"}
_CURVATURE_KEYS = {"K", "R_alpha", "cal_R_alpha"}
_RESULT_TARGET_KEYS = {"alpha", "values", "cal_values"}


@dataclass
class Problem:
    mesh: object
    metric: DecoratedMetric
    alpha: float          # None when the file carries no target
    target_values: object  # np.ndarray or None
    constant: bool
    solver: dict


def _require_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = set(obj) - allowed
    if unknown:
        raise FormatError(f"{where}: unknown fields {sorted(unknown)}")


def _parse_edge_key(text, vertex_count, where):
    parts = text.split("-")
    if len(parts) != 2:
        raise FormatError(f"{where}: edge key '{text}' is not 'i-j'")
    try:
        i, j = int(parts[0]), int(parts[1])
    except ValueError:
        raise FormatError(f"{where}: edge key '{text}' is not 'i-j' with integers") from None
    if not (0 <= i < j < vertex_count):
        raise FormatError(f"{where}: edge key '{text}' must satisfy 0 <= i < j < {vertex_count}")
    return (i, j)


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def load_problem(path):
    """Parse and schema-check a problem file; mesh and metric shapes must agree."""
    data = _load_json(path)
    _require_keys(data, _PROBLEM_KEYS, str(path))
    for key in ("mesh", "metric"):
        if key not in data:
            raise FormatError(f"{path}: missing required field '{key}'")
    _require_keys(data["mesh"], _MESH_KEYS, f"{path}:mesh")
    _require_keys(data["metric"], _METRIC_KEYS, f"{path}:metric")
    try:
        n = int(data["mesh"]["vertex_count"])
        faces = data["mesh"]["faces"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}:mesh: {exc}") from exc
    mesh = build_connectivity(faces, n)

    radii = np.asarray(data["metric"].get("radii", []), dtype=float)
    if radii.shape != (n,):
        raise FormatError(f"{path}:metric: radii must be an array of length {n}")
    if np.any(radii <= 0) or not np.all(np.isfinite(radii)):
        raise FormatError(f"{path}:metric: radii must be positive finite numbers")
    raw_lengths = data["metric"].get("lengths")
    if not isinstance(raw_lengths, dict):
        raise FormatError(f"{path}:metric: lengths must be an object keyed by 'i-j'")
    lengths = {}
    for key, value in raw_lengths.items():
        e = _parse_edge_key(key, n, f"{path}:metric.lengths")
        val = float(value)
        if not (val > 0 and np.isfinite(val)):
            raise FormatError(f"{path}:metric.lengths['{key}']: must be a positive finite number")
        lengths[e] = val
    missing = [e for e in mesh.edges if e not in lengths]
    extra = [e for e in lengths if e not in mesh.edge_faces]
    if missing or extra:
        raise FormatError(
            f"{path}:metric.lengths: missing {missing[:5]}{'...' if len(missing) > 5 else ''}, "
            f"extra {extra[:5]}{'...' if len(extra) > 5 else ''}")
    metric = DecoratedMetric(lengths, radii)

    alpha = None
    target_values = None
    constant = False
    if "target" in data:
        _require_keys(data["target"], _TARGET_KEYS, f"{path}:target")
        tgt = data["target"]
        if "alpha" in tgt:
            alpha = float(tgt["alpha"])
        constant = bool(tgt.get("constant", False))
        if "values" in tgt:
            if constant:
                raise FormatError(f"{path}:target: 'values' and 'constant' are exclusive")
            target_values = np.asarray(tgt["values"], dtype=float)
            if target_values.shape != (n,):
                raise FormatError(f"{path}:target: values must be an array of length {n}")

    solver = data.get("solver", {})
    _require_keys(solver, _SOLVER_KEYS, f"{path}:solver")
    return Problem(mesh, metric, alpha, target_values, constant, dict(solver))


def load_target_values(path, vertex_count):
    """Target file: either a bare array or {"values": [...]}."""
    data = _load_json(path)
    if isinstance(data, dict):
        _require_keys(data, {"values"}, str(path))
        data = data.get("values")
    values = np.asarray(data, dtype=float)
    if values.shape != (vertex_count,):
        raise FormatError(f"{path}: target must hold {vertex_count} values")
    return values


def lengths_to_json(lengths):
    return {f"{i}-{j}": float(l) for (i, j), l in sorted(lengths.items())}


def problem_payload(mesh, metric, alpha=None, target_values=None, constant=False, solver=None):
    payload = {
        "mesh": {"vertex_count": mesh.vertex_count, "faces": [list(f) for f in mesh.faces]},
        "metric": {"lengths": lengths_to_json(metric.lengths),
                   "radii": [float(r) for r in metric.radii]},
    }
    target = {}
    if alpha is not None:
        target["alpha"] = float(alpha)
    if constant:
        target["constant"] = True
    elif target_values is not None:
        target["values"] = [float(v) for v in target_values]
    if target:
        payload["target"] = target
    if solver:
        payload["solver"] = solver
    return payload


def save_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def result_payload(report, target, verification):
    state = report.state
    metric = state.realized_metric()
    from .curvature import curvature_field
    field = curvature_field(state, target.alpha)
    return {
        "u": [float(v) for v in report.u_star],
        "mesh": {"vertex_count": state.mesh.vertex_count,
                 "faces": [list(f) for f in state.mesh.faces]},
        "metric": {"lengths": lengths_to_json(metric.lengths),
                   "radii": [float(r) for r in metric.radii]},
        "curvature": {"K": [float(v) for v in field.K],
                      "R_alpha": [float(v) for v in field.R_alpha],
                      "cal_R_alpha": [float(v) for v in field.cal_R_alpha]},
        "target": {"alpha": float(target.alpha),
                   "values": [float(v) for v in target.values],
                   "cal_values": [float(v) for v in target.cal_values]},
        "residual": float(report.residual),
        "constraint_residual": float(report.constraint_residual),
        "lagrange_mu_check": None if report.lagrange_mu_check != report.lagrange_mu_check
                             else float(report.lagrange_mu_check),
        "case_label": report.case_label,
        "uniqueness": report.uniqueness,
        "flip_count": int(report.flip_count),
        "iterations": int(report.iterations),
        "verification": verification.to_dict(),
    }


def load_result(path):
    """Parse and schema-check a result file into raw verified pieces."""
    data = _load_json(path)
    _require_keys(data, _RESULT_KEYS, str(path))
    for key in ("u", "mesh", "metric", "target"):
        if key not in data:
            raise FormatError(f"{path}: missing required field '{key}'")
    _require_keys(data["mesh"], _MESH_KEYS, f"{path}:mesh")
    _require_keys(data["metric"], _METRIC_KEYS, f"{path}:metric")
    _require_keys(data["target"], _RESULT_TARGET_KEYS, f"{path}:target")
    if "curvature" in data:
        _require_keys(data["curvature"], _CURVATURE_KEYS, f"{path}:curvature")
    n = int(data["mesh"]["vertex_count"])
    mesh = build_connectivity(data["mesh"]["faces"], n)
    radii = np.asarray(data["metric"]["radii"], dtype=float)
    if radii.shape != (n,):
        raise FormatError(f"{path}:metric: radii must be an array of length {n}")
    lengths = {}
    for key, value in data["metric"]["lengths"].items():
        lengths[_parse_edge_key(key, n, f"{path}:metric.lengths")] = float(value)
    if set(lengths) != set(mesh.edges):
        raise FormatError(f"{path}:metric.lengths: edge set disagrees with the face list")
    u = np.asarray(data["u"], dtype=float)
    if u.shape != (n,):
        raise FormatError(f"{path}: u must be an array of length {n}")
    return data, mesh, DecoratedMetric(lengths, radii), u
