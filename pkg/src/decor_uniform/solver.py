"""Prescribed- and constant-curvature solves by damped Newton with line search.

Convex sign cases (alpha * target <= 0 elementwise) minimize the
prescribed-curvature energy with Armijo backtracking on path-integrated
energy differences; accepted iterates decrease the energy monotonically.
The remaining cases run damped Newton on the curvature residual itself
(Armijo on half the squared residual norm) with up to eight random seed
retries, since no convexity or uniqueness guarantee applies there.

When the problem is scale-invariant (alpha * target identically zero) the
iterates are kept on the sum-zero slice and the kernel direction is shifted
out of the Newton system; otherwise the target pins the scale.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .curvature import (
    ALPHA0_GAUSS_BONNET,
    NEG_EULER_NONPOS,
    POS_EULER_NEG_ALPHA_POS,
    TWO_PI,
    UNCLASSIFIED,
    ZERO_EULER_ZERO,
    angle_defects,
    constraint_residual,
    curvature_field,
    make_target,
)
from .delaunay import DEL_EPS, delaunay_margins, evaluate_at
from .energy import grad_prescribed, hessian, path_energy_delta
from .errors import (
    CaseUnsupportedError,
    DelaunayError,
    FlipForbiddenError,
    MaxIterationsError,
    TriangleInequalityError,
)

# a trial factor outside the representable region fails softly and backtracks
_TRIAL_ERRORS = (DelaunayError, TriangleInequalityError, FlipForbiddenError)
from .metric import SEP_EPS, inversive_distance, validate
from .mesh import edge_key

UNIQUE = "Unique"
UNIQUE_UP_TO_SCALING = "UniqueUpToScaling"
NOT_GUARANTEED = "NotGuaranteed"

SUPPORTED_CASES = (NEG_EULER_NONPOS, ZERO_EULER_ZERO, POS_EULER_NEG_ALPHA_POS, ALPHA0_GAUSS_BONNET)

CASE_TABLE_TEXT = (
    "supported sign cases: "
    "(a) chi>0, alpha<0, target>0 everywhere; "
    "(b) chi<0, alpha!=0, target<=0 and not identically zero; "
    "(c) chi=0, alpha!=0, target identically zero; "
    "(d) alpha=0, target<2*pi everywhere, sum(target)=2*pi*chi. "
    "constant curvature additionally requires alpha*chi<=0, or alpha<0 with chi<0."
)


@dataclass
class SolveConfig:
    tol_residual: float = 1e-10      # max-norm of the curvature residual
    max_iters: int = 200
    armijo_c1: float = 1e-4
    backtrack: float = 0.5
    normalization: str = "auto"      # auto | sumzero | none
    seed_u: np.ndarray = None
    rng_seed: int = 0
    max_seed_retries: int = 8
    threads: int = None              # None: DECOR_UNIFORM_THREADS env var, default 1
    force: bool = False


@dataclass
class SolveReport:
    u_star: np.ndarray
    state: object
    converged: bool
    iterations: int
    residual: float
    residual_history: list
    flip_count: int
    case_label: str
    uniqueness: str
    constraint_residual: float
    lagrange_mu_check: float
    message: str = ""


@dataclass
class _Attempt:
    converged: bool
    state: object = None
    iterations: int = 0
    history: list = field(default_factory=list)
    message: str = ""


def _thread_count(config):
    if config.threads is not None:
        return max(1, int(config.threads))
    env = os.environ.get("DECOR_UNIFORM_THREADS")
    return max(1, int(env)) if env else 1


def _uniqueness_label(target):
    prod = target.alpha * target.cal_values
    if np.all(prod == 0):
        return UNIQUE_UP_TO_SCALING
    if target.case_label == POS_EULER_NEG_ALPHA_POS:
        return NOT_GUARANTEED
    if np.all(prod <= 0) and np.any(prod < 0):
        return UNIQUE
    return NOT_GUARANTEED

def _recenter(u):
    return u - np.mean(u)


def _newton_direction(H, g, sumzero):
    n = len(g)
    if sumzero:
        # shift the kernel direction away and solve on the sum-zero slice
        tr = np.trace(H) / n
        Hr = H + (1e-12 * abs(tr)) * np.eye(n) + (abs(tr) / n) * np.ones((n, n))
        d = np.linalg.solve(Hr, -(g - np.mean(g)))
        return d - np.mean(d)
    ridge = 0.0
    tr = abs(np.trace(H)) / n
    for _ in range(4):
        try:
            return np.linalg.solve(H + ridge * np.eye(n), -g)
        except np.linalg.LinAlgError:
            ridge = 1e-12 * tr if ridge == 0.0 else ridge * 1e3
    raise np.linalg.LinAlgError("Newton system unsolvable even with ridge")


def _attempt_energy(state0, target, config, sumzero, seed, progress):
    """Damped Newton minimizing the prescribed-curvature energy (convex cases)."""
    state = state0.copy()
    try:
        if seed is not None:
            evaluate_at(state, np.asarray(seed, dtype=float))
        if sumzero and np.any(state.cur_u):
            evaluate_at(state, _recenter(state.cur_u))
    except _TRIAL_ERRORS as exc:
        return _Attempt(False, state0.copy(), 0, [], f"seed not representable: {exc}")
    history = []
    for it in range(config.max_iters):
        g = grad_prescribed(state, target)
        res = float(np.max(np.abs(g)))
        history.append(res)
        if progress is not None:
            progress(it, res, state.flip_count)
        if res <= config.tol_residual:
            return _Attempt(True, state, it, history)
        H = hessian(state, target).matrix
        d = _newton_direction(H, g, sumzero)
        if float(g @ d) >= 0.0:
            d = -(g - np.mean(g)) if sumzero else -g
        m = float(g @ d)
        step = 1.0
        accepted = False
        while step >= 1e-12:
            u_trial = state.cur_u + step * d
            if sumzero:
                u_trial = _recenter(u_trial)
            try:
                delta_e, trial = path_energy_delta(state, u_trial, target)
            except _TRIAL_ERRORS:
                step *= config.backtrack
                continue
            if delta_e <= config.armijo_c1 * step * m + 1e-12:
                state = trial
                accepted = True
                break
            step *= config.backtrack
        if not accepted:
            return _Attempt(False, state, it, history, "energy line search stalled")
    return _Attempt(False, state, config.max_iters, history, "max iterations exceeded")


def _attempt_residual(state0, target, config, seed, progress):
    """Damped Newton on the residual system g(u) = 0 (non-convex cases)."""
    state = state0.copy()
    try:
        if seed is not None:
            evaluate_at(state, np.asarray(seed, dtype=float))
    except _TRIAL_ERRORS as exc:
        return _Attempt(False, state0.copy(), 0, [], f"seed not representable: {exc}")
    history = []
    g = grad_prescribed(state, target)
    for it in range(config.max_iters):
        res = float(np.max(np.abs(g)))
        history.append(res)
        if progress is not None:
            progress(it, res, state.flip_count)
        if res <= config.tol_residual:
            return _Attempt(True, state, it, history)
        H = hessian(state, target).matrix
        try:
            d = np.linalg.solve(H, -g)
            m = float((H @ g) @ d)
        except np.linalg.LinAlgError:
            d = -(H @ g)
            m = -float(d @ d)
        if m >= 0.0:
            d = -(H @ g)
            m = -float(d @ d)
            if m == 0.0:
                return _Attempt(False, state, it, history, "stationary point of the residual norm")
        f0 = 0.5 * float(g @ g)
        step = 1.0
        accepted = False
        while step >= 1e-12:
            try:
                trial = state.copy()
                evaluate_at(trial, state.cur_u + step * d)
            except _TRIAL_ERRORS:
                step *= config.backtrack
                continue
            g_trial = grad_prescribed(trial, target)
            if 0.5 * float(g_trial @ g_trial) <= f0 + config.armijo_c1 * step * m:
                state = trial
                g = g_trial
                accepted = True
                break
            step *= config.backtrack
        if not accepted:
            return _Attempt(False, state, it, history, "residual line search stalled")
    return _Attempt(False, state, config.max_iters, history, "max iterations exceeded")


def _resolve_sumzero(target, config):
    if config.normalization == "sumzero":
        return True
    if config.normalization == "none":
        return False
    return bool(np.all(target.alpha * target.cal_values == 0))


def solve_prescribed(state0, target, config=None, progress=None):
    """Find the factor whose metric attains the prescribed curvature.

    Raises CaseUnsupportedError for targets outside the sign table (unless
    config.force) and MaxIterationsError when no attempt converges; the
    exception carries the best attempt's report for diagnostics.
    """
    config = config or SolveConfig()
    if target.case_label == UNCLASSIFIED and not config.force:
        raise CaseUnsupportedError(
            f"target not in a supported sign case ({UNCLASSIFIED}). {CASE_TABLE_TEXT}")
    sumzero = _resolve_sumzero(target, config)
    convex = bool(np.all(target.alpha * target.cal_values <= 0))
    use_energy_path = convex and target.case_label != POS_EULER_NEG_ALPHA_POS

    rng = np.random.default_rng(config.rng_seed)
    n = state0.mesh.vertex_count
    seeds = [config.seed_u]
    retries = config.max_seed_retries if not use_energy_path else 3
    for k in range(1, retries):
        seeds.append(rng.normal(0.0, 0.2 + 0.1 * k, n))

    def run(idx_seed):
        idx, seed = idx_seed
        prog = progress if idx == 0 else None
        if use_energy_path:
            return idx, _attempt_energy(state0, target, config, sumzero, seed, prog)
        return idx, _attempt_residual(state0, target, config, seed, prog)

    threads = _thread_count(config)
    results = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for idx, att in pool.map(run, enumerate(seeds)):
                results[idx] = att
    else:
        for item in enumerate(seeds):
            idx, att = run(item)
            results[idx] = att
            if att.converged:
                break

    chosen = None
    for idx in sorted(results):
        if results[idx].converged:
            chosen = results[idx]
            break
    if chosen is None:
        best = min(results.values(), key=lambda a: a.history[-1] if a.history else math.inf)
        report = _build_report(best, target, state0, converged=False)
        raise MaxIterationsError(
            f"no converged attempt out of {len(results)}; best residual "
            f"{report.residual:.3e} ({best.message})", report=report)
    return _build_report(chosen, target, state0, converged=True)


def _build_report(attempt, target, state0, converged):
    state = attempt.state
    chi = state.mesh.chi
    u = state.cur_u.copy()
    res = attempt.history[-1] if attempt.history else math.nan
    cres = constraint_residual(target, u, chi)
    mu = _lagrange_mu(state, target)
    return SolveReport(
        u_star=u,
        state=state,
        converged=converged,
        iterations=attempt.iterations,
        residual=res,
        residual_history=attempt.history,
        flip_count=state.flip_count,
        case_label=target.case_label,
        uniqueness=_uniqueness_label(target),
        constraint_residual=cres,
        lagrange_mu_check=mu,
        message=attempt.message,
    )


def _lagrange_mu(state, target):
    """Least-squares multiplier from calR_alpha = mu * alpha * target; 1/alpha at solutions."""
    if target.alpha == 0.0:
        return math.nan
    cal = curvature_field(state, target.alpha).cal_R_alpha
    rhs = target.alpha * target.cal_values
    denom = float(rhs @ rhs)
    if denom == 0.0:
        return math.nan
    return float((cal @ rhs) / denom)


def solve_constant(state0, alpha, config=None, progress=None):
    """Uniformize to constant curvature of the sign forced by the Euler number.

    For chi = 0 the constant is zero; otherwise the target is sign(chi) * 1
    (for alpha = 0: 2*pi*chi/|V|, the value forced by the total-defect
    identity) and the achieved constant is reported through the solution's
    total-defect identity.
    """
    config = config or SolveConfig()
    chi = state0.mesh.chi
    if not (alpha * chi <= 0 or (alpha < 0 and chi < 0)):
        raise CaseUnsupportedError(
            f"constant curvature unsupported for alpha={alpha}, chi={chi}. {CASE_TABLE_TEXT}")
    n = state0.mesh.vertex_count
    if alpha == 0:
        const = TWO_PI * chi / n
    elif chi == 0:
        const = 0.0
    else:
        const = 1.0 if chi > 0 else -1.0
    r0 = state0.ref_metric.radii * np.exp(-state0.ref_u)
    target = make_target(alpha, np.full(n, const), r0, chi)
    report = solve_prescribed(state0, target, config, progress)
    return report, target


def achieved_constant(report, alpha):
    """Constant implied by the total-defect identity at the final metric."""
    radii = report.state.realized_metric().radii
    chi = report.state.mesh.chi
    return TWO_PI * chi / float(np.sum(radii ** alpha))


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float


@dataclass
class VerificationRecord:
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "passed": bool(self.passed),
            "checks": [
                {"name": c.name, "passed": bool(c.passed), "value": float(c.value),
                 "threshold": float(c.threshold)}
                for c in self.checks
            ],
        }

    def describe(self):
        return "\n".join(
            f"[{'ok' if c.passed else 'FAIL'}] {c.name}: value={c.value:.3e} threshold={c.threshold:.3e}"
            for c in self.checks)


def verification_record(mesh, metric_obj, u, target, tol_residual=1e-8):
    """Recompute every solution property from raw mesh/metric/factor data.

    Independent of solver internals: angle defects come from a fresh pass
    over the faces, both residual parametrizations are checked (the factor
    form ties the stored u to the metric), plus the total-defect identity,
    separation, triangle inequalities, and Delaunay margins.
    """
    from .delaunay import ConformalState, _edge_margin

    u = np.asarray(u, dtype=float)
    chi = mesh.chi
    checks = []

    report = validate(metric_obj, mesh)
    checks.append(CheckResult("triangle_inequalities", not report.triangle_violations,
                              float(len(report.triangle_violations)), 0.0))
    min_i = min(inversive_distance(l, metric_obj.radii[i], metric_obj.radii[j])
                for (i, j), l in metric_obj.lengths.items())
    checks.append(CheckResult("separation_min_inversive", min_i > 1.0 + SEP_EPS, min_i, 1.0 + SEP_EPS))

    margins = [_edge_margin(mesh, metric_obj, e) for e in mesh.edges]
    min_margin = min(margins)
    checks.append(CheckResult("delaunay_min_margin", min_margin >= -DEL_EPS, min_margin, -DEL_EPS))

    from .curvature import vertex_cone_angles
    K = TWO_PI - vertex_cone_angles(mesh, metric_obj)
    gb = abs(float(np.sum(K)) - TWO_PI * chi)
    checks.append(CheckResult("gauss_bonnet", gb < 1e-10, gb, 1e-10))

    res_r = float(np.max(np.abs(K - target.values * metric_obj.radii ** target.alpha)))
    checks.append(CheckResult("residual_radius_form", res_r <= tol_residual, res_r, tol_residual))
    res_cal = float(np.max(np.abs(K - target.cal_values * np.exp(target.alpha * u))))
    checks.append(CheckResult("residual_factor_form", res_cal <= tol_residual, res_cal, tol_residual))

    if target.alpha != 0.0 and chi != 0:
        rel = abs(constraint_residual(target, u, chi)) / (TWO_PI * abs(chi))
        checks.append(CheckResult("constraint_identity", rel < 1e-8, rel, 1e-8))
    return VerificationRecord(checks)


def verify_solution(report, target, tol_residual=1e-8):
    """Re-derive all checks from the report's final state."""
    state = report.state
    return verification_record(state.mesh, state.realized_metric(), report.u_star,
                               target, tol_residual=tol_residual)
