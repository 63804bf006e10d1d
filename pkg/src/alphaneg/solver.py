"""Measure computations over the PPT set.

Three routes, one value scale (bits, log base 2):

* order 1 is closed form: log2 of the trace norm of the partial transpose;
* orders strictly between 1 and infinity run projected gradient descent on
  the convex objective f(sigma) = ||sigma^p X sigma^p||_alpha^alpha with
  p = (1-alpha)/(2 alpha) and X the partial transpose of the input state,
  keeping iterates inside the PPT set by Dykstra projection and inside the
  faithful interior by a decaying mixing schedule with the maximally mixed
  state.  The reported value is (1/alpha) log2 of the best objective seen,
  which is always a rigorous upper bound because every evaluation point is a
  genuine interior PPT state;
* order infinity is a semidefinite program, min Tr[S] subject to
  T_B(S) - T_B(rho) >= 0, T_B(S) + T_B(rho) >= 0, S >= 0, solved by a
  self-contained log-det barrier method with damped Newton centering.

Each result carries the sanity bracket [closed-form lower endpoint, SDP upper
endpoint]; a converged value must sit inside it up to ``value_tol``.

The optimizer state sigma* = |X| / ||X||_1 is feasible exactly when the
partial transpose of |X| is PSD, and in that case it is optimal for every
order (its order-infinity value equals the order-1 value, and the family is
monotone in the order).  The gradient loop therefore tries it as a starting
point next to the maximally mixed state; for two-qubit, pure and Werner
inputs this turns the search into a stationarity check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .divergence import check_alpha, log_negativity
from .errors import (
    InvalidStateError,
    NotConvergedError,
    NotPositiveDefiniteError,
    ZeroOperatorError,
)
from .linalg import (
    BipartitionDims,
    check_hermitian,
    frob_norm,
    herm_part,
    op_norm,
    partial_transpose,
)
from .pptgeom import DykstraConfig, project_free_set, regularize
from .states import BipartiteState, as_state, ppt_membership

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ArmijoParams:
    initial_step: float = 1.0
    shrink: float = 0.5
    decrease: float = 1e-4

    def __post_init__(self):
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if self.initial_step <= 0 or self.decrease <= 0:
            raise ValueError("step and decrease constants must be positive")


@dataclass(frozen=True)
class EpsSchedule:
    """Interior mixing weights: eps_k = max(floor, initial * decay**k)."""

    initial: float = 1e-4
    decay: float = 0.7
    floor: float = 1e-10

    def __post_init__(self):
        if not 0 < self.floor <= self.initial < 1:
            raise ValueError("schedule must satisfy 0 < floor <= initial < 1")
        if not 0 < self.decay < 1:
            raise ValueError("decay must lie in (0, 1)")


@dataclass(frozen=True)
class BarrierParams:
    t_init: float = 1.0
    growth: float = 10.0
    newton_tol: float = 1e-9
    max_newton: int = 60

    def __post_init__(self):
        if self.growth <= 1:
            raise ValueError("barrier growth factor must exceed 1")
        if self.t_init <= 0 or self.newton_tol <= 0:
            raise ValueError("barrier parameters must be positive")


@dataclass(frozen=True)
class SolverConfig:
    value_tol: float = 1e-4
    grad_tol: float = 1e-6
    max_iter: int = 5000
    armijo: ArmijoParams = field(default_factory=ArmijoParams)
    eps_schedule: EpsSchedule = field(default_factory=EpsSchedule)
    seed: int = 0
    barrier: BarrierParams = field(default_factory=BarrierParams)
    projection: DykstraConfig = field(
        default_factory=lambda: DykstraConfig(max_cycles=1500, residual_tol=1e-9)
    )
    with_bracket: bool = True
    restarts: int = 20

    def __post_init__(self):
        if self.value_tol <= 0 or self.grad_tol <= 0:
            raise ValueError("tolerances must be positive")


DEFAULT_CONFIG = SolverConfig()


@dataclass
class MeasureResult:
    value_bits: float
    alpha: float
    certificate_sigma: BipartiteState | None
    iterations: int
    converged: bool
    bracket: tuple[float, float]
    diagnostic: str = ""


# ---------------------------------------------------------------------------
# objective


def _log_objective(
    X: np.ndarray, sigma: np.ndarray, alpha: float, want_grad: bool = True
):
    """Natural log of f(sigma) = ||sigma^p X sigma^p||_alpha^alpha and the
    gradient of that log, both computed in scaled form so large orders cannot
    overflow."""
    w, v = np.linalg.eigh(sigma)
    if float(w[0]) <= 0.0:
        raise NotPositiveDefiniteError(
            f"objective needs positive definite sigma, min eigenvalue {w[0]:.3e}"
        )
    p = (1.0 - alpha) / (2.0 * alpha)
    sp = w**p
    half = (v * sp) @ v.conj().T
    inner = herm_part(half @ X @ half)
    mu, u = np.linalg.eigh(inner)
    mags = np.abs(mu)
    scale = float(mags.max())
    if scale == 0.0:
        return (-math.inf, np.zeros_like(sigma)) if want_grad else -math.inf
    ratios = mags / scale
    powsum = float(np.sum(ratios**alpha))
    log_f = alpha * math.log(scale) + math.log(powsum)
    if not want_grad:
        return log_f
    # d(log f) via the chain rule: outer derivative of the Schatten power sum,
    # then the adjoint Frechet derivative of sigma -> sigma^p on both sides
    outer = (alpha / scale) * np.sign(mu) * ratios ** (alpha - 1.0) / powsum
    w_outer = (u * outer) @ u.conj().T
    weight = X @ half @ w_outer + w_outer @ half @ X
    from .linalg import _power_gradient_from_eig

    grad = _power_gradient_from_eig(w, v, p, weight)
    return log_f, grad


def objective_and_gradient(
    rhoT: np.ndarray, sigma: np.ndarray, alpha: float
) -> tuple[float, np.ndarray]:
    """Value and Hermitian gradient of f(sigma) = ||sigma^p X sigma^p||_alpha^alpha.

    ``rhoT`` is the (Hermitian, nonzero) partial transpose of the state under
    study and sigma must be positive definite; alpha lies strictly between 1
    and infinity.
    """
    alpha = check_alpha(alpha)
    if alpha == 1 or math.isinf(alpha):
        raise ValueError("objective is defined for orders strictly between 1 and inf")
    X = check_hermitian(rhoT)
    if not np.any(X):
        raise ZeroOperatorError("partial transpose argument is zero")
    sigma = check_hermitian(sigma)
    log_f, grad_log = _log_objective(X, sigma, alpha, want_grad=True)
    f = math.exp(log_f)
    return f, grad_log * f


# ---------------------------------------------------------------------------
# projected gradient core


def _start_candidates(X: np.ndarray, apply_map, D: int) -> list[np.ndarray]:
    """Feasible starting points: the maximally mixed state, plus |X|/||X||_1
    whenever it lies in the free set (exact optimizer for the collapse class)."""
    candidates = [np.eye(D, dtype=complex) / D]
    w, v = np.linalg.eigh(X)
    absx = (v * np.abs(w)) @ v.conj().T
    n1 = float(np.abs(w).sum())
    if n1 > 0:
        cand = herm_part(absx / n1)
        if float(np.linalg.eigvalsh(apply_map(cand))[0]) >= -1e-11:
            candidates.append(cand)
    return candidates


def _pg_core(
    X: np.ndarray,
    apply_map: Callable[[np.ndarray], np.ndarray],
    D: int,
    alpha: float,
    cfg: SolverConfig,
):
    """Projected gradient descent of f over the free set.

    Iterates are kept essentially feasible by Dykstra projection; every point
    the objective is evaluated at is additionally mixed with the maximally
    mixed state by a weight large enough to swallow both the smoothing
    schedule and the residual infeasibility of the iterate, so each evaluated
    point is a strictly interior free state and the reported value is a
    rigorous upper bound on the infimum.

    Returns (value_bits, best interior sigma, iterations, converged).
    """
    eye_over_d = np.eye(D, dtype=complex) / D
    sched = cfg.eps_schedule

    def defect_of(m: np.ndarray) -> float:
        d1 = -float(np.linalg.eigvalsh(m)[0])
        d2 = -float(np.linalg.eigvalsh(herm_part(apply_map(m)))[0])
        return max(0.0, d1, d2)

    def reg(s: np.ndarray, e: float, defect: float) -> np.ndarray:
        e_eff = min(0.5, max(e, 2.0 * D * defect))
        return (1.0 - e_eff) * s + e_eff * eye_over_d

    def project(m: np.ndarray) -> np.ndarray:
        # a stalled projection is still near-feasible; the defect-aware
        # regularization absorbs the residual
        try:
            return project_free_set(m, apply_map, cfg.projection)
        except NotConvergedError as exc:
            return exc.iterate

    def eval_log(s: np.ndarray, e: float, defect: float, want_grad: bool):
        try:
            return _log_objective(X, reg(s, e, defect), alpha, want_grad=want_grad)
        except NotPositiveDefiniteError:
            return (math.inf, None) if want_grad else math.inf

    eps = sched.initial
    best = None
    sigma = None
    sigma_defect = 0.0
    for cand in _start_candidates(X, apply_map, D):
        cand_defect = defect_of(cand)
        val = eval_log(cand, eps, cand_defect, want_grad=False)
        if best is None or val < best[0]:
            best = (val, reg(cand, eps, cand_defect))
            sigma, sigma_defect = cand, cand_defect

    best_log, best_point = best
    streak = 0
    prev_log = math.inf
    converged = False
    iters = 0
    prev_sigma = None
    prev_grad = None
    step_scale = None

    for iters in range(1, cfg.max_iter + 1):
        log_f, grad = eval_log(sigma, eps, sigma_defect, want_grad=True)
        if grad is None:
            break  # evaluation point degenerate beyond repair
        if log_f < best_log:
            best_log, best_point = log_f, reg(sigma, eps, sigma_defect)

        # spectral (Barzilai-Borwein) step length, safeguarded; falls back to
        # a gradient-normalized step on the first iteration or bad curvature
        fallback = cfg.armijo.initial_step / (1.0 + frob_norm(grad))
        if prev_sigma is not None:
            s_diff = sigma - prev_sigma
            y_diff = grad - prev_grad
            sy = float(np.real(np.sum(s_diff.conj() * y_diff)))
            if sy > 1e-30:
                ss = float(np.real(np.sum(s_diff.conj() * s_diff)))
                step_scale = min(max(ss / sy, 1e-10 * fallback), 1e10 * fallback)
            else:
                step_scale = 1e4 * fallback
        else:
            step_scale = fallback
        prev_sigma, prev_grad = sigma, grad

        target = project(sigma - step_scale * grad)
        target_defect = defect_of(target)
        direction = target - sigma
        dir_norm = frob_norm(direction)
        # min-eigenvalue is concave, so points on the segment are no worse
        segment_defect = max(sigma_defect, target_defect)

        at_floor = eps <= sched.floor * (1 + 1e-12)
        if dir_norm / max(step_scale, 1e-30) <= cfg.grad_tol:
            if at_floor:
                converged = True
                break
            eps = sched.floor  # stationary at this smoothing level; finish at the floor
            streak = 0
            prev_log = math.inf
            continue

        slope = float(np.real(np.sum(grad.conj() * direction)))
        t = 1.0
        accepted = False
        while t > 1e-13:
            cand = sigma + t * direction
            cand_log = eval_log(cand, eps, segment_defect, want_grad=False)
            if cand_log <= log_f + cfg.armijo.decrease * t * slope:
                accepted = True
                break
            t *= cfg.armijo.shrink
        if not accepted:
            if at_floor:
                converged = True  # no descent direction at numerical precision
                break
            eps = sched.floor
            streak = 0
            prev_log = math.inf
            continue

        sigma, sigma_defect = cand, segment_defect
        if cand_log < best_log:
            best_log, best_point = cand_log, reg(cand, eps, segment_defect)

        if abs(prev_log - cand_log) <= 1e-9 * max(1.0, abs(cand_log)):
            streak += 1
            if streak >= 25 and at_floor:
                converged = True
                break
        else:
            streak = 0
        prev_log = cand_log
        eps = max(sched.floor, eps * sched.decay)

    value_bits = best_log / (alpha * LN2)
    return value_bits, best_point, iters, converged


# ---------------------------------------------------------------------------
# barrier SDP core


def hermitian_basis(D: int) -> np.ndarray:
    """Orthonormal basis of the real space of DxD Hermitian matrices."""
    basis = np.zeros((D * D, D, D), dtype=complex)
    idx = 0
    for i in range(D):
        basis[idx, i, i] = 1.0
        idx += 1
    r = 1.0 / math.sqrt(2.0)
    for i in range(D):
        for j in range(i + 1, D):
            basis[idx, i, j] = r
            basis[idx, j, i] = r
            idx += 1
            basis[idx, i, j] = 1j * r
            basis[idx, j, i] = -1j * r
            idx += 1
    return basis


def _chol_logdet(A: np.ndarray):
    """(True, logdet) when A is positive definite, else (False, -inf)."""
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        return False, -math.inf
    return True, 2.0 * float(np.sum(np.log(np.diag(L).real)))


def _kappa_core(
    X: np.ndarray,
    apply_map: Callable[[np.ndarray], np.ndarray],
    cfg: SolverConfig,
):
    """Barrier method for min Tr[S] s.t. map(S) +- X >= 0, S >= 0.

    ``apply_map`` must be a trace-preserving Hermiticity-preserving isometric
    involution, which makes it self-adjoint and unital; the identity start
    c*I is then strictly feasible for c above the operator norm of X.
    """
    D = X.shape[0]
    n = D * D
    basis = hermitian_basis(D)
    mapped_basis = np.stack([apply_map(basis[a]) for a in range(n)])
    eye = np.eye(D, dtype=complex)

    S = (2.0 * op_norm(X) + 0.5) * eye
    t = cfg.barrier.t_init
    nu = 3.0 * D  # total barrier parameter of the three log-det blocks
    total_newton = 0
    converged = True

    def blocks(Smat):
        m = apply_map(Smat)
        return herm_part(m - X), herm_part(m + X), Smat

    def phi(Smat, tval):
        total = tval * float(np.trace(Smat).real)
        for blk in blocks(Smat):
            ok, ld = _chol_logdet(blk)
            if not ok:
                return math.inf
            total -= ld
        return total

    max_stages = 400
    for _ in range(max_stages):
        for _ in range(cfg.barrier.max_newton):
            A1, A2, A3 = blocks(S)
            inv1 = np.linalg.inv(A1)
            inv2 = np.linalg.inv(A2)
            inv3 = np.linalg.inv(A3)
            grad_mat = t * eye - apply_map(inv1 + inv2) - inv3
            g = np.einsum("aij,ji->a", basis, grad_mat).real

            c1 = np.einsum("ab,nbc,cd->nad", inv1, mapped_basis, inv1, optimize=True)
            c2 = np.einsum("ab,nbc,cd->nad", inv2, mapped_basis, inv2, optimize=True)
            c3 = np.einsum("ab,nbc,cd->nad", inv3, basis, inv3, optimize=True)
            H = (
                np.einsum("nab,mba->nm", mapped_basis, c1, optimize=True)
                + np.einsum("nab,mba->nm", mapped_basis, c2, optimize=True)
                + np.einsum("nab,mba->nm", basis, c3, optimize=True)
            ).real
            try:
                delta = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                delta = np.linalg.lstsq(H, -g, rcond=None)[0]
            lam2 = float(-g @ delta)
            total_newton += 1
            if lam2 / 2.0 <= 1e-11:
                break
            step_mat = np.einsum("a,aij->ij", delta, basis)
            if lam2 <= 0.3:
                # pure Newton phase: feasibility backtrack only, the quadratic
                # model is trusted and phi comparisons would drown in rounding
                step = 1.0
                while step > 1e-14:
                    trial = S + step * step_mat
                    if all(_chol_logdet(b)[0] for b in blocks(trial)):
                        break
                    step *= 0.5
                S = herm_part(S + step * step_mat)
            else:
                base = phi(S, t)
                step = 1.0
                accepted = False
                while step > 1e-14:
                    trial = herm_part(S + step * step_mat)
                    if phi(trial, t) <= base - 0.25 * step * lam2:
                        accepted = True
                        break
                    step *= 0.5
                if not accepted:
                    break
                S = trial
        if nu / t < cfg.barrier.newton_tol:
            break
        t *= cfg.barrier.growth
    else:
        converged = False

    return float(np.trace(S).real), S, total_newton, converged


# ---------------------------------------------------------------------------
# public measures


def _as_certificate(matrix: np.ndarray, dims: BipartitionDims) -> BipartiteState:
    m = herm_part(matrix)
    m = m / np.trace(m).real
    return BipartiteState(dims, m)


def e_kappa(rho, cfg: SolverConfig = DEFAULT_CONFIG) -> MeasureResult:
    """Order-infinity endpoint via the semidefinite program."""
    rho = as_state(rho)
    X = partial_transpose(rho.matrix, rho.dims, "B")
    trace_val, S, iters, ok = _kappa_core(X, lambda m: partial_transpose(m, rho.dims, "B"), cfg)
    value = math.log2(trace_val)
    lower = log_negativity(rho)
    result = MeasureResult(
        value_bits=value,
        alpha=math.inf,
        certificate_sigma=_as_certificate(S, rho.dims),
        iterations=iters,
        converged=ok,
        bracket=(lower, value),
    )
    if ok and value < lower - cfg.value_tol:
        result.converged = False
        result.diagnostic = (
            f"SDP value {value:.6f} fell below the closed-form lower endpoint {lower:.6f}"
        )
    if not ok:
        raise NotConvergedError("barrier method exhausted its stage budget", result=result)
    return result


def _ppt_shortcircuit(rho: BipartiteState, alpha: float, cfg: SolverConfig) -> MeasureResult:
    pt_state = BipartiteState(rho.dims, partial_transpose(rho.matrix, rho.dims, "B"))
    cert = regularize(pt_state, cfg.eps_schedule.floor)
    return MeasureResult(
        value_bits=0.0,
        alpha=alpha,
        certificate_sigma=cert,
        iterations=0,
        converged=True,
        bracket=(0.0, 0.0),
        diagnostic="input is PPT; measure vanishes identically",
    )


def e_alpha(rho, alpha: float, cfg: SolverConfig = DEFAULT_CONFIG) -> MeasureResult:
    """The interpolating measure at the given order, in bits.

    Closed form at order 1, projected gradient for finite orders above 1, the
    SDP at order infinity.  PPT inputs short-circuit to exactly zero.
    """
    alpha = check_alpha(alpha)
    rho = as_state(rho)
    if ppt_membership(rho):
        return _ppt_shortcircuit(rho, alpha, cfg)
    if math.isinf(alpha):
        return e_kappa(rho, cfg)

    lower = log_negativity(rho)
    if alpha == 1:
        from .pptgeom import interior_point

        result = MeasureResult(
            value_bits=lower,
            alpha=1.0,
            certificate_sigma=interior_point(rho.dims),
            iterations=0,
            converged=True,
            bracket=(lower, math.inf),
        )
    else:
        X = partial_transpose(rho.matrix, rho.dims, "B")
        value, point, iters, ok = _pg_core(
            X, lambda m: partial_transpose(m, rho.dims, "B"), rho.dims.total, alpha, cfg
        )
        result = MeasureResult(
            value_bits=value,
            alpha=alpha,
            certificate_sigma=BipartiteState(rho.dims, point),
            iterations=iters,
            converged=ok,
            bracket=(lower, math.inf),
        )
        if not ok:
            result.diagnostic = "projected gradient exhausted max_iter"
            raise NotConvergedError(result.diagnostic, result=result)

    bracket(rho, result, cfg)
    return result


def bracket(rho, result: MeasureResult, cfg: SolverConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    """Fill in the [order-1, order-infinity] sanity bracket and audit the value.

    The SDP upper endpoint is computed only when the config asks for it; the
    closed-form lower endpoint is always checked.
    """
    rho = as_state(rho)
    lower = log_negativity(rho)
    if math.isinf(result.alpha):
        upper = result.value_bits
    elif cfg.with_bracket:
        X = partial_transpose(rho.matrix, rho.dims, "B")
        trace_val, _, _, ok = _kappa_core(
            X, lambda m: partial_transpose(m, rho.dims, "B"), cfg
        )
        upper = math.log2(trace_val) if ok else math.inf
    else:
        upper = math.inf
    result.bracket = (lower, upper)
    if result.converged and not (
        lower - cfg.value_tol <= result.value_bits <= upper + cfg.value_tol
    ):
        result.converged = False
        result.diagnostic = (
            f"value {result.value_bits:.6f} escapes bracket "
            f"[{lower:.6f}, {upper:.6f}] beyond value_tol {cfg.value_tol:g}"
        )
    return lower, upper


def alpha_sweep(rho, alphas: Sequence[float], cfg: SolverConfig = DEFAULT_CONFIG) -> list[MeasureResult]:
    """Measure values over an ascending grid of orders, with an ordering audit."""
    alphas = [check_alpha(a) for a in alphas]
    if any(b < a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("orders must be sorted ascending")
    rho = as_state(rho)
    results = []
    for a in alphas:
        try:
            results.append(e_alpha(rho, a, cfg))
        except NotConvergedError as exc:
            if exc.result is None:
                raise
            results.append(exc.result)
    for i, j in audit_monotonicity(results, cfg.value_tol):
        note = f"ordering audit: value at order {results[i].alpha} exceeds order {results[j].alpha}"
        results[i].diagnostic = (results[i].diagnostic + "; " + note).lstrip("; ")
    return results


def audit_monotonicity(results: Sequence[MeasureResult], value_tol: float) -> list[tuple[int, int]]:
    """Indices (i, i+1) where the sweep violates monotonicity beyond 2*value_tol."""
    bad = []
    for i in range(len(results) - 1):
        if results[i].value_bits > results[i + 1].value_bits + 2 * value_tol:
            bad.append((i, i + 1))
    return bad
