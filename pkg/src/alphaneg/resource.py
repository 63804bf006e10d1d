"""Generalized measures: any positive map in place of the partial transpose.

The free set is {sigma : sigma >= 0, P(sigma) >= 0, Tr sigma = 1} and the
measure is the infimum over it of the order-alpha divergence of P(rho).  The
generic solver reuses the projected-gradient and barrier machinery, which is
sound exactly when P is a Hermiticity-preserving trace-preserving involution
that is also a Frobenius isometry: then P . psd_project . P is an exact
nearest-point map for the {P(sigma) >= 0} cone and P is self-adjoint and
unital, which the interior-point start relies on.  Maps without those
properties are rejected rather than approximated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import (
    CommutationFailedError,
    NotConvergedError,
    UnsupportedMapError,
)
from .linalg import (
    BipartitionDims,
    check_hermitian,
    frob_norm,
    herm_part,
    partial_transpose,
    schatten_norm,
)
from .solver import DEFAULT_CONFIG, MeasureResult, SolverConfig, _kappa_core, _pg_core
from .states import BipartiteState, as_state

_VERIFY_SAMPLES = 20
_VERIFY_TOL = 1e-9


@dataclass(frozen=True)
class PositiveMapSpec:
    """A Hermiticity-preserving map with verified structural flags.

    The declared flags are checked on random Hermitian inputs at construction
    time; a spec whose flags do not match its action is rejected outright.
    """

    apply: Callable[[np.ndarray], np.ndarray]
    dim: int
    hs_involution: bool = True
    trace_preserving: bool = True
    hermiticity_preserving: bool = True
    name: str = "custom"

    def __post_init__(self):
        rng = np.random.default_rng(0xA1F)
        for _ in range(_VERIFY_SAMPLES):
            g = rng.standard_normal((self.dim, self.dim)) + 1j * rng.standard_normal(
                (self.dim, self.dim)
            )
            x = herm_part(g)
            scale = max(1.0, frob_norm(x))
            y = self.apply(x)
            if self.hermiticity_preserving and frob_norm(y - y.conj().T) > _VERIFY_TOL * scale:
                raise ValueError(f"map {self.name!r} is not Hermiticity-preserving")
            if self.trace_preserving and abs(np.trace(y) - np.trace(x)) > _VERIFY_TOL * scale:
                raise ValueError(f"map {self.name!r} is not trace-preserving")
            if self.hs_involution:
                if frob_norm(self.apply(y) - x) > _VERIFY_TOL * scale:
                    raise ValueError(f"map {self.name!r} is not an involution")
                if abs(frob_norm(y) - frob_norm(x)) > _VERIFY_TOL * scale:
                    raise ValueError(f"map {self.name!r} is not a Frobenius isometry")


def builtin_map(name: str, dims: BipartitionDims) -> PositiveMapSpec:
    """Named built-ins: "partial_transpose" on the B factor, or "transpose"."""
    if name == "partial_transpose":
        return PositiveMapSpec(
            apply=lambda m: partial_transpose(m, dims, "B"),
            dim=dims.total,
            name=name,
        )
    if name == "transpose":
        return PositiveMapSpec(apply=lambda m: m.T.copy(), dim=dims.total, name=name)
    raise UnsupportedMapError(f"unknown built-in map {name!r}")


_REGISTRY: dict[str, Callable[[BipartitionDims], PositiveMapSpec]] = {}


def register_map(name: str, factory: Callable[[BipartitionDims], PositiveMapSpec]) -> None:
    """Register a custom map factory selectable by name (e.g. from the CLI)."""
    _REGISTRY[name] = factory


def resolve_map(name: str, dims: BipartitionDims) -> PositiveMapSpec:
    if name in _REGISTRY:
        return _REGISTRY[name](dims)
    return builtin_map(name, dims)


def _require_solver_grade(pmap: PositiveMapSpec) -> None:
    if not (pmap.hermiticity_preserving and pmap.trace_preserving):
        raise UnsupportedMapError(
            f"map {pmap.name!r} must be Hermiticity- and trace-preserving"
        )
    if not pmap.hs_involution:
        raise UnsupportedMapError(
            f"map {pmap.name!r} is not an isometric involution; the exact cone "
            "projection the solver needs is unavailable for such maps"
        )


def free_membership(sigma, pmap: PositiveMapSpec, tol: float = 1e-9) -> bool:
    """True iff sigma and P(sigma) are PSD and sigma has unit trace, within tol."""
    if isinstance(sigma, BipartiteState):
        m = sigma.matrix
    else:
        m = check_hermitian(np.asarray(sigma, dtype=complex))
    if abs(np.trace(m).real - 1.0) > tol:
        return False
    if float(np.linalg.eigvalsh(m)[0]) < -tol:
        return False
    return float(np.linalg.eigvalsh(herm_part(pmap.apply(m)))[0]) >= -tol


def r_alpha(rho, pmap: PositiveMapSpec, alpha: float, cfg: SolverConfig = DEFAULT_CONFIG) -> MeasureResult:
    """Resourcefulness of a state with respect to the map, in bits."""
    from .divergence import check_alpha

    alpha = check_alpha(alpha)
    _require_solver_grade(pmap)
    rho = as_state(rho)
    X = herm_part(pmap.apply(rho.matrix))
    lower = max(0.0, math.log2(schatten_norm(X, 1)))

    if free_membership(rho, pmap):
        sigma = herm_part(pmap.apply(rho.matrix))
        return MeasureResult(
            value_bits=0.0,
            alpha=alpha,
            certificate_sigma=BipartiteState(rho.dims, sigma / np.trace(sigma).real),
            iterations=0,
            converged=True,
            bracket=(0.0, 0.0),
            diagnostic="input is free; measure vanishes identically",
        )

    if math.isinf(alpha):
        trace_val, S, iters, ok = _kappa_core(X, pmap.apply, cfg)
        value = math.log2(trace_val)
        result = MeasureResult(
            value_bits=value,
            alpha=alpha,
            certificate_sigma=BipartiteState(rho.dims, herm_part(S) / np.trace(S).real),
            iterations=iters,
            converged=ok,
            bracket=(lower, value),
        )
        if not ok:
            raise NotConvergedError("barrier method exhausted its stage budget", result=result)
        return result

    if alpha == 1:
        D = rho.dims.total
        return MeasureResult(
            value_bits=lower,
            alpha=1.0,
            certificate_sigma=BipartiteState(rho.dims, np.eye(D, dtype=complex) / D),
            iterations=0,
            converged=True,
            bracket=(lower, _upper_bracket(X, pmap, cfg)),
        )

    value, point, iters, ok = _pg_core(X, pmap.apply, rho.dims.total, alpha, cfg)
    result = MeasureResult(
        value_bits=value,
        alpha=alpha,
        certificate_sigma=BipartiteState(rho.dims, point),
        iterations=iters,
        converged=ok,
        bracket=(lower, _upper_bracket(X, pmap, cfg)),
    )
    if not ok:
        result.diagnostic = "projected gradient exhausted max_iter"
        raise NotConvergedError(result.diagnostic, result=result)
    lo, hi = result.bracket
    if not (lo - cfg.value_tol <= result.value_bits <= hi + cfg.value_tol):
        result.converged = False
        result.diagnostic = (
            f"value {result.value_bits:.6f} escapes bracket [{lo:.6f}, {hi:.6f}]"
        )
    return result


def _upper_bracket(X: np.ndarray, pmap: PositiveMapSpec, cfg: SolverConfig) -> float:
    if not cfg.with_bracket:
        return math.inf
    trace_val, _, _, ok = _kappa_core(X, pmap.apply, cfg)
    return math.log2(trace_val) if ok else math.inf


def _check_commutation(instr, pmap: PositiveMapSpec) -> None:
    rng = np.random.default_rng(0xC0117)
    for idx, el in enumerate(instr.elements):
        for _ in range(_VERIFY_SAMPLES):
            g = rng.standard_normal((pmap.dim, pmap.dim)) + 1j * rng.standard_normal(
                (pmap.dim, pmap.dim)
            )
            x = herm_part(g)
            lhs = el.apply(pmap.apply(x))
            rhs = pmap.apply(el.apply(x))
            if frob_norm(lhs - rhs) > 1e-8 * max(1.0, frob_norm(x)):
                raise CommutationFailedError(
                    f"instrument element {idx} does not commute with map {pmap.name!r}"
                )


def free_instrument_monotonicity_check(
    instr, rho, pmap: PositiveMapSpec, alpha: float, cfg: SolverConfig = DEFAULT_CONFIG
) -> float:
    """Slack R(rho) - sum_x p(x) R(rho^x) for an instrument commuting with P."""
    from .channels import instrument_outcomes

    _check_commutation(instr, pmap)
    lhs = r_alpha(rho, pmap, alpha, cfg).value_bits
    rhs = 0.0
    for p, post in instrument_outcomes(instr, rho):
        rhs += p * r_alpha(post, pmap, alpha, cfg).value_bits
    return lhs - rhs


def r_alpha_channel(
    channel,
    pmap: PositiveMapSpec,
    alpha: float,
    cfg: SolverConfig = DEFAULT_CONFIG,
    with_details: bool = False,
):
    """Largest resourcefulness over input states, by derivative-free search
    over square-root parametrizations of the input density matrix."""
    _require_solver_grade(pmap)
    din = channel.dim_in
    if din > 4:
        raise ValueError("channel search is desk-scale, input dimension must be <= 4")
    if channel.dim_out != pmap.dim:
        raise UnsupportedMapError(
            f"map dimension {pmap.dim} does not match channel output {channel.dim_out}"
        )
    out_dims = channel.bipartition_out or BipartitionDims(1, channel.dim_out)
    from dataclasses import replace

    inner_cfg = replace(cfg, with_bracket=False)
    n = din * din

    def objective(x: np.ndarray) -> float:
        g = (x[:n] + 1j * x[n:]).reshape(din, din)
        gram = g @ g.conj().T
        tr = float(np.trace(gram).real)
        if tr < 1e-12:
            return 1e6
        if hasattr(channel, "kraus_ops"):
            img = sum(k @ (gram / tr) @ k.conj().T for k in channel.kraus_ops)
        else:
            img = channel.apply(gram / tr)
        state = BipartiteState(out_dims, herm_part(img))
        try:
            return -r_alpha(state, pmap, alpha, inner_cfg).value_bits
        except NotConvergedError as exc:
            return -exc.result.value_bits if exc.result else 1e6

    rng = np.random.default_rng(cfg.seed)
    bests = []
    for restart in range(max(1, cfg.restarts)):
        x0 = (
            np.concatenate([np.eye(din).reshape(-1), np.zeros(n)])
            if restart == 0
            else rng.standard_normal(2 * n)
        )
        res = optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"maxiter": 300 * n, "xatol": 1e-5, "fatol": 1e-7},
        )
        bests.append(-res.fun)
    value = max(bests)
    if with_details:
        return value, {
            "restart_values": bests,
            "dispersion": value - min(bests),
            "dispersion_flag": value - min(bests) > cfg.value_tol,
        }
    return value
