"""Dense complex Hermitian linear-algebra kernel.

Everything downstream (divergences, projections, solvers) is spectral, so this
module owns the conventions:

* the composite index of a bipartite system is row-major, (a, b) -> a * dB + b,
  matching ``numpy.kron``;
* Hermitian inputs are symmetrized to (H + H^dag)/2 once the Hermiticity
  tolerance has passed, so spectral code never sees asymmetry noise;
* eigenvalues at or below ``tol * lambda_max`` count as zero wherever a support
  decision is made (generalized powers, support inclusion tests).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AlphaOutOfRangeError,
    NegativeSpectrumError,
    NonHermitianError,
    NotPositiveDefiniteError,
)

SUPPORT_TOL = 1e-10
HERMITICITY_TOL = 1e-9


@dataclass(frozen=True)
class Tolerances:
    """Shared numeric thresholds for support and Hermiticity decisions."""

    support: float = SUPPORT_TOL
    hermiticity: float = HERMITICITY_TOL


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class BipartitionDims:
    """The A:B split of a composite space of dimension dA * dB."""

    dA: int
    dB: int

    def __post_init__(self):
        if self.dA < 1 or self.dB < 1:
            raise ValueError(f"dimensions must be positive, got {self.dA}x{self.dB}")

    @property
    def total(self) -> int:
        return self.dA * self.dB


@dataclass(frozen=True)
class HermitianEig:
    """Ascending eigenvalues and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def herm_part(M: np.ndarray) -> np.ndarray:
    """Hermitian part (M + M^dag)/2."""
    return (M + M.conj().T) / 2


def op_norm(M: np.ndarray) -> float:
    """Operator (largest singular value) norm."""
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def frob_norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M))


def check_hermitian(M: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate Hermiticity within ``tol`` (relative to the operator norm) and
    return the symmetrized matrix."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonHermitianError(f"expected a square matrix, got shape {M.shape}")
    scale = op_norm(M)
    if op_norm(M - M.conj().T) > tol * max(scale, 1e-300):
        raise NonHermitianError(
            f"matrix is not Hermitian within tolerance {tol:g}"
        )
    return herm_part(M)


def tensor(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product with composite index (a, b) -> a * dB + b."""
    return np.kron(np.asarray(A), np.asarray(B))


def permute_subsystems(M: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that new factor i is old factor perm[i]."""
    dims = tuple(dims)
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"perm {perm} is not a permutation of 0..{n - 1}")
    d = int(np.prod(dims))
    if M.shape != (d, d):
        raise ValueError(f"matrix shape {M.shape} does not match dims {dims}")
    tens = M.reshape(dims + dims)
    axes = list(perm) + [p + n for p in perm]
    new_dims = tuple(dims[p] for p in perm)
    return tens.transpose(axes).reshape(int(np.prod(new_dims)), -1)


def subsystem_transpose(M: np.ndarray, dims: Sequence[int], which: Sequence[int]) -> np.ndarray:
    """Transpose the chosen tensor factors of a multipartite operator."""
    dims = tuple(dims)
    n = len(dims)
    d = int(np.prod(dims))
    if M.shape != (d, d):
        raise ValueError(f"matrix shape {M.shape} does not match dims {dims}")
    tens = M.reshape(dims + dims)
    axes = list(range(2 * n))
    for i in which:
        if not 0 <= i < n:
            raise ValueError(f"subsystem index {i} out of range for {n} factors")
        axes[i], axes[i + n] = axes[i + n], axes[i]
    return tens.transpose(axes).reshape(d, d)


def partial_transpose(M: np.ndarray, dims: BipartitionDims, subsystem: str = "B") -> np.ndarray:
    """Partial transpose over the named subsystem of a bipartite operator."""
    M = np.asarray(M, dtype=complex)
    if M.shape != (dims.total, dims.total):
        raise ValueError(f"matrix shape {M.shape} does not match dims {dims}")
    which = {"A": (0,), "B": (1,)}.get(subsystem)
    if which is None:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return subsystem_transpose(M, (dims.dA, dims.dB), which)


def partial_trace(M: np.ndarray, dims: BipartitionDims, subsystem: str = "B") -> np.ndarray:
    """Trace out the named subsystem; preserves the total trace."""
    M = np.asarray(M, dtype=complex)
    if M.shape != (dims.total, dims.total):
        raise ValueError(f"matrix shape {M.shape} does not match dims {dims}")
    tens = M.reshape(dims.dA, dims.dB, dims.dA, dims.dB)
    if subsystem == "B":
        return np.einsum("abcb->ac", tens)
    if subsystem == "A":
        return np.einsum("abad->bd", tens)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def hermitian_eig(H: np.ndarray, tol: float = HERMITICITY_TOL) -> HermitianEig:
    """Eigendecomposition of a (tolerantly) Hermitian matrix.

    The input is symmetrized before the decomposition, so the reconstruction
    matches the symmetrized matrix to solver precision.
    """
    H = check_hermitian(H, tol)
    w, v = np.linalg.eigh(H)
    return HermitianEig(eigenvalues=w, eigenvectors=v)


def schatten_norm(M: np.ndarray, alpha: float) -> float:
    """Schatten norm (sum of singular values^alpha)^(1/alpha); alpha=inf gives
    the operator norm."""
    if alpha < 1:
        raise AlphaOutOfRangeError(f"Schatten order must be >= 1, got {alpha}")
    s = np.linalg.svd(np.asarray(M, dtype=complex), compute_uv=False)
    if np.isinf(alpha):
        return float(s[0]) if s.size else 0.0
    if alpha == 1:
        return float(np.sum(s))
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        return 0.0
    # factor out the largest singular value to avoid overflow at large alpha
    return smax * float(np.sum((s / smax) ** alpha)) ** (1.0 / alpha)


def _support_cut(w: np.ndarray, tol: float) -> np.ndarray:
    """Boolean mask of eigenvalues counted as part of the support."""
    lam_max = float(np.max(np.abs(w))) if w.size else 0.0
    return np.abs(w) > tol * lam_max


def support_projector(H: np.ndarray, tol: float = SUPPORT_TOL) -> np.ndarray:
    """Orthogonal projector onto the support of a Hermitian matrix."""
    eig = hermitian_eig(H)
    mask = _support_cut(eig.eigenvalues, tol)
    v = eig.eigenvectors[:, mask]
    return v @ v.conj().T


def matrix_power_support(H: np.ndarray, p: float, tol: float = SUPPORT_TOL) -> np.ndarray:
    """Generalized matrix power of a PSD matrix, taken on its support.

    Eigenvalues at or below ``tol * lambda_max`` map to zero; the rest map to
    lambda^p (negative p gives the generalized inverse power).
    """
    eig = hermitian_eig(H)
    w = eig.eigenvalues
    lam_max = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and float(w[0]) < -tol * lam_max:
        raise NegativeSpectrumError(
            f"matrix has negative eigenvalue {w[0]:.3e} beyond tolerance"
        )
    mask = _support_cut(w, tol)
    powered = np.zeros_like(w)
    powered[mask] = np.clip(w[mask], 0.0, None) ** p if p >= 0 else w[mask] ** p
    v = eig.eigenvectors
    return herm_part((v * powered) @ v.conj().T)


def support_leq(X: np.ndarray, sigma: np.ndarray, tol: float = SUPPORT_TOL) -> bool:
    """True iff the support of Hermitian X lies inside the support of PSD sigma."""
    X = check_hermitian(X)
    comp = np.eye(sigma.shape[0]) - support_projector(sigma, tol)
    return op_norm(comp @ X @ comp) <= tol and op_norm(comp @ X) <= tol


def psd_project(H: np.ndarray) -> np.ndarray:
    """Frobenius-nearest positive semi-definite matrix (eigenvalue clipping)."""
    eig = hermitian_eig(H)
    w = np.clip(eig.eigenvalues, 0.0, None)
    v = eig.eigenvectors
    return herm_part((v * w) @ v.conj().T)


def _power_gradient_from_eig(
    w: np.ndarray, v: np.ndarray, p: float, weight: np.ndarray
) -> np.ndarray:
    """Adjoint Frechet derivative of sigma -> sigma^p given sigma's spectrum.

    Uses the first divided differences of x -> x^p on the eigenvalues; nearly
    degenerate pairs fall back to the analytic derivative at the midpoint.
    """
    wp = w**p
    diff = w[:, None] - w[None, :]
    near = np.abs(diff) <= 1e-8 * np.maximum(np.abs(w[:, None]), np.abs(w[None, :]))
    mid = (w[:, None] + w[None, :]) / 2
    table = np.where(near, p * mid ** (p - 1), (wp[:, None] - wp[None, :]) / np.where(near, 1.0, diff))
    wh = v.conj().T @ herm_part(weight) @ v
    return herm_part(v @ (table * wh) @ v.conj().T)


def power_gradient(sigma: np.ndarray, p: float, direction_weight: np.ndarray) -> np.ndarray:
    """Hermitian G with Tr[W d(sigma^p)[Delta]] = Tr[G Delta] for Hermitian Delta."""
    eig = hermitian_eig(sigma)
    if float(eig.eigenvalues[0]) <= 0:
        raise NotPositiveDefiniteError(
            f"matrix power gradient needs a positive definite base, "
            f"min eigenvalue {eig.eigenvalues[0]:.3e}"
        )
    return _power_gradient_from_eig(eig.eigenvalues, eig.eigenvectors, p, direction_weight)
