"""Small dense complex linear algebra: Hermitian exponentials and transition matrices."""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12


def norm_squared(v) -> float:
    """Sum of squared moduli of ``v``."""
    v = np.asarray(v, dtype=complex)
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return float(np.sum(v.real**2 + v.imag**2))


def is_hermitian(H, tol: float = HERMITIAN_TOL) -> bool:
    H = np.asarray(H)
    if H.ndim < 2 or H.shape[-1] != H.shape[-2]:
        return False
    return bool(np.all(np.abs(H - np.conj(np.swapaxes(H, -1, -2))) <= tol))


def check_hermitian(H, tol: float = HERMITIAN_TOL) -> np.ndarray:
    H = np.asarray(H)
    if H.ndim < 2 or H.shape[-1] != H.shape[-2]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix has non-finite entries")
    dev = np.max(np.abs(H - np.conj(np.swapaxes(H, -1, -2))))
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian: max |H - H^dagger| = {dev:.3e} > {tol:g}")
    return H


def matrix_exponential_unitary(H, t: float) -> np.ndarray:
    """Return ``exp(-i H t)`` for Hermitian ``H``.

    Uses the eigendecomposition ``H = V diag(lam) V^dagger``, so the result is
    unitary to eigensolver accuracy. ``H`` may carry leading batch dimensions
    (shape ``(..., n, n)``); every matrix in the stack is exponentiated.
    """
    H = check_hermitian(H)
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    if np.isrealobj(H):
        H = H.astype(float)
    lam, V = np.linalg.eigh(H)
    phase = np.exp(-1j * lam * t)
    return (V * phase[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))


def transition_matrix(U) -> np.ndarray:
    """Element-wise squared moduli ``T_ij = |U_ij|^2``."""
    U = np.asarray(U)
    return U.real**2 + U.imag**2


def unitarity_defect(U) -> float:
    """``max |U^dagger U - I|`` over all entries."""
    U = np.asarray(U)
    n = U.shape[-1]
    return float(np.max(np.abs(np.conj(np.swapaxes(U, -1, -2)) @ U - np.eye(n))))
