"""Dense complex linear algebra and special functions.

Joint atom-field matrices use an atom-major ordering: row index ``a * N + n``
with ``a = 0`` for the excited level, ``a = 1`` for the ground level and ``n``
the Fock index.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, DomainError, NoConvergence, NonFinite, NotHermitian

LAGUERRE_MAX_ORDER = 400


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a finite, square complex128 array."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix has non-finite entries")
    return A


def hermiticity_error(M) -> float:
    A = np.asarray(M)
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def hermitian_eigendecomposition(M, hermiticity_tol: float = 1e-10) -> Spectrum:
    """Full spectrum of a Hermitian matrix, eigenvalues ascending.

    Only the lower triangle is read by LAPACK, so a matrix that is Hermitian to
    within ``hermiticity_tol`` is treated as exactly Hermitian.
    """
    A = as_matrix(M)
    err = hermiticity_error(A)
    if err > hermiticity_tol:
        raise NotHermitian(f"max |M - M^H| = {err:.3e} exceeds {hermiticity_tol:.3e}")
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    # eigh already sorts ascending; a stable argsort keeps ties in solver order
    order = np.argsort(w, kind="stable")
    return Spectrum(w[order], V[:, order])


def hermitian_eigenvalues(M, hermiticity_tol: float = 1e-10) -> np.ndarray:
    A = as_matrix(M)
    err = hermiticity_error(A)
    if err > hermiticity_tol:
        raise NotHermitian(f"max |M - M^H| = {err:.3e} exceeds {hermiticity_tol:.3e}")
    try:
        return np.linalg.eigvalsh(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def matrix_exponential(M, antihermitian_tol: float = 1e-12) -> np.ndarray:
    """exp(M).

    Anti-Hermitian input (the ``-i H t`` case) goes through the spectrum of
    ``i M`` so the result is unitary to working precision; anything else is
    handed to scipy's scaling-and-squaring Pade routine.
    """
    A = as_matrix(M)
    if float(np.max(np.abs(A + A.conj().T))) <= antihermitian_tol * max(1.0, float(np.max(np.abs(A)))):
        H = 1j * A
        H = 0.5 * (H + H.conj().T)
        w, V = hermitian_eigendecomposition(H, hermiticity_tol=np.inf)
        U = (V * np.exp(-1j * w)) @ V.conj().T
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            U = scipy.linalg.expm(A)
    if not np.all(np.isfinite(U)):
        raise NonFinite("matrix exponential overflowed")
    return U


def partial_transpose_atom(J, field_dim: int) -> np.ndarray:
    """Transpose the atomic indices of an atom-major joint matrix.

    ``out[a*N + n, b*N + m] = J[b*N + n, a*N + m]``; entries are only moved,
    never combined, so trace and Hermiticity carry over bit for bit.
    """
    J = np.asarray(J)
    N = int(field_dim)
    if N < 1 or J.shape != (2 * N, 2 * N):
        raise DimensionMismatch(f"joint matrix of shape {J.shape} does not match field_dim {field_dim}")
    blocks = J.reshape(2, N, 2, N)
    return blocks.transpose(2, 1, 0, 3).reshape(2 * N, 2 * N)


def laguerre_sequence(m_max: int, k: int, x) -> np.ndarray:
    """Associated Laguerre values L_j^(k)(x) for j = 0..m_max.

    Uses the upward three-term recurrence in the degree at fixed ``k``.  The
    leading axis indexes the degree; trailing axes follow ``x``.
    """
    m_max = int(m_max)
    k = int(k)
    if m_max < 0:
        raise DomainError("degree must be non-negative")
    if m_max > LAGUERRE_MAX_ORDER:
        raise DomainError(f"degree {m_max} exceeds supported maximum {LAGUERRE_MAX_ORDER}")
    if k < -m_max:
        raise DomainError(f"order k={k} must satisfy k >= -m (m={m_max})")
    x = np.asarray(x, dtype=float)
    out = np.empty((m_max + 1,) + x.shape)
    out[0] = 1.0
    if m_max >= 1:
        out[1] = 1.0 + k - x
    for j in range(1, m_max):
        out[j + 1] = ((2 * j + 1 + k - x) * out[j] - (j + k) * out[j - 1]) / (j + 1)
    return out


def laguerre(m: int, k: int, x):
    """Associated Laguerre polynomial L_m^(k)(x); ``k = 0`` gives L_m."""
    if int(m) < 0:
        raise DomainError("degree must be non-negative")
    vals = laguerre_sequence(m, k, x)[int(m)]
    return float(vals) if np.ndim(vals) == 0 else vals
