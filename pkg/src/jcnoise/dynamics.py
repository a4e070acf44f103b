"""Resonant Jaynes-Cummings evolution of an excited atom and a field state.

Units: hbar = 1 and time always enters as the dimensionless product
``lambda_t`` (coupling times time).  Joint matrices are atom-major with the
excited level first, see :mod:`jcnoise.numerics`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResonantOnly
from .numerics import matrix_exponential
from .states import FieldState

EXCITED, GROUND = 0, 1


@dataclass(frozen=True)
class JCParams:
    coupling: float = 1.0
    detuning: float = 0.0

    def __post_init__(self):
        if not self.coupling > 0:
            raise DomainError(f"coupling must be positive, got {self.coupling}")


@dataclass(frozen=True, eq=False)
class JointState:
    rho: np.ndarray
    field_dim: int

    def block(self, a: int, b: int) -> np.ndarray:
        N = self.field_dim
        return self.rho[a * N:(a + 1) * N, b * N:(b + 1) * N]

    def field_reduced(self) -> np.ndarray:
        return self.block(EXCITED, EXCITED) + self.block(GROUND, GROUND)

    def atom_reduced(self) -> np.ndarray:
        return self.rho.reshape(2, self.field_dim, 2, self.field_dim).trace(axis1=1, axis2=3)


def initial_joint_state(field: FieldState) -> JointState:
    """|e><e| (x) rho_field."""
    N = field.dim
    rho = np.zeros((2 * N, 2 * N), dtype=complex)
    rho[:N, :N] = field.rho
    return JointState(rho, N)


def build_hamiltonian(params: JCParams, field_dim: int) -> np.ndarray:
    """Interaction-picture Hamiltonian (D/2) sigma_z + i lambda (a^+ sigma_- - a sigma_+).

    Only |e,n> and |g,n+1> are coupled; the element <g,n+1|H|e,n> is
    i lambda sqrt(n+1) and its mirror is the conjugate.  |e,N-1> has no
    partner inside the truncated space.
    """
    N = int(field_dim)
    if N < 2:
        raise DomainError("field_dim must be at least 2")
    H = np.zeros((2 * N, 2 * N), dtype=complex)
    idx = np.arange(N)
    H[idx, idx] = 0.5 * params.detuning
    H[N + idx, N + idx] = -0.5 * params.detuning
    n = np.arange(N - 1)
    g = 1j * params.coupling * np.sqrt(n + 1)
    H[N + n + 1, n] = g
    H[n, N + n + 1] = np.conj(g)
    return H


def rabi_factors(field_dim: int, lambda_t: float, rabi_shift: int = 1):
    """cos and sin of lambda_t sqrt(n + rabi_shift) for n < field_dim."""
    arg = lambda_t * np.sqrt(np.arange(field_dim) + rabi_shift)
    return np.cos(arg), np.sin(arg)


def evolve_analytic(field: FieldState, lambda_t: float, params: JCParams | None = None,
                    rabi_shift: int = 1) -> JointState:
    """Closed-form resonant evolution of |e><e| (x) rho_field.

    Each |e,n> rotates into cos(x_n)|e,n> + sin(x_n)|g,n+1> with
    x_n = lambda_t sqrt(n+1), so rho(t) is assembled blockwise from the
    initial field elements c_nm.  The top level |e,N-1> has no partner
    inside the truncated space and is held fixed, exactly as the truncated
    Hamiltonian does, so trace is preserved and both propagators describe
    the same finite model.

    ``rabi_shift`` exists so the verification harness can reproduce the
    literal sqrt(n) variant; physical use keeps the default.
    """
    if params is not None and params.detuning != 0:
        raise ResonantOnly("closed-form evolution is available only at zero detuning")
    if lambda_t < 0:
        raise DomainError("lambda_t must be non-negative")
    N = field.dim
    c = field.rho
    C, S = rabi_factors(N, lambda_t, rabi_shift)
    C[-1], S[-1] = 1.0, 0.0
    rho = np.zeros((2 * N, 2 * N), dtype=complex)
    rho[:N, :N] = C[:, None] * c * C[None, :]
    ge = S[:-1, None] * c[:-1, :] * C[None, :]
    rho[N + 1:, :N] = ge
    rho[:N, N + 1:] = ge.conj().T
    rho[N + 1:, N + 1:] = S[:-1, None] * c[:-1, :-1] * S[None, :-1]
    return JointState(rho, N)


def evolve_pure_analytic(psi: np.ndarray, lambda_t: float) -> np.ndarray:
    """Closed-form evolution of |e> (x) |psi>; returns the 2 x N coefficient array."""
    N = len(psi)
    C, S = rabi_factors(N, lambda_t)
    C[-1], S[-1] = 1.0, 0.0
    out = np.zeros((2, N), dtype=complex)
    out[EXCITED] = C * psi
    out[GROUND, 1:] = (S * psi)[:-1]
    return out


def propagator(params: JCParams, field_dim: int, lambda_t: float) -> np.ndarray:
    H = build_hamiltonian(params, field_dim) / params.coupling
    return matrix_exponential(-1j * lambda_t * H)


def evolve_numeric(initial: JointState, params: JCParams | None, lambda_t: float) -> JointState:
    """U rho U^+ with U = exp(-i H t) from the matrix exponential; any detuning."""
    params = params or JCParams()
    if lambda_t == 0:
        return JointState(initial.rho.copy(), initial.field_dim)
    U = propagator(params, initial.field_dim, lambda_t)
    return JointState(U @ initial.rho @ U.conj().T, initial.field_dim)


def trace_distance(a: JointState | np.ndarray, b: JointState | np.ndarray) -> float:
    A = a.rho if isinstance(a, JointState) else a
    B = b.rho if isinstance(b, JointState) else b
    diff = A - B
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def excitation_number(state: JointState) -> float:
    """<n + |e><e|>."""
    N = state.field_dim
    n = np.arange(N)
    d = np.real(np.diag(state.rho))
    return float(n @ d[:N] + n @ d[N:] + d[:N].sum())
