"""Population inversion, negativity and their time series."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import JCParams, JointState, evolve_analytic, evolve_numeric, initial_joint_state
from .errors import DomainError, EmptyWindow
from .numerics import hermitian_eigenvalues, partial_transpose_atom
from .states import FieldState

CLAMP = 1e-10
DEFAULT_T_MAX = 25.0
DEFAULT_STEPS = 2001
REVIVAL_WINDOW = (15.0, 25.0)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    lambda_t: np.ndarray
    inversion: np.ndarray
    negativity: np.ndarray

    def __len__(self):
        return len(self.lambda_t)

    @property
    def rows(self):
        return list(zip(self.lambda_t.tolist(), self.inversion.tolist(), self.negativity.tolist()))


def population_inversion(state: JointState) -> float:
    """P(excited) - P(ground)."""
    d = np.real(np.diag(state.rho))
    N = state.field_dim
    return float(d[:N].sum() - d[N:].sum())


def negativity(state: JointState, clamp: float = CLAMP) -> float:
    """Sum of |lambda_k| - lambda_k over 2 for the atom-transposed spectrum.

    Eigenvalues in (-clamp, 0) are treated as truncation noise and zeroed.
    """
    pt = partial_transpose_atom(state.rho, state.field_dim)
    w = hermitian_eigenvalues(pt, hermiticity_tol=1e-8)
    w = np.where((w < 0) & (w > -clamp), 0.0, w)
    return float(np.sum(np.abs(w) - w) / 2)


def schmidt_negativity(coeffs: np.ndarray) -> float:
    """Negativity of a pure bipartite state from its Schmidt coefficients.

    For a pure state the negativity is ((sum_i s_i)^2 - 1) / 2.
    """
    s = np.linalg.svd(np.asarray(coeffs), compute_uv=False)
    s = s / np.linalg.norm(s)
    return float((s.sum() ** 2 - 1) / 2)


def _validate_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("time grid must be a non-empty 1-d sequence")
    if grid[0] < 0 or np.any(np.diff(grid) <= 0):
        raise DomainError("time grid must be non-negative and strictly increasing")
    return grid


def default_grid(t_max: float = DEFAULT_T_MAX, steps: int = DEFAULT_STEPS) -> np.ndarray:
    return np.linspace(0.0, t_max, steps)


def time_series(field: FieldState, grid=None, propagator: str = "analytic",
                params: JCParams | None = None, workers: int = 1,
                with_negativity: bool = True) -> TimeSeries:
    """Inversion and negativity of |e><e| (x) rho_field at each grid time.

    Points are independent; ``workers > 1`` spreads them over threads and the
    result is still assembled in grid order.
    """
    grid = _validate_grid(default_grid() if grid is None else grid)
    if propagator == "analytic":
        def state_at(t):
            return evolve_analytic(field, t, params)
    elif propagator == "numeric":
        initial = initial_joint_state(field)

        def state_at(t):
            return evolve_numeric(initial, params, t)
    else:
        raise ValueError(f"unknown propagator {propagator!r}")

    def point(t):
        s = state_at(t)
        return population_inversion(s), (negativity(s) if with_negativity else np.nan)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(point, grid))
    else:
        values = [point(t) for t in grid]
    inv, neg = (np.array(v, dtype=float) for v in zip(*values))
    return TimeSeries(grid, inv, neg)


def revival_contrast(series: TimeSeries, window=REVIVAL_WINDOW) -> float:
    """Largest |inversion| inside ``window``; needs at least 10 samples there."""
    lo, hi = window
    mask = (series.lambda_t >= lo) & (series.lambda_t <= hi)
    if mask.sum() < 10:
        raise EmptyWindow(f"window [{lo}, {hi}] holds {int(mask.sum())} samples, need at least 10")
    return float(np.max(np.abs(series.inversion[mask])))
