"""Single-mode field states on a truncated Fock space.

Every constructor returns a :class:`FieldState` whose density matrix has been
divided by its own trace, and refuses (``CutoffTooSmall``) when the
probability that would fall above the cutoff exceeds ``TAIL_TOLERANCE``.

Mixed thermal-coherent states use ``rho = (1 - q) rho_thermal + q |a><a|``,
i.e. ``q`` is the weight of the coherent component.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import CutoffTooSmall, DomainError, MethodDiverged
from .numerics import LAGUERRE_MAX_ORDER, laguerre, laguerre_sequence, matrix_exponential

DEFAULT_CUTOFF = 150
TAIL_TOLERANCE = 1e-10
SERIES_TOLERANCE = 1e-12

DTS_METHODS = ("unitary", "displaced_number", "pacs_mixture")


class TruncationWarning(UserWarning):
    """A state was accepted with more weight above the cutoff than TAIL_TOLERANCE."""


@dataclass(frozen=True)
class FieldParams:
    alpha: complex = 0j
    nbar: float = 0.0
    q: float | None = None
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        if not (math.isfinite(self.alpha.real) and math.isfinite(self.alpha.imag)):
            raise DomainError("alpha must be finite")
        if not (self.nbar >= 0 and math.isfinite(self.nbar)):
            raise DomainError(f"nbar must be a finite non-negative number, got {self.nbar}")
        if self.q is not None and not 0.0 <= self.q <= 1.0:
            raise DomainError(f"q must lie in [0, 1], got {self.q}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise DomainError(f"cutoff must be an integer >= 2, got {self.cutoff}")

    @property
    def theta(self) -> float:
        return float(np.angle(self.alpha))

    @property
    def alpha_sq(self) -> float:
        return abs(self.alpha) ** 2

    @property
    def epsilon(self) -> float:
        return 1.0 / (1.0 + self.nbar)

    @property
    def gamma(self) -> float:
        if self.nbar <= 0:
            raise DomainError("gamma = ln(1 + 1/nbar) is undefined for nbar = 0")
        return math.log1p(1.0 / self.nbar)

    @property
    def alpha_tilde(self) -> complex:
        """Amplitude of the photon-added coherent states that make up the DTS."""
        return self.alpha / (1.0 + self.nbar)


@dataclass(frozen=True, eq=False)
class FieldState:
    rho: np.ndarray
    params: FieldParams
    kind: str
    tail_mass: float = 0.0
    inner: str | None = None
    order: int | None = None

    def __post_init__(self):
        self.rho.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def label(self) -> str:
        return f"photon_added_{self.inner}" if self.kind == "photon_added" else self.kind

    def mean_photon_number(self) -> float:
        return float(np.arange(self.dim) @ np.real(np.diag(self.rho)))

    def invariant_errors(self) -> dict:
        rho = self.rho
        return {
            "hermiticity": float(np.max(np.abs(rho - rho.conj().T))),
            "trace": abs(complex(np.trace(rho)) - 1.0),
            "min_eigenvalue": float(np.linalg.eigvalsh(rho)[0]),
        }


# -- tails ---------------------------------------------------------------

def _thermal_ratio(nbar: float) -> float:
    return nbar / (1.0 + nbar)


def _coherent_tail(alpha_sq: float, cutoff: int) -> float:
    # P(Poisson(|a|^2) >= N) is the regularized lower incomplete gamma P(N, |a|^2)
    return float(gammainc(cutoff, alpha_sq)) if alpha_sq > 0 else 0.0


def _thermal_tail(nbar: float, cutoff: int) -> float:
    return _thermal_ratio(nbar) ** cutoff


def _dts_tail(alpha_sq: float, nbar: float, cutoff: int) -> float:
    if nbar == 0:
        return _coherent_tail(alpha_sq, cutoff)
    if alpha_sq == 0:
        return _thermal_tail(nbar, cutoff)
    p = _dts_diagonal(alpha_sq, nbar, cutoff)
    return max(0.0, 1.0 - math.fsum(p))


def _pacs_log_amplitudes(alpha_sq: float, m: int, cutoff: int) -> np.ndarray:
    """log |<k| a^+m |a>| / sqrt(m! L_m(-|a|^2)) for k = m..cutoff-1."""
    k = np.arange(m, cutoff)
    log_norm = 0.5 * (gammaln(m + 1) + math.log(laguerre(m, 0, -alpha_sq)))
    return (-0.5 * alpha_sq + 0.5 * (k - m) * math.log(alpha_sq)
            + 0.5 * gammaln(k + 1) - gammaln(k - m + 1) - log_norm)


def _pacs_tail(alpha_sq: float, m: int, cutoff: int) -> float:
    if m >= cutoff:
        return 1.0
    if alpha_sq == 0:
        return 0.0
    p = np.exp(2 * _pacs_log_amplitudes(alpha_sq, m, cutoff))
    return max(0.0, 1.0 - math.fsum(p))


def _suggest_cutoff(tail, cutoff: int, limit: int = LAGUERRE_MAX_ORDER + 1) -> int | None:
    n = cutoff
    while n < limit:
        n = min(limit, int(n * 1.25) + 1)
        if tail(n) <= TAIL_TOLERANCE:
            lo, hi = cutoff, n
            while hi - lo > 1:
                mid = (lo + hi) // 2
                lo, hi = (lo, mid) if tail(mid) <= TAIL_TOLERANCE else (mid, hi)
            return hi
    return None


def _check_tail(what: str, tail_mass: float, cutoff: int, tail, strict: bool = True) -> None:
    if tail_mass > TAIL_TOLERANCE:
        if not strict:
            warnings.warn(f"{what}: probability {tail_mass:.3e} above cutoff {cutoff} was discarded",
                          TruncationWarning, stacklevel=3)
            return
        suggested = _suggest_cutoff(tail, cutoff)
        hint = f"; try cutoff >= {suggested}" if suggested else ""
        raise CutoffTooSmall(
            f"{what}: probability {tail_mass:.3e} above cutoff {cutoff} exceeds {TAIL_TOLERANCE:g}{hint}",
            tail_mass=tail_mass, suggested=suggested)


def _finish(rho: np.ndarray, params: FieldParams, kind: str, tail_mass: float, **extra) -> FieldState:
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.real(np.trace(rho))
    return FieldState(rho=rho, params=params, kind=kind, tail_mass=float(tail_mass), **extra)


# -- amplitude vectors -----------------------------------------------------

def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Untruncated-normalization amplitudes <n|a> for n < cutoff."""
    alpha = complex(alpha)
    psi = np.zeros(cutoff, dtype=complex)
    if alpha == 0:
        psi[0] = 1.0
        return psi
    n = np.arange(cutoff)
    r2 = abs(alpha) ** 2
    log_mag = -0.5 * r2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def pacs_amplitudes(alpha: complex, m: int, cutoff: int) -> np.ndarray:
    """Amplitudes of the normalized photon-added coherent state |a, m>."""
    alpha = complex(alpha)
    psi = np.zeros(cutoff, dtype=complex)
    if alpha == 0:
        psi[m] = 1.0
        return psi
    k = np.arange(m, cutoff)
    psi[m:] = np.exp(_pacs_log_amplitudes(abs(alpha) ** 2, m, cutoff)) * np.exp(1j * (k - m) * np.angle(alpha))
    return psi


def displaced_number_columns(alpha: complex, count: int, cutoff: int) -> np.ndarray:
    """Columns D(a)|k> for k < count, rows below ``cutoff``.

    Exponentiates the generator a a^+ - a* a on a basis twice the cutoff and
    crops, so the truncation edge stays far from the rows that are kept.
    """
    alpha = complex(alpha)
    padded = 2 * max(cutoff, count)
    lower = np.diag(np.sqrt(np.arange(1, padded)), -1)
    U = matrix_exponential(alpha * lower - np.conj(alpha) * lower.T)
    return U[:cutoff, :count]


# -- constructors ------------------------------------------------------------

def number_state(n: int, cutoff: int = DEFAULT_CUTOFF) -> FieldState:
    params = FieldParams(cutoff=cutoff)
    if not 0 <= n < cutoff:
        raise CutoffTooSmall(f"|{n}> does not fit below cutoff {cutoff}", tail_mass=1.0, suggested=n + 1)
    rho = np.zeros((cutoff, cutoff), dtype=complex)
    rho[n, n] = 1.0
    return FieldState(rho=rho, params=params, kind="number", order=n)


def coherent_state(alpha: complex, cutoff: int = DEFAULT_CUTOFF, strict: bool = True) -> FieldState:
    params = FieldParams(alpha=alpha, cutoff=cutoff)
    tail = _coherent_tail(params.alpha_sq, cutoff)
    _check_tail("coherent state", tail, cutoff, lambda N: _coherent_tail(params.alpha_sq, N), strict)
    psi = coherent_amplitudes(params.alpha, cutoff)
    return _finish(np.outer(psi, psi.conj()), params, "coherent", tail)


def thermal_state(nbar: float, cutoff: int = DEFAULT_CUTOFF, strict: bool = True) -> FieldState:
    params = FieldParams(nbar=nbar, cutoff=cutoff)
    tail = _thermal_tail(nbar, cutoff)
    _check_tail("thermal state", tail, cutoff, lambda N: _thermal_tail(nbar, N), strict)
    p = _thermal_weights(nbar, cutoff)
    return _finish(np.diag(p).astype(complex), params, "thermal", tail)


def _thermal_weights(nbar: float, count: int) -> np.ndarray:
    return (1.0 / (1.0 + nbar)) * _thermal_ratio(nbar) ** np.arange(count)


def displacement_operator(alpha: complex, cutoff: int = DEFAULT_CUTOFF) -> np.ndarray:
    """Truncated matrix of D(a) from the closed-form Fock elements.

    For m >= n, <m|D|n> = sqrt(n!/m!) a^(m-n) exp(-|a|^2/2) L_n^(m-n)(|a|^2);
    the upper triangle follows from <n|D(a)|m> = <m|D(-a)|n>.
    """
    alpha = complex(alpha)
    r2 = abs(alpha) ** 2
    if r2 > cutoff / 3:
        raise CutoffTooSmall(f"|alpha|^2 = {r2:g} exceeds cutoff/3 = {cutoff / 3:g}",
                             suggested=int(math.ceil(3 * r2)))
    if alpha == 0:
        return np.eye(cutoff, dtype=complex)
    D = np.zeros((cutoff, cutoff), dtype=complex)
    log_r = math.log(abs(alpha))
    phase = alpha / abs(alpha)
    for k in range(cutoff):
        n = np.arange(cutoff - k)
        lag = laguerre_sequence(cutoff - 1 - k, k, r2)
        mag = np.exp(0.5 * (gammaln(n + 1) - gammaln(n + k + 1)) + k * log_r - 0.5 * r2) * lag
        D[n + k, n] = mag * phase ** k
        if k:
            D[n, n + k] = mag * (-np.conj(phase)) ** k
    return D


def displaced_thermal(alpha: complex, nbar: float, cutoff: int = DEFAULT_CUTOFF,
                      method: str = "unitary", strict: bool = True) -> FieldState:
    """Displaced thermal (Glauber-Lachs) state D(a) rho_thermal D(a)^+.

    ``method`` picks the construction route:

    * ``unitary`` conjugates the diagonal thermal matrix with the closed-form
      displacement matrix;
    * ``displaced_number`` sums thermal weights over displaced number states;
    * ``pacs_mixture`` sums photon-added coherent states of amplitude
      a/(1+nbar) with weights eps exp(-nbar |a~|^2) t^n L_n(-|a~|^2),
      t = nbar/(1+nbar).

    With ``strict=False`` a state with too much weight above the cutoff is
    built anyway and a :class:`TruncationWarning` is issued.
    """
    if method not in DTS_METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {DTS_METHODS}")
    params = FieldParams(alpha=alpha, nbar=nbar, cutoff=cutoff)
    if nbar == 0:
        state = coherent_state(alpha, cutoff, strict)
        return FieldState(rho=state.rho, params=params, kind="dts", tail_mass=state.tail_mass)
    r2 = params.alpha_sq
    tail = _dts_tail(r2, nbar, cutoff)
    _check_tail("displaced thermal state", tail, cutoff, lambda N: _dts_tail(r2, nbar, N), strict)

    if method == "unitary":
        D = displacement_operator(params.alpha, cutoff)
        rho = (D * _thermal_weights(nbar, cutoff)) @ D.conj().T
    elif method == "displaced_number":
        count = _geometric_terms(nbar, cutoff)
        cols = displaced_number_columns(params.alpha, count, cutoff)
        rho = (cols * _thermal_weights(nbar, count)) @ cols.conj().T
    else:
        weights = dts_pacs_weights(params.alpha, nbar, cutoff)
        beta = params.alpha_tilde
        rho = np.zeros((cutoff, cutoff), dtype=complex)
        for n, w in enumerate(weights):
            psi = pacs_amplitudes(beta, n, cutoff)
            rho += w * np.outer(psi, psi.conj())
    return _finish(rho, params, "dts", tail)


def _geometric_terms(nbar: float, cutoff: int) -> int:
    t = _thermal_ratio(nbar)
    # neglected weight after K terms is t**K
    count = int(math.ceil(math.log(SERIES_TOLERANCE) / math.log(t))) if t > 0 else 1
    if count > cutoff:
        raise MethodDiverged(f"thermal weights need {count} terms, more than cutoff {cutoff}")
    return max(count, 1)


def dts_pacs_weights(alpha: complex, nbar: float, cutoff: int = DEFAULT_CUTOFF) -> np.ndarray:
    """Weights of the photon-added coherent states in the DTS decomposition.

    The series is cut where the neglected weight drops below 1e-12.  The
    prefactor is the one that makes the full series sum to one.
    """
    if nbar <= 0:
        return np.ones(1)
    r2t = abs(complex(alpha) / (1.0 + nbar)) ** 2
    t = _thermal_ratio(nbar)
    cap = min(cutoff - 1, LAGUERRE_MAX_ORDER)
    lag = laguerre_sequence(cap, 0, -r2t)
    w = math.exp(-nbar * r2t) / (1.0 + nbar) * t ** np.arange(cap + 1) * lag
    neglected = 1.0 - np.cumsum(w)
    done = np.nonzero(neglected < SERIES_TOLERANCE)[0]
    if done.size == 0:
        raise MethodDiverged(
            f"PACS mixture weights have not decayed below {SERIES_TOLERANCE:g} within {cap + 1} terms")
    return w[: done[0] + 1]


def mtcs(alpha: complex, nbar: float, q: float, cutoff: int = DEFAULT_CUTOFF,
         strict: bool = True) -> FieldState:
    """Mixture (1 - q) rho_thermal + q |a><a|."""
    params = FieldParams(alpha=alpha, nbar=nbar, q=q, cutoff=cutoff)
    r2 = params.alpha_sq

    def tail_at(N):
        return (1 - q) * _thermal_tail(nbar, N) + q * _coherent_tail(r2, N)

    tail = tail_at(cutoff)
    _check_tail("mixed thermal-coherent state", tail, cutoff, tail_at, strict)
    psi = coherent_amplitudes(params.alpha, cutoff)
    rho = (1 - q) * np.diag(_thermal_weights(nbar, cutoff)) + q * np.outer(psi, psi.conj())
    return _finish(rho, params, "mtcs", tail)


def pacs(alpha: complex, m: int, cutoff: int = DEFAULT_CUTOFF, strict: bool = True) -> FieldState:
    """Photon-added coherent state a^+m |a> / sqrt(m! L_m(-|a|^2))."""
    params = FieldParams(alpha=alpha, cutoff=cutoff)
    m = int(m)
    if m < 0:
        raise DomainError("photon-addition order must be non-negative")
    r2 = params.alpha_sq
    tail = _pacs_tail(r2, m, cutoff)
    _check_tail(f"photon-added coherent state of order {m}", tail, cutoff, lambda N: _pacs_tail(r2, m, N), strict)
    psi = pacs_amplitudes(params.alpha, m, cutoff)
    return _finish(np.outer(psi, psi.conj()), params, "pacs", tail, order=m)


def photon_add_normalizer(state: FieldState) -> float:
    """Tr(a^+ rho a) evaluated on the truncated matrix."""
    p = np.real(np.diag(state.rho))
    return float(np.arange(1, state.dim) @ p[:-1])


def photon_add(state: FieldState, strict: bool = True) -> FieldState:
    """a^+ rho a / Tr(a^+ rho a); the result has no vacuum component."""
    if state.kind == "photon_added":
        raise DomainError("repeated photon addition is not supported")
    N = state.dim
    norm = photon_add_normalizer(state)
    if norm <= 0:
        raise CutoffTooSmall(f"all weight sits in the top Fock level {N - 1}; nothing to raise", tail_mass=1.0)
    # weight pushed past the cutoff: the dropped top row plus the source tail, n-weighted
    top = float(np.real(state.rho[N - 1, N - 1]))
    tail = (N * top + 2 * N * state.tail_mass) / norm
    if tail > TAIL_TOLERANCE:
        if strict and state.tail_mass <= TAIL_TOLERANCE:
            raise CutoffTooSmall(
                f"photon addition moves about {tail:.3e} probability above cutoff {N}", tail_mass=tail)
        if strict:
            raise CutoffTooSmall(f"source state already exceeds the tail bound at cutoff {N}", tail_mass=tail)
        warnings.warn(f"photon addition moves about {tail:.3e} probability above cutoff {N}",
                      TruncationWarning, stacklevel=2)
    sq = np.sqrt(np.arange(1, N))
    rho = np.zeros_like(state.rho)
    rho[1:, 1:] = sq[:, None] * state.rho[:-1, :-1] * sq[None, :]
    return _finish(rho, state.params, "photon_added", tail, inner=state.kind, order=state.order)


# -- functionals ---------------------------------------------------------------

def equal_overlap_q(alpha: complex, nbar: float) -> float:
    """Coherent weight q that gives the MTCS the same <a|rho|a> as the DTS."""
    if nbar < 0:
        raise DomainError("nbar must be non-negative")
    e = math.exp(-abs(complex(alpha)) ** 2 / (1.0 + nbar))
    den = nbar + 1.0 - e
    if den == 0.0:
        return 0.0
    return (1.0 - e) / den


def coherent_overlap(state: FieldState, alpha: complex) -> float:
    """<a|rho|a> from the truncated density matrix."""
    psi = coherent_amplitudes(alpha, state.dim)
    return float(np.real(psi.conj() @ state.rho @ psi))


def purity_deficit(state: FieldState) -> float:
    """Mixedness 1 - Tr(rho^2)."""
    rho = state.rho
    return float(1.0 - np.real(np.vdot(rho, rho)))


def photon_distribution(state: FieldState) -> np.ndarray:
    """P(n) = <n|rho|n>, indexed by n."""
    return np.real(np.diag(state.rho)).copy()


def local_maxima(p: np.ndarray, rel_floor: float = 1e-12) -> list[int]:
    """Indices of strict local maxima, the ends included, ignoring numerical dust."""
    p = np.asarray(p, dtype=float)
    floor = rel_floor * float(np.max(p))
    peaks = []
    for n in range(len(p)):
        if p[n] <= floor:
            continue
        left = p[n - 1] if n > 0 else -np.inf
        right = p[n + 1] if n + 1 < len(p) else -np.inf
        if p[n] > left and p[n] > right:
            peaks.append(n)
    return peaks


# -- closed forms --------------------------------------------------------------

def _dts_diagonal(alpha_sq: float, nbar: float, count: int) -> np.ndarray:
    """P(n) = eps t^n exp(-eps |a|^2) L_n(-|a|^2 / (nbar (1 + nbar))), t = nbar eps.

    The Laguerre recurrence is run on u_n = t^n L_n(...) directly; written that
    way every coefficient stays bounded as nbar -> 0.
    """
    eps = 1.0 / (1.0 + nbar)
    t = nbar * eps
    tx = alpha_sq * eps * eps
    u = np.empty(count)
    u[0] = eps * math.exp(-eps * alpha_sq)
    if count > 1:
        u[1] = (t + tx) * u[0]
    for j in range(1, count - 1):
        u[j + 1] = (((2 * j + 1) * t + tx) * u[j] - j * t * t * u[j - 1]) / (j + 1)
    return u


def closed_form_element(kind: str, n: int, m: int, params: FieldParams) -> complex:
    """<n|rho|m> of the untruncated DTS or MTCS.

    DTS, for m >= n:
    sqrt(n!/m!) nbar^n eps^(m+1) exp(-eps |a|^2) |a|^(m-n) e^{i(n-m)theta}
    L_n^(m-n)(-|a|^2 / (nbar (1 + nbar))), with eps = 1/(1+nbar); the other
    triangle is the complex conjugate.
    """
    if kind == "mtcs":
        q = 1.0 if params.q is None else params.q
        r2 = params.alpha_sq
        val = 0j
        if n == m:
            val += (1 - q) * params.epsilon * _thermal_ratio(params.nbar) ** n
        if q:
            log_mag = -r2 + (n + m) * 0.5 * math.log(r2) - 0.5 * (gammaln(n + 1) + gammaln(m + 1)) if r2 else None
            if log_mag is not None:
                val += q * math.exp(log_mag) * np.exp(1j * (n - m) * params.theta)
            elif n == m == 0:
                val += q
        return complex(val)
    if kind != "dts":
        raise ValueError(f"closed form available for 'dts' and 'mtcs', not {kind!r}")
    if params.nbar <= 0:
        raise DomainError("the DTS closed form needs nbar > 0; use the coherent-state limit")
    if n > m:
        return complex(np.conj(closed_form_element(kind, m, n, params)))
    nbar, r2, eps = params.nbar, params.alpha_sq, params.epsilon
    k = m - n
    if r2 == 0:
        return complex(eps * _thermal_ratio(nbar) ** n) if k == 0 else 0j
    lag = laguerre(n, k, -r2 / (nbar * (1.0 + nbar)))
    log_mag = (0.5 * (gammaln(n + 1) - gammaln(m + 1)) + n * math.log(nbar) + (m + 1) * math.log(eps)
               - eps * r2 + 0.5 * k * math.log(r2))
    return complex(math.exp(log_mag) * lag * np.exp(1j * (n - m) * params.theta))


def closed_form_matrix(kind: str, params: FieldParams) -> np.ndarray:
    N = params.cutoff
    out = np.empty((N, N), dtype=complex)
    for n in range(N):
        for m in range(n, N):
            out[n, m] = closed_form_element(kind, n, m, params)
            out[m, n] = np.conj(out[n, m])
    return out


def dts_overlap_closed_form(nbar: float) -> float:
    return 1.0 / (1.0 + nbar)


def mtcs_overlap_closed_form(alpha: complex, nbar: float, q: float) -> float:
    return q + (1 - q) * math.exp(-abs(complex(alpha)) ** 2 / (1 + nbar)) / (1 + nbar)


def dts_mixedness_closed_form(nbar: float) -> float:
    return 2 * nbar / (1 + 2 * nbar)


def mtcs_mixedness_closed_form(alpha: complex, nbar: float, q: float) -> float:
    e = math.exp(-abs(complex(alpha)) ** 2 / (1 + nbar))
    return 1 - q**2 - (1 - q) ** 2 / (1 + 2 * nbar) - 2 * q * (1 - q) * e / (1 + nbar)


def photon_added_overlap_factor(kind: str, alpha: complex, nbar: float, q: float | None = None) -> float:
    """Ratio <a|rho~|a> / <a|rho|a>, i.e. |a|^2 / (1 + <n>)."""
    r2 = abs(complex(alpha)) ** 2
    if kind == "dts":
        return r2 / (1 + nbar + r2)
    if kind == "mtcs":
        return r2 / (1 + (1 - q) * nbar + q * r2)
    raise ValueError(kind)
