"""Fisher information: classical, SLD-based and spectral quantum Fisher
information, the Cramer-Rao bound, and closed forms for the two-qubit model.
"""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import dagger, hermitian_eig, max_abs

__all__ = [
    "SUPPORT_CUTOFF",
    "DEGENERACY_GAP",
    "ParamDerivative",
    "QfiValue",
    "classical_fisher",
    "default_fd_step",
    "state_derivative_fd",
    "sld",
    "qfi_from_sld",
    "qfi_spectral",
    "qfi_of_family",
    "qcr_bound",
    "qfi_gamma_closed",
    "qfi_v_closed",
    "unitary_limit_ratio",
    "unitary_limit_constant",
    "fit_decay_exponent",
    "decoherent_limit_exponent",
    "derivative_defects",
]

SUPPORT_CUTOFF = 1e-10
DEGENERACY_GAP = 1e-9
# absolute eigenvalue noise of a unit-trace state in double precision
NOISE_FLOOR = 1e-15


def classical_fisher(probs, dprobs, cutoff=SUPPORT_CUTOFF):
    """Sum of ``dp_i**2 / p_i`` over outcomes with ``p_i > cutoff``.

    A skipped outcome must have ``|dp_i| <= sqrt(cutoff)``; otherwise
    information would sit at a vanishing probability and ``ValueError`` is
    raised.
    """
    p = np.asarray(probs, dtype=float)
    dp = np.asarray(dprobs, dtype=float)
    if p.shape != dp.shape:
        raise ValueError(f"probs and dprobs differ in shape: {p.shape} vs {dp.shape}")
    if np.any(p < -1e-12):
        raise ValueError(f"probs must be non-negative, min is {p.min():.3e}")
    if p.sum() > 1 + 1e-9:
        raise ValueError(f"probs sum to {p.sum():.12g} > 1")
    keep = p > cutoff
    if np.any(np.abs(dp[~keep]) > math.sqrt(cutoff)):
        raise ValueError("nonzero derivative at a vanishing probability; Fisher information diverges")
    return float(np.sum(dp[keep] ** 2 / p[keep]))


@dataclass(frozen=True)
class ParamDerivative:
    """Finite-difference estimate of d(rho)/d(theta) at ``theta``."""

    matrix: np.ndarray
    theta: float
    h: float
    one_sided: bool = False


def default_fd_step(theta):
    return 1e-5 * max(1.0, abs(theta))


def state_derivative_fd(state_at, theta, h=None, lower_bound=None, richardson=True):
    """Differentiate a state family with a second-order stencil.

    Central differences are used unless ``theta - h`` would cross
    ``lower_bound`` (e.g. 0 for a rate), in which case the forward
    second-order stencil ``(-3f(x) + 4f(x+h) - f(x+2h)) / 2h`` is used and
    the result is flagged ``one_sided``. With ``richardson`` the estimates at
    ``h`` and ``h/2`` are combined to cancel the O(h^2) term.
    """
    if h is None:
        h = default_fd_step(theta)
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")
    one_sided = lower_bound is not None and theta - h < lower_bound

    def stencil(s):
        if one_sided:
            f0 = np.asarray(state_at(theta))
            f1 = np.asarray(state_at(theta + s))
            f2 = np.asarray(state_at(theta + 2 * s))
            return (-3 * f0 + 4 * f1 - f2) / (2 * s)
        return (np.asarray(state_at(theta + s)) - np.asarray(state_at(theta - s))) / (2 * s)

    d = stencil(h)
    if richardson:
        d = (4 * stencil(h / 2) - d) / 3
    d = 0.5 * (d + dagger(d))
    return ParamDerivative(d, theta, h, one_sided)


def _matrix(drho):
    return drho.matrix if isinstance(drho, ParamDerivative) else np.asarray(drho, dtype=complex)


def _weights(lam, cutoff):
    s = lam[:, None] + lam[None, :]
    support = s > cutoff
    return support, np.where(support, s, 1.0)


def sld(rho, drho, cutoff=SUPPORT_CUTOFF):
    """Symmetric logarithmic derivative L solving d(rho) = (rho L + L rho)/2.

    ``rho`` is a :class:`SpectralDecomposition`. In the eigenbasis
    ``L_kk' = 2 <k|d rho|k'> / (lambda_k + lambda_k')`` on pairs whose
    eigenvalue sum exceeds ``cutoff``; the rest of L is set to zero.
    """
    lam = np.asarray(rho.eigenvalues, dtype=float)
    if not np.any(2 * lam > cutoff):
        raise ValueError("state has no support above the cutoff")
    d = rho.to_eigenbasis(_matrix(drho))
    support, s = _weights(lam, cutoff)
    lk = np.where(support, 2 * d / s, 0)
    v = rho.eigenvectors
    out = v @ lk @ dagger(v)
    return 0.5 * (out + dagger(out))


def qfi_from_sld(rho, L):
    """``Tr(rho L^2)``."""
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.trace(rho @ L @ L)))


@dataclass(frozen=True)
class QfiValue:
    """QFI split into the eigenvalue (classical) and eigenvector (quantum) parts."""

    value: float
    classical_part: float
    quantum_part: float

    def __float__(self):
        return self.value


def _align_degenerate(lam, vecs, drho, gap):
    # inside a degenerate cluster any orthonormal basis is valid; pick the one
    # diagonalizing d(rho) so the diagonal terms are the eigenvalue derivatives.
    # The gap is relative: tiny but distinct eigenvalues must not be merged.
    vecs = vecs.copy()
    n = len(lam)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and lam[stop] - lam[stop - 1] < gap * (abs(lam[stop]) + abs(lam[stop - 1])) + NOISE_FLOOR:
            stop += 1
        if stop - start > 1:
            block = vecs[:, start:stop]
            sub = dagger(block) @ drho @ block
            _, u = np.linalg.eigh(0.5 * (sub + dagger(sub)))
            vecs[:, start:stop] = block @ u
        start = stop
    return vecs


def qfi_spectral(rho, drho, cutoff=SUPPORT_CUTOFF, degeneracy_gap=DEGENERACY_GAP):
    """Spectral QFI ``sum_{k,k'} 2 |<k|d rho|k'>|^2 / (lambda_k + lambda_k')``.

    Sums run over pairs with ``lambda_k + lambda_k' > cutoff``. Diagonal
    terms equal ``(d lambda_k)^2 / lambda_k`` and form ``classical_part``;
    the off-diagonal terms equal
    ``2 (lambda_k - lambda_k')^2 / (lambda_k + lambda_k') |<k|d k'>|^2``
    and form ``quantum_part``.
    """
    lam = np.asarray(rho.eigenvalues, dtype=float)
    if not np.any(2 * lam > cutoff):
        raise ValueError("state has no support above the cutoff")
    dm = _matrix(drho)
    vecs = _align_degenerate(lam, rho.eigenvectors, dm, degeneracy_gap)
    d = dagger(vecs) @ dm @ vecs
    support, s = _weights(lam, cutoff)
    terms = np.where(support, 2 * np.abs(d) ** 2 / s, 0.0)
    classical = float(np.trace(terms))
    quantum = float(terms.sum() - classical)
    return QfiValue(classical + quantum, classical, quantum)


def qfi_of_family(state_at, theta, h=None, lower_bound=None, cutoff=SUPPORT_CUTOFF):
    """Spectral QFI of ``state_at`` at ``theta`` using a finite-difference derivative."""
    drho = state_derivative_fd(state_at, theta, h=h, lower_bound=lower_bound)
    return qfi_spectral(hermitian_eig(state_at(theta), support_cutoff=cutoff), drho, cutoff)


def qcr_bound(F, M=1):
    """Variance floor ``1/(M F)`` for an unbiased estimator from M repetitions."""
    if not F > 0:
        raise ValueError(f"Fisher information must be > 0 for a finite bound, got {F}")
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    return 1.0 / (M * F)


def qfi_gamma_closed(a, gamma, t):
    """QFI of the two-qubit state with respect to the decay rate.

        F = (t^2/3) [4(a^2-a+1)/(3p^2 - 2(a+1)p + a) + (a+2)^2/((a+2)p - a) + a/(p-1)]

    with ``p = exp(gamma t)``. Independent of ``v`` and ``chi``. Accepts an
    array for ``t``; ``t = 0`` maps to the continuous extension 0.
    """
    if not 0 <= a <= 1:
        raise ValueError(f"a must lie in [0, 1], got {a}")
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    tt = np.where(t > 0, t, 1.0)
    e = np.expm1(gamma * tt)
    # polynomials in p rewritten in e = p - 1 to avoid cancellation near p = 1
    first = 4 * (a * a - a + 1) / ((1 - a) + (4 - 2 * a) * e + 3 * e * e)
    second = (a + 2) ** 2 / (2 + (a + 2) * e)
    third = a / e
    out = np.where(t > 0, tt * tt / 3 * (first + second + third), 0.0)
    return float(out) if out.ndim == 0 else out


def qfi_v_closed(a, chi, gamma, v, t):
    """QFI of qubit B's reduced state with respect to the coupling.

        F = [2 t sin(chi) cos(2vt)]^2 / (Omega (3 exp(gamma t) - Omega)),
        Omega = 1 + a + sin(2vt) sin(chi)
    """
    if not 0 <= a <= 1:
        raise ValueError(f"a must lie in [0, 1], got {a}")
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    omega = 1 + a + np.sin(2 * v * t) * np.sin(chi)
    den = omega * (3 * np.exp(gamma * t) - omega)
    num = (2 * t * np.sin(chi) * np.cos(2 * v * t)) ** 2
    if np.any((den <= 0) & (num > 0)):
        raise ValueError("non-positive denominator in coupling QFI; parameters out of range")
    out = np.where(num > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


def unitary_limit_ratio(a, gamma, t):
    """``F_gamma(t) (exp(gamma t) - 1) / t^2``; a function of ``gamma t`` only."""
    if not (gamma > 0 and t > 0):
        raise ValueError("gamma and t must both be > 0")
    return qfi_gamma_closed(a, gamma, t) * math.expm1(gamma * t) / (t * t)


def unitary_limit_constant(a):
    """Limit of :func:`unitary_limit_ratio` as ``gamma t -> 0``.

    Only the ``a/(p-1)`` term survives for ``a < 1``, giving ``a/3``. At
    ``a = 1`` the first denominator ``(3p-1)(p-1)`` also vanishes and adds
    ``2/3``, so the limit is 1.
    """
    if not 0 <= a <= 1:
        raise ValueError(f"a must lie in [0, 1], got {a}")
    return 1.0 if a == 1 else a / 3


def fit_decay_exponent(t, values, gamma, log_t_term=True):
    """Decay rate of ``values`` in units of ``gamma``.

    Least squares of ``ln F`` against ``[1, t]`` (plus ``ln t`` when
    ``log_t_term``), returning ``-slope/gamma``. The ``ln t`` regressor
    absorbs a power-law prefactor such as ``t^2`` exactly, so
    ``t^k exp(-m gamma t)`` gives ``m`` for any k.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.size < 10:
        raise ValueError(f"need at least 10 samples in the fit window, got {t.size}")
    if np.any(y <= 0):
        raise ValueError("values must be positive to fit a log-linear decay")
    cols = [np.ones_like(t), t]
    if log_t_term:
        if np.any(t <= 0):
            raise ValueError("log-t term needs t > 0")
        cols.append(np.log(t))
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), np.log(y), rcond=None)
    return float(-coef[1] / gamma)


def decoherent_limit_exponent(a, gamma, t_window, n_samples=200, log_t_term=True):
    """Measured exponential decay multiple of ``F_gamma`` over ``t_window``.

    ``gamma * t_window[0]`` must be at least 10.
    """
    t0, t1 = t_window
    if gamma * t0 < 10:
        raise ValueError(f"window must satisfy gamma*t >= 10, got gamma*t0 = {gamma * t0}")
    if n_samples < 10 or t1 <= t0:
        raise ValueError("window too narrow: need t1 > t0 and at least 10 samples")
    t = np.linspace(t0, t1, n_samples)
    return fit_decay_exponent(t, qfi_gamma_closed(a, gamma, t), gamma, log_t_term=log_t_term)


def derivative_defects(drho):
    """(Hermiticity, trace) defects of a derivative matrix; both should be ~0."""
    m = _matrix(drho)
    return max_abs(m - dagger(m)), abs(np.trace(m))
