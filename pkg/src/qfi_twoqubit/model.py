"""Two flip-flop coupled qubits, each decaying into its own Markovian bath.

Everything here uses the ordering |ee>, |eg>, |ge>, |gg> (qubit A first).
The closed-form pieces (``analytic_state``, ``analytic_eigensystem``,
``reduced_state_B``) assume equal decay rates; the numerical propagator
handles any pair of rates.
"""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import check_density_matrix, dagger, max_abs

__all__ = [
    "SIGMA_PLUS",
    "SIGMA_MINUS",
    "ModelParams",
    "InitialStateParams",
    "AnalyticEigensystem",
    "build_hamiltonian",
    "build_initial_state",
    "lindblad_rhs",
    "liouvillian",
    "evolve_numeric",
    "analytic_state",
    "analytic_eigensystem",
    "reduced_state_B",
    "excited_population_B",
    "X_STATE_MASK",
    "x_state_leakage",
]

# single-qubit basis (e, g): S+ maps g -> e
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
_I2 = np.eye(2, dtype=complex)

S_PLUS_A = np.kron(SIGMA_PLUS, _I2)
S_MINUS_A = np.kron(SIGMA_MINUS, _I2)
S_PLUS_B = np.kron(_I2, SIGMA_PLUS)
S_MINUS_B = np.kron(_I2, SIGMA_MINUS)

# entries allowed to be nonzero in an X-state of this family
X_STATE_MASK = np.array(
    [[1, 0, 0, 1],
     [0, 1, 1, 0],
     [0, 1, 1, 0],
     [1, 0, 0, 1]], dtype=bool)

DEFAULT_DT = 1e-3
STATE_TOL = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Coupling ``v`` and decay rates of qubits A and B (hbar = 1).

    ``coupling_prefactor`` multiplies ``v`` in the flip-flop Hamiltonian; see
    :func:`build_hamiltonian` for why the default is 1.
    """

    v: float
    gamma_a: float
    gamma_b: float
    coupling_prefactor: float = 1.0

    def __post_init__(self):
        for name in ("v", "gamma_a", "gamma_b", "coupling_prefactor"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")
        if self.gamma_a < 0:
            raise ValueError(f"gamma_a must be >= 0, got {self.gamma_a}")
        if self.gamma_b < 0:
            raise ValueError(f"gamma_b must be >= 0, got {self.gamma_b}")

    @classmethod
    def equal_rates(cls, v, gamma, **kw):
        return cls(v, gamma, gamma, **kw)

    @property
    def common_gamma(self):
        """The shared decay rate; raises if the two rates differ."""
        if self.gamma_a != self.gamma_b:
            raise ValueError(
                f"closed-form solution needs gamma_a == gamma_b, got {self.gamma_a} and {self.gamma_b}")
        return self.gamma_a


@dataclass(frozen=True)
class InitialStateParams:
    """Population ``a`` of |ee> (times 3) and relative phase ``chi`` of the
    |eg>, |ge> coherence."""

    a: float
    chi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.a <= 1.0):
            raise ValueError(f"a must lie in [0, 1], got {self.a}")
        if not math.isfinite(self.chi):
            raise ValueError(f"chi must be finite, got {self.chi}")

    @property
    def d(self):
        return 1.0 - self.a

    @property
    def z(self):
        return complex(math.cos(self.chi), math.sin(self.chi))


def build_hamiltonian(v, prefactor=1.0):
    """Flip-flop interaction ``prefactor * v * (S_A+ S_B- + S_A- S_B+)``.

    Only the |eg>, |ge> block is populated. The operator written with an
    explicit 1/2, ``(v/2)(S_A+ S_B- + h.c.)``, is ``prefactor=0.5``. The
    closed-form state in :func:`analytic_state` (oscillating as sin(2vt)) is
    what the master equation produces with ``prefactor=1``, so that is the
    default used throughout the package.
    """
    return prefactor * v * (S_PLUS_A @ S_MINUS_B + S_MINUS_A @ S_PLUS_B)


def build_initial_state(p):
    """X-shaped mixture ``(a|ee><ee| + (1-a)|gg><gg| + |psi><psi|)/3`` with
    ``|psi> = |eg> + z|ge>``."""
    z = p.z
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = p.a
    rho[1, 1] = rho[2, 2] = 1.0
    rho[1, 2] = z
    rho[2, 1] = z.conjugate()
    rho[3, 3] = p.d
    return rho / 3.0


def _jump_terms(mp):
    return ((mp.gamma_a, S_PLUS_A, S_MINUS_A), (mp.gamma_b, S_PLUS_B, S_MINUS_B))


def lindblad_rhs(rho, mp):
    """d(rho)/dt = -i[H, rho] - sum_j (g_j/2)(S+S- rho - 2 S- rho S+ + rho S+S-)."""
    rho = np.asarray(rho, dtype=complex)
    h = build_hamiltonian(mp.v, mp.coupling_prefactor)
    out = -1j * (h @ rho - rho @ h)
    for g, sp, sm in _jump_terms(mp):
        if g == 0:
            continue
        n = sp @ sm
        out -= 0.5 * g * (n @ rho - 2.0 * sm @ rho @ sp + rho @ n)
    return out


def liouvillian(mp):
    """16x16 generator acting on row-major ``rho.ravel()``.

    Uses ``vec(A X B) = kron(A, B.T) vec(X)`` for row-major flattening.
    """
    i4 = np.eye(4, dtype=complex)
    h = build_hamiltonian(mp.v, mp.coupling_prefactor)
    gen = -1j * (np.kron(h, i4) - np.kron(i4, h.T))
    for g, sp, sm in _jump_terms(mp):
        n = sp @ sm
        gen -= 0.5 * g * (np.kron(n, i4) - 2.0 * np.kron(sm, sp.T) + np.kron(i4, n.T))
    return gen


def _rk4_step_matrix(gen, h):
    # classical RK4 applied to y' = G y collapses to the degree-4 Taylor polynomial of hG
    x = h * gen
    step = np.eye(gen.shape[0], dtype=complex)
    term = np.eye(gen.shape[0], dtype=complex)
    for k in range(1, 5):
        term = term @ x / k
        step = step + term
    return step


def _rk4_adaptive(gen, y, t, tol, h0):
    def step(y, h):
        k1 = gen @ y
        k2 = gen @ (y + 0.5 * h * k1)
        k3 = gen @ (y + 0.5 * h * k2)
        k4 = gen @ (y + h * k3)
        return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    s, h = 0.0, h0
    while s < t:
        h = min(h, t - s)
        big = step(y, h)
        small = step(step(y, 0.5 * h), 0.5 * h)
        err = np.max(np.abs(small - big)) / 15.0
        if err <= tol or h < 1e-12:
            y = small
            s += h
        fac = 2.0 if err == 0 else min(2.0, max(0.2, 0.9 * (tol / err) ** 0.2))
        h *= fac
    return y


def evolve_numeric(rho0, mp, t, dt=DEFAULT_DT, tol=None, state_tol=STATE_TOL):
    """Integrate the master equation from ``rho0`` up to time ``t``.

    With ``tol=None`` this is fixed-step RK4 with ``ceil(t/dt)`` equal steps;
    otherwise RK4 with step doubling, keeping the local error estimate below
    ``tol``. Raises ``ValueError`` if the result drifts out of the set of
    density matrices by more than ``state_tol``.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    rho0 = np.asarray(rho0, dtype=complex)
    if t == 0:
        return rho0.copy()
    gen = liouvillian(mp)
    y0 = rho0.ravel()
    if tol is None:
        n = max(1, math.ceil(t / dt - 1e-9))
        y = np.linalg.matrix_power(_rk4_step_matrix(gen, t / n), n) @ y0
    else:
        y = _rk4_adaptive(gen, y0, t, tol, dt)
    rho = y.reshape(4, 4)
    try:
        check_density_matrix(rho, herm_tol=state_tol, trace_tol=state_tol, psd_tol=state_tol)
    except ValueError as exc:
        raise ValueError(f"integration left the state space ({exc}); use a smaller dt or tol") from None
    return rho


def analytic_state(p, gamma, v, t):
    """Closed-form rho(t) for equal decay rates ``gamma``.

    With ``p(t) = exp(gamma t)`` the X-state entries are

        rho11 = a p(-t)^2 / 3
        rho22 = p(-t)^2 [p(t)(a - sin chi sin 2vt + 1) - a] / 3
        rho33 = p(-t)^2 [p(t)(a + sin chi sin 2vt + 1) - a] / 3
        rho23 = p(-t) z* [(z^2 - 1) cos 2vt + z^2 + 1] / 6
        rho44 = 1 - rho11 - rho22 - rho33
    """
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    a, z = p.a, p.z
    q = math.exp(-gamma * t)
    pt = math.exp(gamma * t) if q > 0 else math.inf
    sc = math.sin(p.chi) * math.sin(2 * t * v)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = a * q * q / 3
    if q > 0:
        rho[1, 1] = q * q * (pt * (a - sc + 1) - a) / 3
        rho[2, 2] = q * q * (pt * (a + sc + 1) - a) / 3
    rho[1, 2] = q * z.conjugate() * ((z * z - 1) * math.cos(2 * t * v) + z * z + 1) / 6
    rho[2, 1] = rho[1, 2].conjugate()
    rho[3, 3] = 1 - rho[0, 0] - rho[1, 1] - rho[2, 2]
    return rho


@dataclass(frozen=True)
class AnalyticEigensystem:
    """Closed-form spectrum of rho(t), in the order (lambda_1..lambda_4).

    ``vectors`` holds the matching normalized eigenvectors as columns;
    ``gamma_factor`` and ``delta`` are the auxiliary quantities entering the
    two vectors inside the |eg>, |ge> block, and ``norms`` are the
    normalization constants applied to each of the four raw vectors.
    """

    lambdas: np.ndarray
    vectors: np.ndarray
    gamma_factor: complex
    delta: float
    norms: np.ndarray


def analytic_eigensystem(p, gamma, v, t):
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    a, chi = p.a, p.chi
    q = math.exp(-gamma * t)
    lam = np.array([
        a * q * q / 3,
        a * (q - q * q) / 3,
        (a * q * q - 2 * (a + 1) * q) / 3 + 1,
        ((a + 2) * q - a * q * q) / 3,
    ])
    gf = 2 * np.exp(2j * chi) * math.sin(t * v) ** 2 + math.cos(2 * t * v) + 1
    delta = math.sin(chi) * math.sin(2 * t * v)
    e = np.exp(1j * chi)
    raw = np.array([
        [1, 0, 0, 0],
        [0, -2 * e * (delta + 1), gf, 0],
        [0, 0, 0, 1],
        [0, -2 * e * (delta - 1), gf, 0],
    ], dtype=complex).T
    norms = np.linalg.norm(raw, axis=0)
    return AnalyticEigensystem(lam, raw / norms, complex(gf), delta, 1.0 / norms)


def excited_population_B(p, gamma, v, t):
    """Excited-state population of qubit B, ``exp(-gamma t) Omega(t) / 3``
    with ``Omega(t) = 1 + a + sin(2vt) sin(chi)``."""
    if t == 0:
        return (1 + p.a) / 3
    omega = 1 + p.a + math.sin(2 * v * t) * math.sin(p.chi)
    return math.exp(-gamma * t) * omega / 3


def reduced_state_B(p, gamma, v, t):
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    q = excited_population_B(p, gamma, v, t)
    return np.diag([q, 1 - q]).astype(complex)


def x_state_leakage(rho):
    """Largest entry outside the X pattern."""
    return max_abs(np.where(X_STATE_MASK, 0, rho))

