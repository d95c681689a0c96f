"""Small dense complex linear algebra for 2x2 and 4x4 operators.

Two-qubit operators use the basis ordering |ee>, |eg>, |ge>, |gg>, i.e. the
Kronecker product of single-qubit bases ordered (e, g) with qubit A first.
"""

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10

__all__ = [
    "SpectralDecomposition",
    "hermitian_eig",
    "partial_trace_over_A",
    "partial_trace_over_B",
    "check_density_matrix",
    "is_density_matrix",
    "dagger",
    "commutator",
    "anticommutator",
    "max_abs",
]


def dagger(m):
    return np.conj(np.transpose(m))


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


def max_abs(m):
    """Max-entry norm ``max |m_ij|``."""
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


def _as_square(m, name="matrix"):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) with eigenvectors stored as columns.

    ``support_cutoff`` is the threshold below which eigenvalue sums are
    treated as outside the support of the state.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    support_cutoff: float = 0.0

    @property
    def dim(self):
        return len(self.eigenvalues)

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)

    def to_eigenbasis(self, op):
        """Matrix elements <k|op|k'> in the eigenbasis."""
        v = self.eigenvectors
        return dagger(v) @ op @ v


def hermitian_eig(m, tol=HERMITIAN_TOL, support_cutoff=0.0):
    """Eigendecomposition of a Hermitian matrix.

    Raises ``ValueError`` if ``m`` is not Hermitian to within ``tol`` in the
    max-entry norm; the offending norm is quoted in the message.
    """
    m = _as_square(m)
    asym = max_abs(m - dagger(m))
    if asym > tol:
        raise ValueError(f"matrix is not Hermitian: max|M - M^dagger| = {asym:.3e} > {tol:.1e}")
    # symmetrize so LAPACK sees an exactly Hermitian input
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    return SpectralDecomposition(w, v, support_cutoff)


def _split(rho, dim_a, dim_b):
    rho = _as_square(rho, "rho")
    if rho.shape[0] != dim_a * dim_b:
        raise ValueError(f"rho must be {dim_a * dim_b}x{dim_a * dim_b}, got {rho.shape}")
    return rho.reshape(dim_a, dim_b, dim_a, dim_b)


def partial_trace_over_A(rho, dim_a=2, dim_b=2):
    """Reduced state of qubit B, ``Tr_A(rho)``."""
    return np.einsum("ijik->jk", _split(rho, dim_a, dim_b))


def partial_trace_over_B(rho, dim_a=2, dim_b=2):
    return np.einsum("ijkj->ik", _split(rho, dim_a, dim_b))


def check_density_matrix(rho, herm_tol=1e-12, trace_tol=TRACE_TOL, psd_tol=PSD_TOL, name="rho"):
    """Validate Hermiticity, unit trace and positivity; return ``rho`` as an array.

    Raises ``ValueError`` naming the first violated property.
    """
    rho = _as_square(rho, name)
    asym = max_abs(rho - dagger(rho))
    if asym > herm_tol:
        raise ValueError(f"{name} is not Hermitian (max|M - M^dagger| = {asym:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"{name} does not have unit trace (Tr = {tr:.12g})")
    lo = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0]
    if lo < -psd_tol:
        raise ValueError(f"{name} is not positive semidefinite (min eigenvalue {lo:.3e})")
    return rho


def is_density_matrix(rho, **tols):
    try:
        check_density_matrix(rho, **tols)
    except ValueError:
        return False
    return True
