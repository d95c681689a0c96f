"""Two-qubit concurrence."""

import math

import numpy as np

from .linalg import check_density_matrix

__all__ = ["SIGMA_Y", "concurrence", "concurrence_initial", "spin_flip"]

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
_YY = np.kron(SIGMA_Y, SIGMA_Y)


def spin_flip(rho):
    """``(sy x sy) rho* (sy x sy)`` with ``rho*`` conjugated entrywise."""
    return _YY @ np.conj(rho) @ _YY


def concurrence(rho):
    """Wootters concurrence ``max(0, s1 - s2 - s3 - s4)``.

    ``s_i`` are the square roots, in decreasing order, of the eigenvalues of
    ``rho @ spin_flip(rho)``. They are computed as the singular values of
    ``sqrt(rho) @ sqrt(spin_flip(rho))``, which avoids square roots of tiny,
    rounding-dominated eigenvalues near rank-deficient states.
    """
    rho = check_density_matrix(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"concurrence needs a 4x4 two-qubit state, got {rho.shape}")
    w, u = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    root = (u * np.sqrt(np.clip(w, 0.0, None))) @ u.conj().T
    s = np.linalg.svd(root @ spin_flip(root), compute_uv=False)
    return float(max(0.0, s[0] - s[1:].sum()))


def concurrence_initial(a):
    """Concurrence of the initial X-state family, ``(2/3)(1 - sqrt(a(1-a)))``."""
    if not 0 <= a <= 1:
        raise ValueError(f"a must lie in [0, 1], got {a}")
    return 2.0 / 3.0 * (1.0 - math.sqrt(a * (1.0 - a)))
