"""Closed-form vs numerical cross-checks, run by ``qfi-twoqubit verify``.

Each check compares a closed-form result with an independent numerical
route (master-equation integration, numerical diagonalization, finite
difference QFI, Wootters concurrence, SLD construction). ``findings`` are
measured quantities reported alongside, without a pass/fail verdict.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .entanglement import concurrence, concurrence_initial
from .linalg import hermitian_eig, max_abs, partial_trace_over_A
from .model import (
    InitialStateParams,
    ModelParams,
    analytic_eigensystem,
    analytic_state,
    build_initial_state,
    evolve_numeric,
    reduced_state_B,
)
from .qfi import (
    SUPPORT_CUTOFF,
    decoherent_limit_exponent,
    qfi_from_sld,
    qfi_gamma_closed,
    qfi_of_family,
    qfi_spectral,
    qfi_v_closed,
    sld,
    unitary_limit_constant,
    unitary_limit_ratio,
)

A_GRID = (0.0, 0.3, 0.5, 0.8, 1.0)
CHI_GRID = (0.0, 0.5, math.pi / 2, 2.0)
V_GRID = (0.0, 0.2, 1.0)
GAMMA_GRID = (0.0, 0.1, 1.0)
T_GRID = (0.0, 1.0, 5.0, 20.0)


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


@dataclass
class Report:
    checks: list = field(default_factory=list)
    findings: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def table(self):
        width = max(len(c.name) for c in self.checks)
        lines = [f"{'check'.ljust(width)}  result  measured    tolerance"]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{c.name.ljust(width)}  {status:6}  {c.measured:.3e}   {c.tolerance:.1e}  {c.detail}")
        return "\n".join(lines)


def grid(a=A_GRID, chi=CHI_GRID, v=V_GRID, gamma=GAMMA_GRID, t=T_GRID):
    return itertools.product(a, chi, v, gamma, t)


def rel_err(x, ref, floor=1e-300):
    if x == ref:
        return 0.0
    return abs(x - ref) / max(abs(ref), floor)


def check_analytic_state(dt=1e-3, prefactor=1.0, tol=1e-8):
    worst = 0.0
    for a, chi, v, g, t in grid():
        p = InitialStateParams(a, chi)
        num = evolve_numeric(build_initial_state(p), ModelParams(v, g, g, prefactor), t, dt=dt)
        worst = max(worst, max_abs(num - analytic_state(p, g, v, t)))
    return Check("closed-form rho(t) vs master-equation RK4", worst <= tol, worst, tol)


def check_spectrum(tol=1e-8):
    worst = worst_trace = worst_vec = 0.0
    for a, chi, v, g, t in grid():
        p = InitialStateParams(a, chi)
        rho = analytic_state(p, g, v, t)
        es = analytic_eigensystem(p, g, v, t)
        worst = max(worst, np.max(np.abs(np.sort(es.lambdas) - hermitian_eig(rho).eigenvalues)))
        worst_trace = max(worst_trace, abs(es.lambdas.sum() - 1))
        worst_vec = max(worst_vec, max_abs(rho @ es.vectors - es.vectors * es.lambdas))
    measured = max(worst, worst_vec)
    ok = worst <= tol and worst_vec <= tol and worst_trace <= 1e-10
    return Check("closed-form spectrum vs numerical eigh", ok, measured, tol,
                 f"eigvec residual {worst_vec:.1e}, |sum-1| {worst_trace:.1e}")


def fd_qfi_gamma(p, g, v, t, h=None, cutoff=SUPPORT_CUTOFF):
    return qfi_of_family(lambda x: analytic_state(p, x, v, t), g, h=h, lower_bound=0.0, cutoff=cutoff)


def fd_qfi_v(p, g, v, t, h=None, cutoff=SUPPORT_CUTOFF):
    return qfi_of_family(lambda x: reduced_state_B(p, g, x, t), v, h=h, cutoff=cutoff)


def check_qfi_gamma(tol=1e-5, h=None, cutoff=SUPPORT_CUTOFF):
    worst = worst_q = worst_inv = 0.0
    for a, chi, v, g, t in grid(gamma=(0.1, 1.0), t=(1.0, 5.0, 20.0)):
        p = InitialStateParams(a, chi)
        closed = qfi_gamma_closed(a, g, t)
        fd = fd_qfi_gamma(p, g, v, t, h, cutoff)
        worst = max(worst, rel_err(fd.value, closed))
        worst_q = max(worst_q, fd.quantum_part)
    for a, g, t in itertools.product(A_GRID, (0.1, 1.0), (1.0, 5.0, 20.0)):
        vals = [fd_qfi_gamma(InitialStateParams(a, chi), g, v, t, h, cutoff).value
                for v in V_GRID for chi in (0.0, 0.5, math.pi / 2)]
        worst_inv = max(worst_inv, (max(vals) - min(vals)) / max(vals))
    ok = worst <= tol and worst_q <= 1e-8 and worst_inv <= 1e-6
    return Check("F_gamma closed form vs FD-QFI", ok, worst, tol,
                 f"quantum part {worst_q:.1e}, v/chi spread {worst_inv:.1e}")


def check_qfi_v(tol=1e-5, h=None, cutoff=SUPPORT_CUTOFF):
    worst = 0.0
    for a, chi, v, g, t in grid(t=(1.0, 5.0, 20.0)):
        p = InitialStateParams(a, chi)
        closed = qfi_v_closed(a, chi, g, v, t)
        fd = fd_qfi_v(p, g, v, t, h, cutoff).value
        err = abs(fd - closed) if closed < 1e-12 else rel_err(fd, closed)
        worst = max(worst, err)
    return Check("F_v closed form vs FD-QFI of qubit B", worst <= tol, worst, tol)


def check_reduced_state(tol=1e-10):
    worst = 0.0
    for a, chi, v, g, t in grid():
        p = InitialStateParams(a, chi)
        worst = max(worst, max_abs(partial_trace_over_A(analytic_state(p, g, v, t)) - reduced_state_B(p, g, v, t)))
    return Check("closed-form rho_B vs partial trace", worst <= tol, worst, tol)


def check_concurrence(tol=1e-10):
    worst = 0.0
    for a, chi in itertools.product((0.0, 0.25, 0.5, 0.75, 1.0), (0.0, 1.0, math.pi / 2)):
        worst = max(worst, abs(concurrence(build_initial_state(InitialStateParams(a, chi))) - concurrence_initial(a)))
    return Check("initial concurrence closed form vs Wootters", worst <= tol, worst, tol)


def random_state(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_traceless_hermitian(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = 0.5 * (g + g.conj().T)
    return h - np.trace(h).real / dim * np.eye(dim)


def check_sld_vs_spectral(n=100, seed=2014, tol=1e-9, cutoff=SUPPORT_CUTOFF):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n):
        dim = 2 if i % 2 == 0 else 4
        rho = random_state(rng, dim)
        drho = random_traceless_hermitian(rng, dim)
        sd = hermitian_eig(rho)
        a = qfi_from_sld(rho, sld(sd, drho, cutoff))
        b = qfi_spectral(sd, drho, cutoff).value
        worst = max(worst, rel_err(a, b))
    return Check("Tr(rho L^2) vs spectral QFI (random states)", worst <= tol, worst, tol)


def findings():
    out = {}
    # literal (v/2) coupling: mismatch with the closed form, and agreement once v is doubled
    mism = match = 0.0
    for a, chi, v, g, t in grid(v=(0.2, 1.0), t=(1.0, 5.0, 20.0)):
        p = InitialStateParams(a, chi)
        rho0 = build_initial_state(p)
        ref = analytic_state(p, g, v, t)
        mism = max(mism, max_abs(evolve_numeric(rho0, ModelParams(v, g, g, 0.5), t) - ref))
        match = max(match, max_abs(evolve_numeric(rho0, ModelParams(2 * v, g, g, 0.5), t) - ref))
    out["half_coupling_max_deviation"] = mism
    out["half_coupling_at_doubled_v_max_deviation"] = match

    full = decoherent_limit_exponent(0.5, 1.0, (10.0, 20.0))
    out["decoherent_exponent"] = {
        "window": [10.0, 20.0],
        "with_log_t_term": full,
        "first_half": decoherent_limit_exponent(0.5, 1.0, (10.0, 15.0)),
        "second_half": decoherent_limit_exponent(0.5, 1.0, (15.0, 20.0)),
        "plain_log_slope": decoherent_limit_exponent(0.5, 1.0, (10.0, 20.0), log_t_term=False),
        "closer_to": 1 if abs(full - 1) < abs(full - 2) else 2,
    }
    out["unitary_limit"] = {
        str(a): {
            "ratio_gt_1e-3": unitary_limit_ratio(a, 1.0, 1e-3),
            "ratio_gt_1e-4": unitary_limit_ratio(a, 1.0, 1e-4),
            "a_over_3": a / 3,
            "limit": unitary_limit_constant(a),
        }
        for a in (0.3, 0.6, 1.0)
    }
    return out


def run_all(dt=1e-3, fd_step=None, cutoff=SUPPORT_CUTOFF):
    report = Report()
    report.checks = [
        check_analytic_state(dt=dt),
        check_spectrum(),
        check_reduced_state(),
        check_qfi_gamma(h=fd_step, cutoff=cutoff),
        check_qfi_v(h=fd_step, cutoff=cutoff),
        check_concurrence(),
        check_sld_vs_spectral(cutoff=cutoff),
    ]
    report.findings = findings()
    return report
