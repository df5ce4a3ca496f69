"""Resolvent convergence under scaling of the measures, and gamma-consistency.

Scaling a fixed pair by ``c -> infinity`` on a fixed mesh is a penalty
method: the resolvents converge to the resolvent restricted to the kernel
of ``B + J``, which is the Dirichlet resolvent when ``B + J`` is definite
on the boundary block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .checks import CheckReport
from .forms import assemble_operator, dirichlet_operator, zero_extend
from .measures import BoundaryMeasure, JumpMeasure, scale_pair
from .mesh import Mesh
from .spectral import dirichlet_principle_solve, energy_functional, resolvent_apply

MONOTONE_TOL = 1e-12


@dataclass
class ConvergenceTable:
    """Per-scaling resolvent data.

    ``distances[k] = ||u_k - u_limit||_M`` with ``u_k = lam R_k f``;
    ``quadratic_values[k] = (f, R_k f)_M``; ``monotone[k]`` says whether
    entry ``k`` does not exceed entry ``k - 1`` (True for ``k = 0``).
    """

    scalings: list
    distances: list
    quadratic_values: list
    monotone: list
    limit_value: float
    neumann_value: float
    lam: float

    def rows(self):
        return [{"scaling": c, "distance": d, "quadratic_value": q, "monotone": m}
                for c, d, q, m in zip(self.scalings, self.distances, self.quadratic_values, self.monotone)]


def _as_nodal(f, mesh: Mesh) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.ndim == 0:
        return np.full(mesh.n_nodes, float(f))
    if f.shape != (mesh.n_nodes,):
        raise ValueError(f"f must be a scalar or have shape ({mesh.n_nodes},), got {f.shape}")
    return f


def penalty_is_dirichlet(kappa: BoundaryMeasure, theta: JumpMeasure, mesh: Mesh) -> bool:
    """True iff the boundary block of ``B + J`` is positive definite."""
    F = assemble_operator(kappa, theta, mesh)
    bn = mesh.boundary_nodes
    C = (F.B + F.J).toarray()[np.ix_(bn, bn)]
    ev = np.linalg.eigvalsh(C)
    return bool(ev[0] > 1e-12 * max(ev[-1], 1.0))


def dirichlet_resolvent(mesh: Mesh, lam: float, f) -> np.ndarray:
    """Zero-extended ``lam R_D(lam) f`` on the interior nodes."""
    A_D, M_D, interior = dirichlet_operator(mesh)
    f = _as_nodal(f, mesh)
    return zero_extend(resolvent_apply(A_D, M_D, lam, f[interior]), interior, mesh.n_nodes)


def penalty_limit_resolvent(kappa: BoundaryMeasure, theta: JumpMeasure, mesh: Mesh, lam: float, f) -> np.ndarray:
    """Limit of ``lam R_c f`` as ``c -> infinity`` for a general pair.

    Minimizes the resolvent energy over ``ker(B + J)``: interior values are
    free, boundary values range over the null space of the boundary block.
    This covers mixed limits where some boundary nodes are not charged.
    """
    F = assemble_operator(kappa, theta, mesh)
    f = _as_nodal(f, mesh)
    bn, interior = mesh.boundary_nodes, mesh.interior_nodes
    C = (F.B + F.J).toarray()[np.ix_(bn, bn)]
    Z = scipy.linalg.null_space(C, rcond=1e-10) if C.any() else np.eye(bn.size)
    basis = np.zeros((mesh.n_nodes, interior.size + Z.shape[1]))
    basis[interior, np.arange(interior.size)] = 1.0
    basis[np.ix_(bn, np.arange(interior.size, basis.shape[1]))] = Z
    m = F.mass_diagonal
    H = basis.T @ (F.K @ basis + lam * m[:, None] * basis)
    rhs = basis.T @ (lam * m * f)
    return basis @ scipy.linalg.solve(H, rhs, assume_a="sym")


def resolvent_convergence_study(kappa: BoundaryMeasure, theta: JumpMeasure, scalings, lam: float, f, mesh: Mesh,
                                limit=None) -> ConvergenceTable:
    """Resolvents of ``(c kappa, c theta)`` for every ``c`` in ``scalings``.

    The reference limit is the zero-extended Dirichlet resolvent when
    ``B + J`` is definite on the boundary; otherwise ``limit`` (a nodal
    vector, e.g. from :func:`penalty_limit_resolvent`) must be supplied.
    """
    scalings = [float(c) for c in scalings]
    if not scalings or any(not (c >= 0 and np.isfinite(c)) for c in scalings):
        raise ValueError("scalings must be a nonempty list of finite nonnegative numbers")
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    f = _as_nodal(f, mesh)
    if limit is None:
        if not penalty_is_dirichlet(kappa, theta, mesh):
            raise ValueError("the scaled pair does not charge every boundary node, so the fixed-mesh limit "
                             "is not the Dirichlet operator; pass limit=penalty_limit_resolvent(...) explicitly")
        u_lim = dirichlet_resolvent(mesh, lam, f)
    else:
        u_lim = _as_nodal(limit, mesh)

    F0 = assemble_operator(BoundaryMeasure.zero(mesh), JumpMeasure(), mesh)
    m = F0.mass_diagonal
    K = F0.K

    def quad(u):
        return float(f @ (m * u)) / lam

    distances, values = [], []
    for c in scalings:
        kap, th = scale_pair(kappa, theta, c)
        A = assemble_operator(kap, th, mesh).A
        u = resolvent_apply(A, F0.M, lam, f)
        e = u - u_lim
        distances.append(float(np.sqrt(e @ (m * e))))
        values.append(quad(u))
    monotone = [True] + [values[k] <= values[k - 1] + MONOTONE_TOL for k in range(1, len(values))]
    return ConvergenceTable(scalings=scalings, distances=distances, quadratic_values=values, monotone=monotone,
                            limit_value=quad(u_lim), neumann_value=quad(resolvent_apply(K, F0.M, lam, f)), lam=lam)


def monotone_form_diagnostic(table: ConvergenceTable, tol: float = MONOTONE_TOL) -> CheckReport:
    """``(f, R_c f)`` must be nonincreasing in ``c`` and bounded below by the limit value."""
    q = np.asarray(table.quadratic_values)
    worst, witness = 0.0, None
    if q.size > 1:
        rise = np.diff(q)
        k = int(np.argmax(rise))
        if rise[k] > worst:
            worst, witness = float(rise[k]), (table.scalings[k + 1], k, k + 1)
    below = table.limit_value - q
    k = int(np.argmax(below))
    if below[k] > worst:
        worst, witness = float(below[k]), (table.scalings[k], k, None)
    return CheckReport("monotone_form_diagnostic", worst <= tol, worst, witness, tol,
                       {"limit_value": table.limit_value, "neumann_value": table.neumann_value})


def gamma_consistency_check(kappa: BoundaryMeasure, theta: JumpMeasure, lam: float, f, mesh: Mesh,
                            tol: float = 1e-8, n_candidates: int = 100, seed: int = 0,
                            solver_tol: float = 1e-13) -> CheckReport:
    """Variational minimizer vs. direct resolvent solve, plus a minimality witness.

    ``worst_violation`` is the larger of the relative M-norm difference of
    the two solutions and the relative amount by which any of
    ``n_candidates`` random perturbations undercuts the minimizer's energy.
    """
    f = _as_nodal(f, mesh)
    F = assemble_operator(kappa, theta, mesh)
    m = F.mass_diagonal
    u_direct = resolvent_apply(F.A, F.M, lam, f)
    u_var = dirichlet_principle_solve(F.A, F.M, lam, f, tol=solver_tol)

    def mnorm(v):
        return float(np.sqrt(v @ (m * v)))

    ref = mnorm(u_direct)
    diff = mnorm(u_var - u_direct)
    rel = diff / ref if ref > 0 else diff

    q_star = energy_functional(F.A, F.M, lam, f, u_var)
    rng = np.random.default_rng(seed)
    amp = 1e-2 * max(np.abs(u_var).max(), 1.0)
    excess = 0.0
    for _ in range(n_candidates):
        cand = u_var + amp * rng.standard_normal(u_var.size)
        excess = max(excess, q_star - energy_functional(F.A, F.M, lam, f, cand))
    excess_rel = excess / max(abs(q_star), 1e-300) if excess > 0 else 0.0
    worst = max(rel, excess_rel)
    return CheckReport("gamma_consistency", worst <= tol, worst, None, tol,
                       {"relative_m_norm_difference": rel, "energy_at_minimizer": q_star,
                        "minimality_excess": excess_rel, "candidates": n_candidates})
