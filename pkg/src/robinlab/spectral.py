"""Generalized eigenproblem ``A v = lambda M v``, heat propagators and resolvents.

Two independent solution paths are kept on purpose: resolvents come from a
direct sparse factorization, while :func:`dirichlet_principle_solve`
minimizes the energy functional with preconditioned conjugate gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class ConvergenceError(RuntimeError):
    """Iterative solver stopped at its iteration cap."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def _dense(A) -> np.ndarray:
    return A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)


def _mass_vector(M) -> np.ndarray:
    """Diagonal of a diagonal mass matrix, given as a matrix or a vector."""
    if sp.issparse(M):
        m = M.diagonal()
        if (M - sp.diags_array(m)).count_nonzero():
            raise ValueError("mass matrix must be diagonal")
    else:
        M = np.asarray(M, dtype=float)
        if M.ndim == 1:
            m = M
        else:
            m = np.diag(M).copy()
            if np.any(M - np.diag(m)):
                raise ValueError("mass matrix must be diagonal")
    if np.any(~(m > 0)):
        raise ValueError("mass matrix entries must be strictly positive")
    return m


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs of the pencil ``(A, M)`` with ``V.T @ M @ V = I``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True, eq=False)
class Propagator:
    """``P(t) = V exp(-t Lambda) V^T M``, mapping nodal values at 0 to time t."""

    t: float
    P: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return self.P if dtype is None else self.P.astype(dtype)


def decompose(A, M, sym_tol: float = 1e-12) -> SpectralDecomposition:
    """Dense symmetric generalized eigendecomposition of ``(A, M)``, ``M`` diagonal.

    Uses the similarity ``M^{-1/2} A M^{-1/2}`` and a symmetric solver.
    Roundoff-level negative eigenvalues are clipped to zero.
    """
    A = _dense(A)
    m = _mass_vector(M)
    if A.shape != (m.size, m.size):
        raise ValueError(f"shape mismatch: A {A.shape}, M has {m.size} entries")
    scale = max(np.abs(A).max(), 1.0)
    if np.abs(A - A.T).max() > sym_tol * scale:
        raise ValueError("A is not symmetric")
    r = 1.0 / np.sqrt(m)
    S = r[:, None] * A * r[None, :]
    S = 0.5 * (S + S.T)
    lam, Q = scipy.linalg.eigh(S)
    if lam[0] < -1e-8 * max(abs(lam[-1]), 1.0):
        raise ValueError(f"A is not positive semidefinite (smallest eigenvalue {lam[0]:.3e})")
    lam = np.maximum(lam, 0.0)
    return SpectralDecomposition(eigenvalues=lam, eigenvectors=r[:, None] * Q)


def propagator(decomp: SpectralDecomposition, M, t: float) -> Propagator:
    """Heat propagator ``exp(-t M^{-1} A)`` at time ``t >= 0``."""
    if not t >= 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    m = _mass_vector(M)
    V = decomp.eigenvectors
    decay = np.exp(-t * decomp.eigenvalues)
    P = (V * decay) @ (V.T * m[None, :])
    return Propagator(t=float(t), P=P)


def resolvent_apply(A, M, lam: float, f) -> np.ndarray:
    """Solve ``(A + lam M) u = lam M f``, i.e. ``u = lam R(lam) f``."""
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    m = _mass_vector(M)
    f = np.asarray(f, dtype=float)
    rhs = lam * m * f
    if not np.any(rhs):
        return np.zeros_like(rhs)
    if sp.issparse(A):
        system = (sp.csc_array(A) + lam * sp.diags_array(m)).tocsc()
        u = spla.spsolve(system, rhs)
    else:
        system = np.asarray(A, dtype=float) + lam * np.diag(m)
        u = scipy.linalg.cho_solve(scipy.linalg.cho_factor(system), rhs)
    if not np.all(np.isfinite(u)):
        raise RuntimeError("resolvent system is singular")
    return u


def energy_functional(A, M, lam: float, f, u) -> float:
    """``q(u) = u^T (A + lam M) u / 2 - lam u^T M f``."""
    m = _mass_vector(M)
    u = np.asarray(u, dtype=float)
    Au = A @ u
    return float(0.5 * (u @ Au + lam * u @ (m * u)) - lam * u @ (m * np.asarray(f, dtype=float)))


def dirichlet_principle_solve(A, M, lam: float, f, tol: float = 1e-13, max_iter: int | None = None) -> np.ndarray:
    """Minimize ``q(u)`` by Jacobi-preconditioned conjugate gradients.

    Stops once ``||grad q(u)|| <= tol * ||lam M f||``; raises
    :class:`ConvergenceError` after ``max_iter`` steps (default ``10 n``).
    """
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    m = _mass_vector(M)
    f = np.asarray(f, dtype=float)
    b = lam * m * f
    n = b.size
    u = np.zeros(n)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return u
    A = sp.csr_array(A) if sp.issparse(A) else np.asarray(A, dtype=float)

    def H(x):
        return A @ x + lam * m * x

    diag = (A.diagonal() if sp.issparse(A) else np.diag(A)) + lam * m
    inv_diag = 1.0 / diag
    max_iter = 10 * n if max_iter is None else max_iter

    r = b.copy()
    z = inv_diag * r
    d = z.copy()
    rz = r @ z
    for it in range(1, max_iter + 1):
        Hd = H(d)
        alpha = rz / (d @ Hd)
        u += alpha * d
        r -= alpha * Hd
        if it % 50 == 0:
            # Residual replacement keeps the recursion honest over long runs.
            r = b - H(u)
        if np.linalg.norm(r) <= tol * bnorm:
            return u
        z = inv_diag * r
        rz_new = r @ z
        d = z + (rz_new / rz) * d
        rz = rz_new
    res = float(np.linalg.norm(b - H(u)) / bnorm)
    raise ConvergenceError(f"conjugate gradients did not converge in {max_iter} iterations "
                           f"(relative residual {res:.3e})", residual=res, iterations=max_iter)
