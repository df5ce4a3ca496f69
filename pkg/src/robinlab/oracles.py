"""Closed-form and root-finding references for the interval ``(0, L)``.

These solve the continuous ODE problems directly and never touch the
Galerkin matrices, so they serve as independent oracles.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq


def _bc_matrix(k, length, beta0, beta1, w):
    """Boundary conditions applied to ``u = a cos(kx) + b sin(kx)``.

    Rows: ``-u'(0) + beta0 u(0) + w (u(0) - u(L))`` and
    ``u'(L) + beta1 u(L) + w (u(L) - u(0))``.
    """
    c, s = np.cos(k * length), np.sin(k * length)
    u0, du0 = np.array([1.0, 0.0]), np.array([0.0, k])
    uL, duL = np.array([c, s]), np.array([-k * s, k * c])
    return np.array([-du0 + beta0 * u0 + w * (u0 - uL),
                     duL + beta1 * uL + w * (uL - u0)])


def robin_eigenvalues(n_eig: int, beta0: float, beta1: float, w: float, length: float = 1.0,
                      k_max: float | None = None, n_scan: int = 20000) -> np.ndarray:
    """Smallest eigenvalues of ``-u'' = lambda u`` with nonlocal Robin conditions.

    The endpoints carry point masses ``beta0``, ``beta1`` and are coupled by
    the jump term ``w (u(0) - u(L))^2``. Eigenvalues ``k^2`` are located by
    bracketing sign changes of the boundary-condition determinant in ``k``
    and refining with Brent's method. A zero eigenvalue (all weights zero)
    is reported as 0.
    """
    out = []
    k_max = k_max or (n_eig + 2) * np.pi / length

    def det(k):
        return np.linalg.det(_bc_matrix(k, length, beta0, beta1, w))

    while len(out) < n_eig:
        ks = np.linspace(1e-9, k_max, n_scan)
        vals = np.array([det(k) for k in ks])
        out = [0.0] if beta0 == 0 and beta1 == 0 else []
        for a, b, fa, fb in zip(ks[:-1], ks[1:], vals[:-1], vals[1:]):
            if fa == 0:
                out.append(a * a)
            elif fa * fb < 0:
                out.append(brentq(det, a, b, xtol=1e-15, rtol=1e-15) ** 2)
        k_max *= 2
    return np.array(out[:n_eig])


def capacity_both_endpoints(length: float = 1.0) -> float:
    """``min int u'^2 + u^2`` with ``u(0) = u(L) = 1``: ``2 tanh(L / 2)``."""
    return 2.0 * np.tanh(0.5 * length)


def capacity_one_endpoint(length: float = 1.0) -> float:
    """``min int u'^2 + u^2`` with ``u(0) = 1``: ``tanh(L)``."""
    return float(np.tanh(length))


def capacity_dipole(length: float = 1.0) -> float:
    """``min int u'^2 + u^2`` with ``u(0) = 1``, ``u(L) = 0``: ``coth(L)``."""
    return float(1.0 / np.tanh(length))


def dirichlet_resolvent_unit_source(x, lam: float = 1.0, length: float = 1.0):
    """Solution of ``-u'' + lam u = lam``, ``u(0) = u(L) = 0``."""
    x = np.asarray(x, dtype=float)
    r = np.sqrt(lam)
    return 1.0 - np.cosh(r * (x - 0.5 * length)) / np.cosh(0.5 * r * length)
