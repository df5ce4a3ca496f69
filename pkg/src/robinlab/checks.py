"""Entrywise certification of positivity, sub-Markov and domination properties.

On a nodal basis with diagonal mass, ``S(t) <= T(t)`` as positive operators
is read off as an entrywise inequality between propagator matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .forms import assemble_operator, dirichlet_operator, zero_extend
from .measures import BoundaryMeasure, JumpMeasure, effective_local_measure, marginal_measure
from .mesh import Mesh
from .spectral import Propagator, decompose, propagator

DEFAULT_TOL = 1e-10
DEFAULT_T_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0)


@dataclass
class CheckReport:
    name: str
    passed: bool
    worst_violation: float
    witness: tuple | None
    tolerance: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "worst_violation": float(self.worst_violation),
            "witness": None if self.witness is None else [None if w is None else (float(w) if k == 0 else int(w))
                                                          for k, w in enumerate(self.witness)],
            "tolerance": float(self.tolerance),
            "details": self.details,
        }


def _report(name, violation, witness, tol, **details) -> CheckReport:
    violation = max(float(violation), 0.0)
    return CheckReport(name, violation <= tol, violation, witness, tol, details)


def positivity_check(P: Propagator, tol: float = DEFAULT_TOL, name: str = "positivity") -> CheckReport:
    """Pass iff every entry of ``P`` is at least ``-tol``."""
    i, j = np.unravel_index(np.argmin(P.P), P.P.shape)
    return _report(name, -P.P[i, j], (P.t, i, j), tol, min_entry=float(P.P[i, j]))


def submarkov_check(P: Propagator, tol: float = DEFAULT_TOL, name: str = "submarkov") -> CheckReport:
    """Pass iff ``-tol <= P 1 <= 1 + tol`` componentwise."""
    s = P.P.sum(axis=1)
    over, under = s - 1.0, -s
    if over.max() >= under.max():
        i = int(np.argmax(over))
        worst = over[i]
    else:
        i = int(np.argmin(s))
        worst = under[i]
    return _report(name, worst, (P.t, i, None), tol, max_row_sum=float(s.max()), min_row_sum=float(s.min()))


def domination_check(P_low: Propagator, P_high: Propagator, tol: float = DEFAULT_TOL,
                     name: str = "domination") -> CheckReport:
    """Pass iff ``P_low <= P_high + tol`` entrywise."""
    if P_low.P.shape != P_high.P.shape:
        raise ValueError(f"shape mismatch: {P_low.P.shape} vs {P_high.P.shape}")
    if P_low.t != P_high.t:
        raise ValueError(f"propagators at different times: {P_low.t} vs {P_high.t}")
    diff = P_low.P - P_high.P
    i, j = np.unravel_index(np.argmax(diff), diff.shape)
    return _report(name, diff[i, j], (P_low.t, i, j), tol)


class HeatSemigroups:
    """Propagator factories for the operators compared in the sandwich.

    ``nonlocal`` is ``(kappa, theta)``, ``local`` is ``(kappa + 2 theta_hat, 0)``,
    ``neumann`` is ``(0, 0)`` and ``dirichlet`` is zero-extended from the
    interior nodes.
    """

    def __init__(self, kappa: BoundaryMeasure, theta: JumpMeasure, mesh: Mesh):
        self.mesh = mesh
        self.forms = assemble_operator(kappa, theta, mesh)
        self.M = self.forms.M
        local = effective_local_measure(kappa, marginal_measure(theta, mesh))
        self._A = {
            "nonlocal": self.forms.A,
            "local": assemble_operator(local, JumpMeasure(), mesh).A,
            "neumann": self.forms.K,
        }
        self._decomp = {}
        self._dirichlet = None

    def decomposition(self, which: str):
        if which not in self._decomp:
            self._decomp[which] = decompose(self._A[which], self.M)
        return self._decomp[which]

    def __call__(self, which: str, t: float) -> Propagator:
        if which == "dirichlet":
            if self._dirichlet is None:
                A_D, M_D, interior = dirichlet_operator(self.mesh)
                self._dirichlet = (decompose(A_D, M_D), M_D, interior)
            dec, M_D, interior = self._dirichlet
            P = propagator(dec, M_D, t)
            return Propagator(P.t, zero_extend(P.P, interior, self.mesh.n_nodes))
        return propagator(self.decomposition(which), self.M, t)


def neumann_violation_probe(kappa: BoundaryMeasure, theta: JumpMeasure, mesh: Mesh, t_grid=DEFAULT_T_GRID,
                            tol: float = DEFAULT_TOL, semigroups: HeatSemigroups | None = None) -> CheckReport:
    """Search for an entry where the nonlocal propagator exceeds the Neumann one.

    ``passed`` means Neumann domination holds on the grid (no entry exceeds
    ``tol``); a failing report carries the worst witness. Whether a
    violation is expected is up to the caller: it must occur iff theta is
    nonzero.
    """
    t_grid = [float(t) for t in t_grid]
    if not t_grid or min(t_grid) <= 0:
        raise ValueError("t_grid must be a nonempty list of positive times")
    sg = semigroups or HeatSemigroups(kappa, theta, mesh)
    worst, witness, gaps = -np.inf, None, {}
    for t in t_grid:
        gap = sg("nonlocal", t).P - sg("neumann", t).P
        i, j = np.unravel_index(np.argmax(gap), gap.shape)
        gaps[repr(t)] = float(gap[i, j])
        if gap[i, j] > worst:
            worst, witness = gap[i, j], (t, i, j)
    return _report("neumann_domination", worst, witness, tol, max_gap_per_t=gaps)


def sandwich_report(kappa: BoundaryMeasure, theta: JumpMeasure, mesh: Mesh, t_grid=DEFAULT_T_GRID,
                    tol: float = DEFAULT_TOL) -> list:
    """Positivity, sub-Markov and the domination chain at every ``t``.

    Per time: positivity and sub-Markov of the nonlocal propagator,
    Dirichlet <= nonlocal, local(kappa + 2 theta_hat) <= nonlocal and
    nonlocal <= Neumann. The last entry aggregates the Neumann comparison
    over the grid.
    """
    sg = HeatSemigroups(kappa, theta, mesh)
    reports = []
    for t in t_grid:
        P = sg("nonlocal", t)
        reports.append(positivity_check(P, tol, name=f"positivity[t={t:g}]"))
        reports.append(submarkov_check(P, tol, name=f"submarkov[t={t:g}]"))
        reports.append(domination_check(sg("dirichlet", t), P, tol, name=f"dirichlet<=nonlocal[t={t:g}]"))
        reports.append(domination_check(sg("local", t), P, tol, name=f"local<=nonlocal[t={t:g}]"))
        reports.append(domination_check(P, sg("neumann", t), tol, name=f"nonlocal<=neumann[t={t:g}]"))
    reports.append(neumann_violation_probe(kappa, theta, mesh, t_grid, tol, semigroups=sg))
    return reports
