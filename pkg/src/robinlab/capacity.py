"""Discrete relative capacity of boundary node sets and the closability probe.

Capacity uses the squared norm convention ``Cap(A) = min ||u||_{H^1}^2``
over P1 functions equal to 1 at the nodes of ``A``; the square root gives
the unsquared value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .forms import assemble_boundary_mass, assemble_jump, assemble_lumped_mass, assemble_stiffness
from .measures import BoundaryMeasure, JumpMeasure
from .mesh import Mesh, refinement_levels


@dataclass(frozen=True, eq=False)
class CapacityResult:
    value: float
    potential: np.ndarray
    node_set: tuple
    level: int = 0
    h: float = float("nan")


def h1_matrix(mesh: Mesh) -> sp.csr_array:
    """``K + M``: the Gram matrix of the H^1 inner product."""
    return (assemble_stiffness(mesh) + assemble_lumped_mass(mesh)).tocsr()


def constrained_minimizer(H, fixed: dict) -> np.ndarray:
    """Minimize ``u^T H u`` with ``u_i = fixed[i]``, eliminating the fixed rows."""
    n = H.shape[0]
    u = np.zeros(n)
    if not fixed:
        return u
    idx = np.fromiter(fixed.keys(), dtype=int)
    u[idx] = np.fromiter(fixed.values(), dtype=float)
    free = np.setdiff1d(np.arange(n), idx)
    if free.size:
        H = sp.csr_array(H)
        rhs = -(H[free][:, idx] @ u[idx])
        u[free] = spla.spsolve(H[free][:, free].tocsc(), rhs)
    return u


def relative_capacity(mesh: Mesh, node_set, level: int = 0, H=None) -> CapacityResult:
    """Equilibrium potential and capacity of a set of boundary nodes."""
    nodes = sorted({int(i) for i in np.atleast_1d(node_set)})
    if not nodes:
        raise ValueError("node_set must be nonempty")
    for i in nodes:
        if not mesh.is_boundary(i):
            raise ValueError(f"node {i} is not on the boundary")
    H = h1_matrix(mesh) if H is None else H
    u = constrained_minimizer(H, {i: 1.0 for i in nodes})
    return CapacityResult(value=float(u @ (H @ u)), potential=u, node_set=tuple(nodes), level=level, h=mesh.h)


def capacity_refinement_study(mesh: Mesh, points, levels: int) -> list:
    """Capacity of the boundary nodes nearest to ``points`` on successive refinements.

    ``points`` is one coordinate or an array of coordinates; ``mesh`` is the
    coarsest level.
    """
    if levels < 2:
        raise ValueError(f"levels must be >= 2, got {levels}")
    points = np.asarray(points, dtype=float).reshape(-1, mesh.dim)
    results = []
    for k, m in enumerate(refinement_levels(mesh, levels)):
        nodes = [m.nearest_boundary_node(p) for p in points]
        results.append(relative_capacity(m, nodes, level=k))
    return results


@dataclass
class ProbeLevel:
    level: int
    h: float
    gradient_energy: float
    h1_energy: float
    form_boundary_value: float


@dataclass
class ProbeReport:
    """Per-level energies of the probe potential plus the two signatures.

    ``decay_signature``: H^1 energy strictly decreasing and ending below
    ``h1_floor`` while the boundary form value stays within 5% of
    ``expected_boundary_value`` (a sequence tending to 0 in H^1 with
    non-vanishing form value, i.e. non-closable).
    ``bounded_signature``: H^1 energy never falls below ``h1_floor``.
    """

    levels: list
    ones: tuple
    zeros: tuple
    expected_boundary_value: float
    h1_floor: float
    decay_signature: bool = False
    bounded_signature: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def h1_energies(self):
        return [lv.h1_energy for lv in self.levels]

    @property
    def boundary_values(self):
        return [lv.form_boundary_value for lv in self.levels]


def _probe_constraints(kappa: BoundaryMeasure, theta: JumpMeasure):
    ones = sorted(p for p, w in kappa.atoms.items() if w > 0)
    pairs = [(p, q) for p, q, w in theta.atom_pairs if w > 0]
    if not ones:
        ones = sorted({p for p, _ in pairs})
    zeros = sorted({x for pq in pairs for x in pq} - set(ones))
    return ones, zeros


def closability_probe(kappa: BoundaryMeasure, theta: JumpMeasure, mesh: Mesh, levels: int,
                      h1_floor: float = 0.5) -> ProbeReport:
    """Track ``E_{kappa,theta}`` along capacity potentials of the atom support.

    On every refinement level the potential equals 1 at the kappa atoms
    (or at the first endpoint of each pair when kappa has no atoms) and 0
    at the remaining pair endpoints, and minimizes the H^1 energy
    otherwise. The measures are re-identified on each level by snapping
    atoms to the nearest boundary node.
    """
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    theta.validate_on(mesh)
    report_levels = []
    expected = None
    first = None
    for k, m in enumerate(refinement_levels(mesh, levels)):
        kap = kappa.transfer(m)
        th = theta.transfer(mesh, m)
        ones, zeros = _probe_constraints(kap, th)
        if set(ones) & set(zeros):
            raise ValueError(f"probe nodes coincide on level {k}: ones {ones}, zeros {zeros}")
        if first is None:
            first = (tuple(ones), tuple(zeros))
        K = assemble_stiffness(m)
        H = (K + assemble_lumped_mass(m)).tocsr()
        BJ = (assemble_boundary_mass(kap, m) + assemble_jump(th, m)[0]).tocsr()
        fixed = {i: 1.0 for i in ones} | {i: 0.0 for i in zeros}
        u = constrained_minimizer(H, fixed)
        if expected is None:
            chi = np.zeros(m.n_nodes)
            chi[list(ones)] = 1.0
            expected = float(chi @ (BJ @ chi))
        report_levels.append(ProbeLevel(k, m.h, float(u @ (K @ u)), float(u @ (H @ u)), float(u @ (BJ @ u))))

    h1 = np.array([lv.h1_energy for lv in report_levels])
    bv = np.array([lv.form_boundary_value for lv in report_levels])
    band = 0.05 * max(abs(expected), 1e-300)
    decay = bool(len(h1) > 1 and np.all(np.diff(h1) < 0) and h1[-1] < h1_floor and expected > 0
                 and np.all(np.abs(bv - expected) <= band))
    return ProbeReport(levels=report_levels, ones=first[0], zeros=first[1], expected_boundary_value=expected,
                       h1_floor=h1_floor, decay_signature=decay, bounded_signature=bool(h1.min() >= h1_floor))
