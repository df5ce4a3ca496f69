"""Boundary measures (kappa, theta-hat) and symmetric jump measures (theta).

All kernel integrals use lumped nodal quadrature: boundary node ``i``
carries arc weight ``ds_i`` and a double integral over the boundary becomes
``sum_{i != j} w(x_i, x_j) ds_i ds_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .mesh import Mesh


@dataclass(frozen=True, eq=False)
class BoundaryMeasure:
    """Nonnegative measure on the boundary of ``mesh``.

    ``segment_density`` is constant per boundary segment (2D only);
    ``node_density`` is a density sampled at boundary nodes and integrated
    with the nodal arc weights (this is how kernel marginals and 1D counting
    densities are stored); ``atoms`` maps global node index to point mass.
    """

    mesh: Mesh
    segment_density: np.ndarray
    node_density: np.ndarray
    atoms: dict = field(default_factory=dict)

    def __post_init__(self):
        seg = np.asarray(self.segment_density, dtype=float)
        nod = np.asarray(self.node_density, dtype=float)
        if seg.shape != (self.mesh.boundary_segments.shape[0],):
            raise ValueError(f"segment_density must have shape ({self.mesh.boundary_segments.shape[0]},)")
        if nod.shape != (self.mesh.n_boundary,):
            raise ValueError(f"node_density must have shape ({self.mesh.n_boundary},)")
        if np.any(seg < 0) or np.any(nod < 0) or not (np.all(np.isfinite(seg)) and np.all(np.isfinite(nod))):
            raise ValueError("densities must be finite and nonnegative")
        atoms = {}
        for node, weight in dict(self.atoms).items():
            self.mesh.boundary_position(node)
            weight = float(weight)
            if not (weight >= 0 and np.isfinite(weight)):
                raise ValueError(f"atom weight at node {node} must be finite and nonnegative, got {weight}")
            atoms[int(node)] = weight
        seg.setflags(write=False)
        nod.setflags(write=False)
        object.__setattr__(self, "segment_density", seg)
        object.__setattr__(self, "node_density", nod)
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def zero(cls, mesh: Mesh) -> "BoundaryMeasure":
        return cls(mesh, np.zeros(mesh.boundary_segments.shape[0]), np.zeros(mesh.n_boundary))

    @classmethod
    def uniform(cls, mesh: Mesh, density: float) -> "BoundaryMeasure":
        """Constant density per unit arc length (per endpoint in 1D)."""
        if mesh.dim == 1:
            return cls(mesh, np.zeros(0), np.full(mesh.n_boundary, float(density)))
        return cls(mesh, np.full(mesh.boundary_segments.shape[0], float(density)), np.zeros(mesh.n_boundary))

    @classmethod
    def from_atoms(cls, mesh: Mesh, atoms) -> "BoundaryMeasure":
        zero = cls.zero(mesh)
        merged = {}
        items = atoms.items() if isinstance(atoms, dict) else atoms
        for node, weight in items:
            merged[int(node)] = merged.get(int(node), 0.0) + float(weight)
        return replace(zero, atoms=merged)

    def nodal_masses(self) -> np.ndarray:
        """Mass carried by each boundary node under lumped quadrature."""
        mesh = self.mesh
        full = np.zeros(mesh.n_nodes)
        if self.segment_density.size:
            half = 0.5 * self.segment_density * mesh.segment_lengths
            np.add.at(full, mesh.boundary_segments[:, 0], half)
            np.add.at(full, mesh.boundary_segments[:, 1], half)
        out = full[mesh.boundary_nodes] + self.node_density * mesh.nodal_arc_weights()
        for node, weight in self.atoms.items():
            out[mesh.boundary_position(node)] += weight
        return out

    def total_mass(self) -> float:
        return float(np.sum(self.segment_density * self.mesh.segment_lengths)
                     + np.sum(self.node_density * self.mesh.nodal_arc_weights())
                     + sum(self.atoms.values()))

    def has_atoms(self) -> bool:
        return any(w > 0 for w in self.atoms.values())

    def has_density(self) -> bool:
        return bool(np.any(self.segment_density > 0) or np.any(self.node_density > 0))

    def scaled(self, c: float) -> "BoundaryMeasure":
        return BoundaryMeasure(self.mesh, c * self.segment_density, c * self.node_density,
                               {p: c * w for p, w in self.atoms.items()})

    def __add__(self, other: "BoundaryMeasure") -> "BoundaryMeasure":
        return effective_local_measure(self, other, factor=1.0)

    def transfer(self, mesh: Mesh) -> "BoundaryMeasure":
        """Re-identify this measure on another mesh of the same domain.

        Atoms snap to the nearest boundary node, segment densities are taken
        from the coarse segment nearest to each new segment midpoint, and
        node densities from the nearest coarse boundary node.
        """
        src = self.mesh
        if mesh.dim != src.dim or mesh.extent != src.extent:
            raise ValueError("meshes discretize different domains")
        atoms = {}
        for node, weight in self.atoms.items():
            new = mesh.nearest_boundary_node(src.nodes[node])
            atoms[new] = atoms.get(new, 0.0) + weight
        seg = np.zeros(mesh.boundary_segments.shape[0])
        if seg.size:
            src_mid = src.nodes[src.boundary_segments].mean(axis=1)
            new_mid = mesh.nodes[mesh.boundary_segments].mean(axis=1)
            nearest = np.argmin(np.linalg.norm(new_mid[:, None, :] - src_mid[None, :, :], axis=2), axis=1)
            seg = self.segment_density[nearest]
        src_b = src.nodes[src.boundary_nodes]
        nearest = np.argmin(np.linalg.norm(mesh.nodes[mesh.boundary_nodes][:, None, :] - src_b[None, :, :], axis=2), axis=1)
        return BoundaryMeasure(mesh, seg, self.node_density[nearest], atoms)


# Jump kernels. Each is a function of the distance only, which makes the
# induced measure symmetric by construction.

@dataclass(frozen=True)
class ZeroKernel:
    def __call__(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def scaled(self, c):
        return self

    @property
    def is_zero(self):
        return True


@dataclass(frozen=True)
class ConstantKernel:
    c: float

    def __post_init__(self):
        if not (self.c >= 0 and np.isfinite(self.c)):
            raise ValueError(f"constant kernel value must be finite and nonnegative, got {self.c}")

    def __call__(self, r):
        return np.full(np.shape(r), float(self.c))

    def scaled(self, c):
        return ConstantKernel(c * self.c)

    @property
    def is_zero(self):
        return self.c == 0


@dataclass(frozen=True)
class TruncatedFractionalKernel:
    """``scale * max(r, eps) ** -(d - 1 + 2 s)`` with boundary dimension ``d - 1``.

    The kernel is flat for ``r < eps``, which keeps every quadrature sum
    finite. ``dim`` is the dimension of the domain.
    """

    s: float
    eps: float
    dim: int
    scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise ValueError(f"fractional order s must lie in (0, 1), got {self.s}")
        if not self.eps > 0:
            raise ValueError(f"truncation radius must be positive, got {self.eps}")
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not self.scale >= 0:
            raise ValueError(f"scale must be nonnegative, got {self.scale}")

    @property
    def exponent(self):
        return self.dim - 1 + 2 * self.s

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.scale * np.maximum(r, self.eps) ** (-self.exponent)

    def scaled(self, c):
        return replace(self, scale=c * self.scale)

    @property
    def is_zero(self):
        return self.scale == 0


@dataclass(frozen=True)
class JumpMeasure:
    """Symmetric measure on boundary x boundary minus the diagonal.

    ``atom_pairs`` holds ``(p, q, w)`` with ``p != q``, each standing for
    ``w * (delta_p x delta_q + delta_q x delta_p) / 2``. The kernel part is
    ``w(|x - y|) ds(x) ds(y)`` off the diagonal.
    """

    kernel: object = field(default_factory=ZeroKernel)
    atom_pairs: tuple = ()

    def __post_init__(self):
        pairs = []
        for p, q, w in self.atom_pairs:
            p, q, w = int(p), int(q), float(w)
            if p == q:
                raise ValueError(f"atom pair ({p}, {q}) lies on the diagonal")
            if not (w >= 0 and np.isfinite(w)):
                raise ValueError(f"atom pair weight must be finite and nonnegative, got {w}")
            pairs.append((min(p, q), max(p, q), w))
        object.__setattr__(self, "atom_pairs", tuple(pairs))

    def is_zero(self) -> bool:
        return self.kernel.is_zero and all(w == 0 for _, _, w in self.atom_pairs)

    def scaled(self, c: float) -> "JumpMeasure":
        return JumpMeasure(self.kernel.scaled(c), tuple((p, q, c * w) for p, q, w in self.atom_pairs))

    def validate_on(self, mesh: Mesh) -> None:
        for p, q, _ in self.atom_pairs:
            mesh.boundary_position(p)
            mesh.boundary_position(q)

    def transfer(self, src: Mesh, mesh: Mesh) -> "JumpMeasure":
        """Snap atom pairs defined on ``src`` to the nearest boundary nodes of ``mesh``."""
        pairs = tuple((mesh.nearest_boundary_node(src.nodes[p]), mesh.nearest_boundary_node(src.nodes[q]), w)
                      for p, q, w in self.atom_pairs)
        return JumpMeasure(self.kernel, pairs)


def kernel_coupling(kernel, mesh: Mesh) -> np.ndarray:
    """Boundary-block coupling ``w(x_i, x_j) ds_i ds_j`` with zero diagonal."""
    xb = mesh.nodes[mesh.boundary_nodes]
    ds = mesh.nodal_arc_weights()
    if kernel.is_zero:
        return np.zeros((mesh.n_boundary, mesh.n_boundary))
    r = np.linalg.norm(xb[:, None, :] - xb[None, :, :], axis=2)
    block = kernel(r) * np.outer(ds, ds)
    np.fill_diagonal(block, 0.0)
    return block


def marginal_measure(theta: JumpMeasure, mesh: Mesh) -> BoundaryMeasure:
    """Marginal ``theta_hat(dx) = theta(dx x boundary)``.

    Atom pairs give half their weight to each endpoint; the kernel part
    becomes the node density ``sum_{j != i} w(x_i, x_j) ds_j``.
    """
    theta.validate_on(mesh)
    atoms = {}
    for p, q, w in theta.atom_pairs:
        atoms[p] = atoms.get(p, 0.0) + 0.5 * w
        atoms[q] = atoms.get(q, 0.0) + 0.5 * w
    density = np.zeros(mesh.n_boundary)
    if not theta.kernel.is_zero:
        ds = mesh.nodal_arc_weights()
        density = kernel_coupling(theta.kernel, mesh).sum(axis=1) / ds
    return BoundaryMeasure(mesh, np.zeros(mesh.boundary_segments.shape[0]), density, atoms)


def _same_boundary(a: Mesh, b: Mesh) -> bool:
    return a is b or (a.dim == b.dim and a.n_nodes == b.n_nodes
                      and np.array_equal(a.boundary_nodes, b.boundary_nodes)
                      and np.array_equal(a.nodes, b.nodes))


def effective_local_measure(kappa: BoundaryMeasure, theta_hat: BoundaryMeasure, factor: float = 2.0) -> BoundaryMeasure:
    """``kappa + factor * theta_hat`` (``kappa + 2 theta_hat`` by default)."""
    if not _same_boundary(kappa.mesh, theta_hat.mesh):
        raise ValueError("measures live on different meshes")
    atoms = dict(kappa.atoms)
    for node, w in theta_hat.atoms.items():
        atoms[node] = atoms.get(node, 0.0) + factor * w
    return BoundaryMeasure(kappa.mesh,
                           kappa.segment_density + factor * theta_hat.segment_density,
                           kappa.node_density + factor * theta_hat.node_density,
                           atoms)


def scale_pair(kappa: BoundaryMeasure, theta: JumpMeasure, c: float):
    """Multiply every density, weight and kernel prefactor by ``c >= 0``."""
    c = float(c)
    if not (c >= 0 and np.isfinite(c)):
        raise ValueError(f"scaling must be finite and nonnegative, got {c}")
    return kappa.scaled(c), theta.scaled(c)


@dataclass
class AdmissibilityVerdict:
    admissible: bool
    reasons: list
    capacity_evidence: dict = field(default_factory=dict)


def admissibility_verdict(kappa: BoundaryMeasure, theta: JumpMeasure, mesh: Mesh, study=None) -> AdmissibilityVerdict:
    """Classify the pair by the capacity of the sets charged by ``kappa + theta_hat``.

    Density parts never charge a capacity-null set. Point masses are
    admissible in 1D, where boundary points have positive relative capacity,
    and not in 2D, where points are relatively polar. ``study`` optionally
    maps atom node indices to refinement-study capacity sequences; the
    verdict then quotes the observed decay.
    """
    reasons = []
    blocking = False
    local = kappa + marginal_measure(theta, mesh)
    if local.has_density():
        reasons.append("density part: absolutely continuous on the boundary, charges no relatively polar set")
    charged = sorted(p for p, w in local.atoms.items() if w > 0)
    evidence = {}
    for p in charged:
        values = None if study is None else study.get(p)
        if values is not None:
            values = [float(v) for v in values]
            evidence[p] = values
        where = f"atom at node {p} (x = {mesh.nodes[p].tolist()})"
        if mesh.dim == 1:
            msg = f"{where}: boundary points of an interval have positive relative capacity"
            if values:
                msg += f"; capacities {values[0]:.4g} -> {values[-1]:.4g} stay bounded below"
        else:
            blocking = True
            msg = f"BLOCKING {where}: points are relatively polar in dimension 2, the atom charges a null set"
            if values:
                msg += f"; capacities {values[0]:.4g} -> {values[-1]:.4g} decay under refinement"
        reasons.append(msg)
    if not reasons:
        reasons.append("zero pair: trivially admissible")
    return AdmissibilityVerdict(admissible=not blocking, reasons=reasons, capacity_evidence=evidence)
