"""Galerkin matrices for the nonlocal Robin form.

The form is

    E(u, v) = int grad u . grad v + int u v dkappa
              + iint (u(x) - u(y)) (v(x) - v(y)) dtheta

with no factor 1/2 in front of the jump integral. Mass, boundary mass and
jump quadrature are all lumped, so the operator matrix has nonpositive
off-diagonal entries on non-obtuse meshes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .measures import BoundaryMeasure, JumpMeasure, kernel_coupling
from .mesh import Mesh


@dataclass(frozen=True, eq=False)
class FormMatrices:
    """Assembled matrices of one ``(kappa, theta)`` configuration (CSR).

    ``A = K + B + J`` and ``J = 2 diag(theta_hat_diag) - 2 W``.
    """

    mesh: Mesh
    K: sp.csr_array
    M: sp.csr_array
    B: sp.csr_array
    J: sp.csr_array
    W: sp.csr_array
    theta_hat_diag: np.ndarray
    A: sp.csr_array

    @property
    def mass_diagonal(self) -> np.ndarray:
        return self.M.diagonal()


def _element_data(mesh: Mesh):
    """Per-element measures and P1 basis gradients, shape (n_el, dim+1, dim)."""
    x = mesh.nodes[mesh.elements]
    if mesh.dim == 1:
        length = x[:, 1, 0] - x[:, 0, 0]
        grads = np.stack([-1.0 / length, 1.0 / length], axis=1)[:, :, None]
        return length, grads
    ones = np.ones(x.shape[:2] + (1,))
    T = np.concatenate([ones, x], axis=2)
    area = 0.5 * np.abs(np.linalg.det(T))
    grads = np.linalg.inv(T)[:, 1:, :].transpose(0, 2, 1)
    return area, grads


def assemble_stiffness(mesh: Mesh) -> sp.csr_array:
    """P1 stiffness matrix ``int grad phi_i . grad phi_j``."""
    vol, grads = _element_data(mesh)
    local = vol[:, None, None] * np.einsum("eik,ejk->eij", grads, grads)
    n_loc = mesh.dim + 1
    rows = np.repeat(mesh.elements, n_loc, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, n_loc)).ravel()
    K = sp.coo_array((local.ravel(), (rows, cols)), shape=(mesh.n_nodes,) * 2).tocsr()
    # Symmetrize exactly; the per-element blocks are symmetric only up to rounding.
    return ((K + K.T) * 0.5).tocsr()


def assemble_lumped_mass(mesh: Mesh) -> sp.csr_array:
    """Lumped mass: each node receives ``|element| / (dim + 1)`` from every adjacent element."""
    vol, _ = _element_data(mesh)
    m = np.zeros(mesh.n_nodes)
    share = vol / (mesh.dim + 1)
    for k in range(mesh.dim + 1):
        np.add.at(m, mesh.elements[:, k], share)
    return sp.diags_array(m).tocsr()


def assemble_boundary_mass(kappa: BoundaryMeasure, mesh: Mesh) -> sp.csr_array:
    """Diagonal boundary mass ``int u v dkappa`` under nodal quadrature."""
    if kappa.mesh is not mesh and not np.array_equal(kappa.mesh.boundary_nodes, mesh.boundary_nodes):
        raise ValueError("boundary measure belongs to a different mesh")
    for node in kappa.atoms:
        mesh.boundary_position(node)
    diag = np.zeros(mesh.n_nodes)
    diag[mesh.boundary_nodes] = kappa.nodal_masses()
    return sp.diags_array(diag).tocsr()


def assemble_jump(theta: JumpMeasure, mesh: Mesh):
    """Jump matrix ``J``, coupling ``W`` and marginal node masses for ``theta``.

    ``W_ij = w(x_i, x_j) ds_i ds_j`` plus ``w0 / 2`` at ``(p, q)`` and
    ``(q, p)`` for every atom pair; ``theta_hat_diag = W 1``;
    ``J = 2 diag(theta_hat_diag) - 2 W``.
    """
    theta.validate_on(mesh)
    n, bn = mesh.n_nodes, mesh.boundary_nodes
    block = kernel_coupling(theta.kernel, mesh)
    rows, cols = np.nonzero(block)
    vals = [block[rows, cols]]
    rows, cols = [bn[rows]], [bn[cols]]
    for p, q, w in theta.atom_pairs:
        rows.append(np.array([p, q]))
        cols.append(np.array([q, p]))
        vals.append(np.array([0.5 * w, 0.5 * w]))
    W = sp.coo_array((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()
    W.sum_duplicates()
    theta_hat = np.asarray(W.sum(axis=1)).ravel()
    J = (2.0 * sp.diags_array(theta_hat) - 2.0 * W).tocsr()
    return J, W, theta_hat


def assemble_operator(kappa: BoundaryMeasure, theta: JumpMeasure, mesh: Mesh) -> FormMatrices:
    """All matrices of ``E_{kappa, theta}``; ``A = K + B + J``."""
    K = assemble_stiffness(mesh)
    M = assemble_lumped_mass(mesh)
    B = assemble_boundary_mass(kappa, mesh)
    J, W, theta_hat = assemble_jump(theta, mesh)
    A = (K + B + J).tocsr()
    return FormMatrices(mesh=mesh, K=K, M=M, B=B, J=J, W=W, theta_hat_diag=theta_hat, A=A)


def dirichlet_operator(mesh: Mesh):
    """Stiffness and mass restricted to interior nodes.

    Returns ``(A_D, M_D, interior)`` where ``interior`` maps rows of the
    restricted system to global node indices (use :func:`zero_extend`).
    """
    interior = mesh.interior_nodes
    if interior.size == 0:
        raise ValueError("mesh has no interior nodes")
    K = assemble_stiffness(mesh)
    M = assemble_lumped_mass(mesh)
    A_D = K[interior][:, interior].tocsr()
    M_D = M[interior][:, interior].tocsr()
    return A_D, M_D, interior


def zero_extend(values: np.ndarray, embedding: np.ndarray, n_nodes: int) -> np.ndarray:
    """Extend interior vectors (or square matrices) by zero to all nodes."""
    values = np.asarray(values)
    if values.ndim == 1:
        out = np.zeros(n_nodes, dtype=values.dtype)
        out[embedding] = values
        return out
    out = np.zeros((n_nodes, n_nodes), dtype=values.dtype)
    out[np.ix_(embedding, embedding)] = values
    return out
