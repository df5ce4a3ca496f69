"""Structured meshes: uniform intervals and right-triangle-split rectangles.

Node coordinates are generated as ``length * (i / n)`` so that refinement
reproduces every coarse coordinate bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable P1 mesh of an interval (dim 1) or rectangle (dim 2).

    Attributes
    ----------
    dim : int
        Spatial dimension.
    nodes : ndarray, shape (n_nodes, dim)
    elements : ndarray of int, shape (n_elements, dim + 1)
    boundary_nodes : ndarray of int
        Boundary node indices. In 2D they follow the perimeter
        counterclockwise starting at the origin corner.
    boundary_segments : ndarray of int, shape (n_segments, 2)
        Consecutive boundary node pairs (closed chain in 2D, empty in 1D).
    segment_lengths : ndarray
    h : float
        Maximum element diameter.
    cells : tuple of int
        Subdivision counts, ``(n,)`` or ``(nx, ny)``.
    extent : tuple of float
        Domain side lengths.
    """

    dim: int
    nodes: np.ndarray
    elements: np.ndarray
    boundary_nodes: np.ndarray
    boundary_segments: np.ndarray
    segment_lengths: np.ndarray
    h: float
    cells: tuple
    extent: tuple
    _boundary_pos: dict = field(default=None, init=False, repr=False)

    def __post_init__(self):
        for name in ("nodes", "elements", "boundary_nodes", "boundary_segments", "segment_lengths"):
            getattr(self, name).setflags(write=False)
        pos = {int(g): k for k, g in enumerate(self.boundary_nodes)}
        object.__setattr__(self, "_boundary_pos", pos)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_boundary(self) -> int:
        return self.boundary_nodes.shape[0]

    @property
    def interior_nodes(self) -> np.ndarray:
        mask = np.ones(self.n_nodes, dtype=bool)
        mask[self.boundary_nodes] = False
        return np.flatnonzero(mask)

    @property
    def perimeter(self) -> float:
        """Total boundary measure: arc length in 2D, point count in 1D."""
        if self.dim == 1:
            return float(self.n_boundary)
        return float(self.segment_lengths.sum())

    def is_boundary(self, node: int) -> bool:
        return int(node) in self._boundary_pos

    def boundary_position(self, node: int) -> int:
        """Position of a global node index inside ``boundary_nodes``."""
        try:
            return self._boundary_pos[int(node)]
        except KeyError:
            raise ValueError(f"node {node} is not a boundary node") from None

    def nodal_arc_weights(self) -> np.ndarray:
        """Lumped boundary quadrature weight of each boundary node.

        Half the summed length of the adjacent segments in 2D; the counting
        measure (weight 1 per endpoint) in 1D.
        """
        if self.dim == 1:
            return np.ones(self.n_boundary)
        w = np.zeros(self.n_nodes)
        half = 0.5 * self.segment_lengths
        np.add.at(w, self.boundary_segments[:, 0], half)
        np.add.at(w, self.boundary_segments[:, 1], half)
        return w[self.boundary_nodes]

    def boundary_arclength(self) -> np.ndarray:
        """Arc-length coordinate of each boundary node along the chain.

        In 1D the coordinate is the node's x position.
        """
        if self.dim == 1:
            return self.nodes[self.boundary_nodes, 0].copy()
        return np.concatenate([[0.0], np.cumsum(self.segment_lengths)[:-1]])

    def node_at_arclength(self, s: float) -> int:
        """Nearest boundary node to arc-length ``s`` (lowest index on ties)."""
        arc = self.boundary_arclength()
        if self.dim == 2:
            total = self.perimeter
            s = float(s) % total
            d = np.abs(arc - s)
            d = np.minimum(d, total - d)
        else:
            d = np.abs(arc - float(s))
        return int(self.boundary_nodes[_argmin_lowest_index(d, self.boundary_nodes)])

    def nearest_boundary_node(self, point) -> int:
        """Nearest boundary node to a coordinate (lowest index on ties)."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        if point.shape != (self.dim,):
            raise ValueError(f"point must have {self.dim} coordinates, got {point.shape}")
        d = np.linalg.norm(self.nodes[self.boundary_nodes] - point, axis=1)
        return int(self.boundary_nodes[_argmin_lowest_index(d, self.boundary_nodes)])


def _argmin_lowest_index(d, labels):
    best = d.min()
    candidates = np.flatnonzero(d == best)
    return candidates[np.argmin(labels[candidates])]


def build_interval_mesh(n_cells: int, length: float = 1.0) -> Mesh:
    """Uniform mesh of ``(0, length)`` with ``n_cells`` segments."""
    n_cells = int(n_cells)
    if n_cells < 1:
        raise ValueError(f"n_cells must be >= 1, got {n_cells}")
    if not length > 0:
        raise ValueError(f"length must be positive, got {length}")
    length = float(length)
    x = length * (np.arange(n_cells + 1) / n_cells)
    elements = np.column_stack([np.arange(n_cells), np.arange(1, n_cells + 1)])
    return Mesh(
        dim=1,
        nodes=x[:, None],
        elements=elements,
        boundary_nodes=np.array([0, n_cells]),
        boundary_segments=np.zeros((0, 2), dtype=int),
        segment_lengths=np.zeros(0),
        h=length / n_cells,
        cells=(n_cells,),
        extent=(length,),
    )


def build_rectangle_mesh(nx: int, ny: int, lx: float = 1.0, ly: float = 1.0) -> Mesh:
    """Structured mesh of ``(0, lx) x (0, ly)``, each cell split into two right triangles.

    Node ``(i, j)`` has index ``j * (nx + 1) + i``. The split uses the
    diagonal from ``(i, j)`` to ``(i + 1, j + 1)``, so every triangle is
    right-angled and the stiffness matrix has nonpositive off-diagonals.
    """
    nx, ny = int(nx), int(ny)
    if nx < 1 or ny < 1:
        raise ValueError(f"subdivisions must be >= 1, got ({nx}, {ny})")
    if not (lx > 0 and ly > 0):
        raise ValueError(f"side lengths must be positive, got ({lx}, {ly})")
    lx, ly = float(lx), float(ly)
    xs = lx * (np.arange(nx + 1) / nx)
    ys = ly * (np.arange(ny + 1) / ny)
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    idx = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    a = idx[:-1, :-1].ravel()
    b = idx[:-1, 1:].ravel()
    c = idx[1:, 1:].ravel()
    d = idx[1:, :-1].ravel()
    elements = np.empty((2 * nx * ny, 3), dtype=int)
    elements[0::2] = np.column_stack([a, b, c])
    elements[1::2] = np.column_stack([a, c, d])

    bottom = idx[0, :]
    right = idx[1:, nx]
    top = idx[ny, nx - 1::-1]
    left = idx[ny - 1:0:-1, 0]
    chain = np.concatenate([bottom, right, top, left])
    segments = np.column_stack([chain, np.roll(chain, -1)])
    lengths = np.linalg.norm(nodes[segments[:, 1]] - nodes[segments[:, 0]], axis=1)

    return Mesh(
        dim=2,
        nodes=nodes,
        elements=elements,
        boundary_nodes=chain,
        boundary_segments=segments,
        segment_lengths=lengths,
        h=float(np.hypot(lx / nx, ly / ny)),
        cells=(nx, ny),
        extent=(lx, ly),
    )


def refine(mesh: Mesh) -> Mesh:
    """Uniform refinement halving ``h``; coarse node coordinates are kept exactly."""
    if mesh.dim == 1:
        return build_interval_mesh(2 * mesh.cells[0], *mesh.extent)
    return build_rectangle_mesh(2 * mesh.cells[0], 2 * mesh.cells[1], *mesh.extent)


def refinement_levels(mesh: Mesh, levels: int) -> list:
    """``[mesh, refine(mesh), ...]`` with ``levels`` entries."""
    out = [mesh]
    for _ in range(levels - 1):
        out.append(refine(out[-1]))
    return out
