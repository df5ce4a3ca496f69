import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robinlab import build_interval_mesh, build_rectangle_mesh, refine


def test_interval_two_cells():
    m = build_interval_mesh(2, 1.0)
    assert m.nodes[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert m.boundary_nodes.tolist() == [0, 2]
    assert m.boundary_segments.shape == (0, 2)


def test_interval_single_cell():
    m = build_interval_mesh(1, 1.0)
    assert m.elements.shape == (1, 2)
    assert m.h == 1.0


def test_interval_512():
    m = build_interval_mesh(512, 1.0)
    assert m.n_nodes == 513
    assert m.h == 1 / 512


@pytest.mark.parametrize("bad", [0, -3])
def test_interval_rejects_zero_cells(bad):
    with pytest.raises(ValueError):
        build_interval_mesh(bad, 1.0)


@pytest.mark.parametrize("nx, ny", [(0, 1), (1, 0)])
def test_rectangle_rejects_zero_cells(nx, ny):
    with pytest.raises(ValueError):
        build_rectangle_mesh(nx, ny, 1.0, 1.0)


@pytest.mark.parametrize("n, nodes, triangles, bnodes", [(1, 4, 2, 4), (2, 9, 8, 8)])
def test_rectangle_counts(n, nodes, triangles, bnodes):
    m = build_rectangle_mesh(n, n, 1.0, 1.0)
    assert (m.n_nodes, m.elements.shape[0], m.n_boundary) == (nodes, triangles, bnodes)


def _angles(mesh):
    x = mesh.nodes[mesh.elements]
    out = []
    for k in range(3):
        a, b, c = x[:, k], x[:, (k + 1) % 3], x[:, (k + 2) % 3]
        u, v = b - a, c - a
        cos = np.sum(u * v, axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        out.append(cos)
    return np.stack(out, axis=1)


def test_rectangle_right_isosceles_angles():
    cos = _angles(build_rectangle_mesh(8, 8, 1.0, 1.0))
    deg = np.degrees(np.arccos(np.clip(cos, -1, 1)))
    assert np.allclose(np.sort(deg, axis=1), [45.0, 45.0, 90.0])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_rectangle_invariants(nx, ny, lx, ly):
    m = build_rectangle_mesh(nx, ny, lx, ly)
    assert np.all(_angles(m) >= -1e-14)
    assert set(m.boundary_segments.ravel()) <= set(m.boundary_nodes.tolist())
    # closed chain: each segment starts where the previous one ends
    assert np.array_equal(m.boundary_segments[1:, 0], m.boundary_segments[:-1, 1])
    assert m.boundary_segments[-1, 1] == m.boundary_segments[0, 0]
    perim = 2 * (lx + ly)
    assert abs(m.segment_lengths.sum() - perim) <= 1e-12 * perim
    assert m.nodal_arc_weights().sum() == pytest.approx(perim, rel=1e-12)


def test_boundary_chain_is_counterclockwise_from_origin():
    m = build_rectangle_mesh(2, 2, 1.0, 1.0)
    coords = m.nodes[m.boundary_nodes].tolist()
    assert coords == [[0, 0], [0.5, 0], [1, 0], [1, 0.5], [1, 1], [0.5, 1], [0, 1], [0, 0.5]]


def test_refine_interval():
    assert refine(build_interval_mesh(2)).cells == (4,)
    m = refine(refine(build_interval_mesh(1)))
    assert m.cells == (4,) and m.h == 0.25


def test_refine_rectangle():
    m = refine(build_rectangle_mesh(2, 2))
    assert m.cells == (4, 4)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_refine_preserves_coordinates_bitwise(nx, ny, lx, ly):
    coarse = build_rectangle_mesh(nx, ny, lx, ly)
    fine = refine(coarse)
    assert fine.h == coarse.h / 2
    fine_set = {tuple(p) for p in fine.nodes.tolist()}
    assert all(tuple(p) in fine_set for p in coarse.nodes.tolist())


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 50), st.floats(0.1, 10.0))
def test_refine_interval_bitwise(n, length):
    coarse = build_interval_mesh(n, length)
    fine = refine(coarse)
    assert np.array_equal(fine.nodes[::2], coarse.nodes)
    assert fine.h == coarse.h / 2


def test_arclength_snapping_ties_to_lowest_index():
    m = build_interval_mesh(4, 1.0)
    assert m.node_at_arclength(0.5) == 0
    sq = build_rectangle_mesh(2, 2, 1.0, 1.0)
    assert sq.node_at_arclength(0.0) == 0
    assert sq.node_at_arclength(2.0) == 8  # corner (1, 1)
    assert sq.node_at_arclength(3.99) == 0  # wraps around the chain


def test_mesh_arrays_are_read_only():
    m = build_interval_mesh(4)
    with pytest.raises(ValueError):
        m.nodes[0, 0] = 1.0
