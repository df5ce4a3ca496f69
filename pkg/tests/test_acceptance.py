"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

Run ``pytest -m acceptance`` (the lines are printed in the terminal summary)
or ``python3 tests/test_acceptance.py``.
"""

import numpy as np
import pytest

from _configs import T_GRID, config, matrix
from conftest import ACCEPTANCE_LINES
from robinlab import (
    BoundaryMeasure,
    JumpMeasure,
    assemble_operator,
    build_interval_mesh,
    build_rectangle_mesh,
    decompose,
    effective_local_measure,
    marginal_measure,
    propagator,
)
from robinlab.capacity import capacity_refinement_study, closability_probe, relative_capacity
from robinlab.checks import HeatSemigroups, domination_check, neumann_violation_probe, positivity_check, submarkov_check
from robinlab.convergence import gamma_consistency_check, monotone_form_diagnostic, resolvent_convergence_study
from robinlab.measures import admissibility_verdict
from robinlab.oracles import capacity_both_endpoints, capacity_one_endpoint, robin_eigenvalues

pytestmark = pytest.mark.acceptance


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _interval_pair(n, beta=1.0, w0=1.0):
    mesh = build_interval_mesh(n)
    kappa = BoundaryMeasure.from_atoms(mesh, {0: beta, n: beta})
    theta = JumpMeasure(atom_pairs=((0, n, w0),)) if w0 else JumpMeasure()
    return mesh, kappa, theta


def test_01_eigenvalue_oracle():
    exact = robin_eigenvalues(3, 1.0, 1.0, 1.0)
    errs = {}
    for n in (64, 128, 256, 512):
        mesh, kappa, theta = _interval_pair(n)
        F = assemble_operator(kappa, theta, mesh)
        errs[n] = np.abs(decompose(F.A, F.M).eigenvalues[:3] - exact) / exact
    orders = [np.log2(errs[n] / errs[2 * n]).min() for n in (64, 128, 256)]
    worst = errs[512].max()
    ok = worst <= 1e-3 and min(orders) >= 1.9
    record(1, "1D eigenvalue oracle", ok, f"max rel err at n=512 {worst:.2e} (<=1e-3), min order {min(orders):.3f} (>=1.9)")


def test_02_symmetry_decoupling():
    worst, count = 0.0, 0
    mesh, kappa, theta = _interval_pair(64)
    with_jump = decompose(*(lambda F: (F.A, F.M))(assemble_operator(kappa, theta, mesh)))
    without = decompose(*(lambda F: (F.A, F.M))(assemble_operator(kappa, JumpMeasure(), mesh)))

    def symmetric(dec):
        V = dec.eigenvectors
        keep = np.abs(V - V[::-1]).max(axis=0) <= 1e-8 * np.abs(V).max(axis=0)
        return dec.eigenvalues[keep]

    a, b = symmetric(with_jump), symmetric(without)
    ok = a.size == b.size and a.size > 0
    if ok:
        worst = float(np.abs(a - b).max())
        count = a.size
        ok = worst <= 1e-8
    record(2, "symmetry decoupling", ok, f"{count} symmetric modes, max |diff| {worst:.2e} (<=1e-8)")


def test_03_submarkov_suite():
    worst_neg, worst_sum = 0.0, -np.inf
    ok = True
    for dim, kind in matrix():
        mesh, kappa, theta = config(dim, kind)
        sg = HeatSemigroups(kappa, theta, mesh)
        for t in T_GRID:
            P = sg("nonlocal", t)
            ok &= positivity_check(P, 1e-10).passed and submarkov_check(P, 1e-10).passed
            worst_neg = min(worst_neg, P.P.min())
            worst_sum = max(worst_sum, P.P.sum(axis=1).max())
    ok = bool(ok and worst_neg >= -1e-10 and worst_sum <= 1 + 1e-10)
    record(3, "sub-Markov suite", ok, f"min entry {worst_neg:.2e} (>=-1e-10), max row sum - 1 {worst_sum - 1:.2e} (<=1e-10)")


def test_04_domination_chain():
    worst, ident = -np.inf, 0.0
    for dim, kind in matrix():
        mesh, kappa, theta = config(dim, kind)
        sg = HeatSemigroups(kappa, theta, mesh)
        for t in T_GRID:
            P = sg("nonlocal", t)
            for low, high in ((sg("dirichlet", t), sg("local", t)), (sg("local", t), P)):
                worst = max(worst, (low.P - high.P).max())
                domination_check(low, high, 1e-10)
        F = sg.forms
        G = assemble_operator(effective_local_measure(kappa, marginal_measure(theta, mesh)), JumpMeasure(), mesh)
        diff = np.abs(((F.B + F.J) - (G.B - 2.0 * F.W)).toarray()).max()
        ident = max(ident, diff / np.abs(F.A.toarray()).max())
    ok = worst <= 1e-10 and ident <= 1e-13
    record(4, "domination chain", ok, f"max (lower - upper) {worst:.2e} (<=1e-10), identity residual {ident:.2e} x ||A|| (<=1e-13)")


def test_05_neumann_domination_both_directions():
    # The first-order expansion gap = t w0 / M_pp holds while t * rho(M^-1 A) << 1; it is
    # evaluated at t = 1e-6 and the ratio at t = 1e-3 is reported alongside.
    parts, ok = [], True
    for dim in (1, 2):
        mesh, kappa, theta = config(dim, "pair")
        sg = HeatSemigroups(kappa, theta, mesh)
        probe = neumann_violation_probe(kappa, theta, mesh, [1e-3], semigroups=sg)
        p, q, w0 = theta.atom_pairs[0]
        m = sg.forms.mass_diagonal
        ratio = {}
        for t in (1e-6, 1e-3):
            gap = sg("nonlocal", t).P[p, q] - sg("neumann", t).P[p, q]
            ratio[t] = gap / (t * w0 / m[p])
        ok &= probe.worst_violation >= 1e-8 and abs(ratio[1e-6] - 1) <= 0.2
        parts.append(f"{dim}D witness gap {probe.worst_violation:.2e} at t=1e-3, "
                     f"gap/(t w0/M_pp) {ratio[1e-6]:.4f} at t=1e-6 ({ratio[1e-3]:.3f} at t=1e-3)")
        zmesh, zkappa, ztheta = config(dim, "zero")
        clean = neumann_violation_probe(zkappa, ztheta, zmesh, T_GRID)
        ok &= clean.passed
        parts.append(f"{dim}D theta=0 max gap {clean.worst_violation:.1e}")
    record(5, "Neumann domination fails iff theta != 0", bool(ok), "; ".join(parts))


def test_06_capacity_oracles():
    mesh = build_interval_mesh(512)
    both = relative_capacity(mesh, [0, 512]).value
    one = relative_capacity(mesh, [0]).value
    e_both = abs(both - capacity_both_endpoints()) / capacity_both_endpoints()
    e_one = abs(one - capacity_one_endpoint()) / capacity_one_endpoint()
    values = np.array([r.value for r in capacity_refinement_study(build_rectangle_mesh(8, 8), [0.0, 0.0], 5)])
    strict = bool(np.all(np.diff(values) < 0))
    ratio = values[-1] / values[0]
    ok = e_both <= 1e-3 and e_one <= 1e-3 and strict and ratio <= 0.7
    record(6, "capacity oracles", ok, f"rel err Cap{{0,1}} {e_both:.1e}, Cap{{0}} {e_one:.1e} (<=1e-3); "
           f"2D strictly decreasing {strict}, final/initial {ratio:.3f} (<=0.7)")


def test_07_closability_probe():
    sq = build_rectangle_mesh(8, 8)
    z, z2 = sq.nearest_boundary_node([0, 0]), sq.nearest_boundary_node([1, 1])
    k2, t2 = BoundaryMeasure.from_atoms(sq, {z: 1.0}), JumpMeasure(atom_pairs=((z, z2, 1.0),))
    probe2 = closability_probe(k2, t2, sq, 5)
    bv = np.array(probe2.boundary_values)
    h1 = np.array(probe2.h1_energies)
    ok2 = bool(np.all((bv >= 1.9) & (bv <= 2.1)) and np.all(np.diff(h1) < 0))

    line = build_interval_mesh(8)
    k1, t1 = BoundaryMeasure.from_atoms(line, {0: 1.0}), JumpMeasure(atom_pairs=((0, 8, 1.0),))
    probe1 = closability_probe(k1, t1, line, 5)
    ok1 = min(probe1.h1_energies) >= 0.5

    ev2 = {z: [r.value for r in capacity_refinement_study(sq, sq.nodes[z], 5)]}
    ev1 = {0: [r.value for r in capacity_refinement_study(line, line.nodes[0], 5)]}
    v2 = admissibility_verdict(k2, t2, sq, study=ev2)
    v1 = admissibility_verdict(k1, t1, line, study=ev1)
    ok = ok2 and ok1 and not v2.admissible and v1.admissible
    record(7, "closability probe", ok, f"2D form values in [{bv.min():.4f}, {bv.max():.4f}], H1 "
           f"{h1[0]:.3f} -> {h1[-1]:.3f} strictly decreasing {bool(np.all(np.diff(h1) < 0))}; "
           f"1D min H1 {min(probe1.h1_energies):.3f} (>=0.5); verdicts 2D admissible={v2.admissible}, "
           f"1D admissible={v1.admissible}")


def test_08_resolvent_convergence():
    mesh, kappa, theta = _interval_pair(64)
    table = resolvent_convergence_study(kappa, theta, [1.0, 10.0, 100.0, 1000.0], 1.0, 1.0, mesh)
    d = np.array(table.distances)
    strict = bool(np.all(np.diff(d) < 0))
    diag = monotone_form_diagnostic(table)
    ok = strict and d[-1] <= 0.02 * d[0] and diag.passed
    record(8, "resolvent convergence", ok, f"distances {', '.join(f'{x:.2e}' for x in d)}, final/initial "
           f"{d[-1] / d[0]:.4f} (<=0.02); (f,R_c f) nonincreasing and >= Dirichlet value {table.limit_value:.5f}: "
           f"{diag.passed}")


def test_09_gamma_consistency():
    worst = 0.0
    for dim, kind in matrix():
        mesh, kappa, theta = config(dim, kind)
        f = np.random.default_rng(0).standard_normal(mesh.n_nodes)
        r = gamma_consistency_check(kappa, theta, 1.0, f, mesh, tol=1e-8)
        worst = max(worst, r.details["relative_m_norm_difference"])
    record(9, "gamma-consistency", worst <= 1e-8, f"max relative M-norm difference {worst:.2e} (<=1e-8)")


def test_10_semigroup_law_and_symmetry():
    law, sym = 0.0, 0.0
    for dim, kind in matrix():
        mesh, kappa, theta = config(dim, kind)
        F = assemble_operator(kappa, theta, mesh)
        dec = decompose(F.A, F.M)
        M = F.M.toarray()
        for s, t in ((0.1, 0.2), (0.5, 0.5)):
            Ps, Pt, Pst = (propagator(dec, F.M, x).P for x in (s, t, s + t))
            law = max(law, np.abs(Pst - Pt @ Ps).max())
            sym = max(sym, np.abs(M @ Pt - Pt.T @ M).max())
    record(10, "semigroup law and M-symmetry", law <= 1e-10 and sym <= 1e-10,
           f"max ||P(s+t) - P(t)P(s)|| {law:.2e}, max ||MP - P^T M|| {sym:.2e} (<=1e-10)")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
