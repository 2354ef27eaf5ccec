"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
summary.  Tolerances are pinned here, not configurable.
"""

import math
import time

import numpy as np
import pytest

from rigidori import (build_system, check_state, classify, compose_forest,
                      is_flat_state, jacobian, loop_flex_path, residual,
                      track_flex, track_to, vertex_loop)
from rigidori.errors import NotForest
from rigidori.genericity import (multigraph, pack_spanning_trees,
                                 panel_hinge_multigraph, verify_packing)
from rigidori.singlevertex import explore_vertex, solve_degree3
from rigidori.tracking import gauss_newton_correct
from rigidori import patterns

from conftest import (exhaustive_tree_packing, fd_jacobian,
                      random_connected_multigraph, random_solved_states)


def _ok(num, text):
    print(f"PASS criterion {num}: {text}")


def test_c01_cross_branches():
    system = build_system(patterns.cross_vertex())
    t0 = time.perf_counter()
    up = track_flex(system, np.zeros(4), [0, 1, 0, 1], steps=100)
    right = track_flex(system, np.zeros(4), [1, 0, 1, 0], steps=100)
    elapsed = time.perf_counter() - t0

    assert len(up) == 101 and len(right) == 101
    assert max(up.residuals) <= 1e-9 and max(right.residuals) <= 1e-9
    assert np.abs(up.samples[:, [0, 2]]).max() <= 1e-9      # rho1 = rho3 = 0
    assert np.abs(up.samples[:, 1] - up.samples[:, 3]).max() <= 1e-9
    assert np.abs(right.samples[:, [1, 3]]).max() <= 1e-9   # rho2 = rho4 = 0
    assert np.abs(right.samples[:, 0] - right.samples[:, 2]).max() <= 1e-9
    assert elapsed < 1.0
    _ok(1, f"both cross branches recovered, 100 samples each, "
           f"residual <= 1e-9, {elapsed:.2f}s")


def test_c02_degree3_oracle():
    rng = np.random.default_rng(31416)
    n_sol = 0
    n_swept = 0
    for _ in range(1000):
        alphas = rng.uniform(0.05, 2 * math.pi - 0.05, 3)
        sol = solve_degree3(alphas)
        loop = vertex_loop(alphas, [0, 1, 2])
        for p in sol.points:
            assert loop.max_deviation(loop.transform(p)) <= 1e-10
            n_sol += 1
        for fam in sol.families:
            for t in np.linspace(-math.pi, math.pi, 7):
                assert loop.max_deviation(loop.transform(fam.point(t))) <= 1e-10
        found = explore_vertex(alphas, grid_step=math.pi / 50)
        if sol.empty:
            assert not found, f"sweep found solutions the closed form missed: {alphas}"
        for f in found:
            n_swept += 1
            assert sol.distance(f) <= 1e-6
    _ok(2, f"1000 random triples: {n_sol} closed-form solutions at 1e-10, "
           f"{n_swept} swept solutions all within 1e-6 of the closed-form set")


def test_c03_negation_symmetry_and_mirror_reports():
    rng = np.random.default_rng(2718)
    fixtures = [
        (patterns.cross_vertex(), np.zeros(4)),
        (patterns.forest_two_vertices(), np.zeros(7)),
        (patterns.miura_3x3(), np.zeros(12)),
        (patterns.three_squares(), np.zeros(2)),
        (patterns.pentagon_ring(), np.zeros(5)),
    ]
    checked = 0
    for pat, rho0 in fixtures:
        system = build_system(pat)
        states = random_solved_states(system, rho0, 40, rng,
                                      steps=25, step_size=0.05)
        for state in states:
            assert residual(system, -state).max_norm <= 1e-9
            rep = check_state(pat, state)
            mir = check_state(pat, -state)
            assert rep.crossing_pairs == mir.crossing_pairs
            assert ([r["pair"] for r in rep.overlap_pairs]
                    == [r["pair"] for r in mir.overlap_pairs])
            checked += 1
    # flat stacked states carry declared orders; mirroring flips the signs
    pat = patterns.three_squares()
    flat = np.array([-math.pi, -math.pi])
    rep = check_state(pat, flat, lambda_pairs=[(0, 2, 1)])
    mir = check_state(pat, -flat, lambda_pairs=[(0, 2, -1)])
    assert rep.verdict == mir.verdict == "ordered"
    assert rep.overlap_pairs[0]["sign"] == -mir.overlap_pairs[0]["sign"]
    checked += 2
    assert checked >= 200
    _ok(3, f"{checked} solved states: residual(-rho) <= 1e-9 and mirrored "
           f"contact reports with flipped stacking signs")


def test_c04_jacobian_against_finite_differences():
    rng = np.random.default_rng(1618)
    makers = [patterns.cross_vertex, patterns.miura_3x3,
              patterns.pentagon_ring, patterns.forest_two_vertices,
              patterns.hexagon_fan, patterns.square_ring]
    draws = 0
    worst = 0.0
    while draws < 100:
        pat = makers[draws % len(makers)]()
        system = build_system(pat)
        rho = rng.uniform(-2.5, 2.5, system.n_vars)
        Ja = jacobian(system, rho)
        Jf = fd_jacobian(system, rho)
        rel = np.abs(Ja - Jf).max() / max(np.abs(Jf).max(), 1.0)
        worst = max(worst, rel)
        assert rel < 1e-6
        draws += 1
    _ok(4, f"100 (pattern, rho) draws: max relative Jacobian error {worst:.2e}")


def test_c05_developable_dof_formula():
    from rigidori import deg_formula_developable
    specs = [
        ("miura 3x3", patterns.miura_3x3()),
        ("grid 2x2", patterns.sheared_grid(2, 2, shear=0.0)),
        ("grid 2x3", patterns.sheared_grid(2, 3, shear=0.25)),
        ("grid 3x2", patterns.sheared_grid(3, 2, shear=-0.3)),
        ("grid 4x4", patterns.sheared_grid(4, 4, shear=0.2)),
        ("grid 2x4 jitter", patterns.sheared_grid(2, 4, shear=0.15, jitter=0.08, seed=1)),
        ("grid 3x3 jitter", patterns.sheared_grid(3, 3, shear=0.0, jitter=0.1, seed=2)),
        ("grid 4x2", patterns.sheared_grid(4, 2, shear=0.35)),
        ("grid 5x3", patterns.sheared_grid(5, 3, shear=0.1)),
        ("grid 3x4 jitter", patterns.sheared_grid(3, 4, shear=0.05, jitter=0.05, seed=3)),
    ]
    results = []
    for name, pat in specs:
        assert all(len(pat.vertex_creases[v]) >= 4 for v in pat.inner_vertices)
        formula = deg_formula_developable(pat)
        numeric = classify(build_system(pat), np.zeros(pat.n_vars)).deg
        assert formula == numeric and formula > 0
        results.append((name, formula))
    assert dict(results)["miura 3x3"] == 4
    _ok(5, "deg(0) = j - 2i on 10 developable patterns: "
           + ", ".join(f"{n}={d}" for n, d in results))


def test_c06_first_order_rigid_soundness():
    rng = np.random.default_rng(6180)
    rigid_states = []
    cone = patterns.single_vertex_cone([math.pi / 2] * 3)
    rigid_states.append((build_system(cone), np.array([math.pi / 2] * 3)))
    rigid_states.append((build_system(cone), np.array([-math.pi / 2] * 3)))
    found = 0
    while found < 3:
        alphas = rng.uniform(0.4, 2.2, 3)
        sol = solve_degree3(alphas)
        if not sol.points or np.abs(sol.points[0]).max() < 0.4:
            continue
        system = build_system(patterns.single_vertex_cone(alphas))
        state = sol.points[0]
        if classify(system, state).first_order_rigid:
            rigid_states.append((system, state))
            found += 1

    for system, state in rigid_states:
        rep = classify(system, state)
        assert rep.first_order_rigid
        for _ in range(100):
            probe = state + rng.uniform(-0.3, 0.3, len(state))
            out, _, ok = gauss_newton_correct(system, probe, tol=1e-9)
            if not ok or residual(system, out).max_norm > 1e-9:
                continue
            dist = float(np.abs(out - state).max())
            assert dist <= 1e-6 or dist > 0.3, \
                f"distinct nearby solution {out} at distance {dist}"
    _ok(6, f"{len(rigid_states)} first-order rigid states x 100 perturbation "
           f"restarts: no distinct solution within max-norm 0.3")


def test_c07_locked_fixture_is_rigid():
    system, lock = patterns.locked_two_vertex_system()
    assert residual(system, lock).max_norm <= 1e-12
    assert abs(lock[0] - math.pi / 2) < 1e-12
    fwd = track_to(system, lock, -lock, max_steps=2500)
    bwd = track_to(system, -lock, lock, max_steps=2500)
    assert not fwd.success and not bwd.success
    _ok(7, "locked two-vertex fixture: shared angle pinned at pi/2, "
           "track_to fails in both directions")


def test_c08_forest_composition():
    system = build_system(patterns.forest_two_vertices())
    rho0 = np.zeros(system.n_vars)
    paths = {k: loop_flex_path(system, rho0, k, prefer_var=0)
             for k in range(len(system.loops))}
    composed = compose_forest(system, rho0, paths)
    assert composed.termination == "composed"
    assert max(composed.residuals) <= 1e-9
    assert composed.samples[:, 0].max() > 0.3 and composed.samples[:, 0].min() < -0.3

    lock_sys, _ = patterns.locked_two_vertex_system()
    with pytest.raises(NotForest):
        compose_forest(lock_sys, np.zeros(9), {})
    _ok(8, f"forest fixture composes a {len(composed)}-sample global path "
           f"through the flat state; cyclic fixture rejected with NotForest")


def test_c09_tree_packing_oracle():
    rng = np.random.default_rng(1729)
    cases = 0
    for _ in range(120):
        n, edges = random_connected_multigraph(rng, max_edges=8)
        for k in (1, 2, 3):
            got = pack_spanning_trees(n, edges, k=k)
            assert got.feasible == exhaustive_tree_packing(n, edges, k)
            if got.feasible:
                assert verify_packing(got, n, edges)
                assert len(edges) >= k * (n - 1)
            else:
                cross, bound = got.violation(edges)
                assert cross < bound
            cases += 1
    # structured instances
    import itertools
    k5 = list(itertools.combinations(range(5), 2))
    assert pack_spanning_trees(5, k5, k=2).feasible
    chain = [(0, 1), (1, 2), (2, 3)]
    infeas = pack_spanning_trees(4, chain, k=2)
    assert not infeas.feasible and infeas.partition == [[0], [1], [2], [3]]
    cases += 2

    grid = patterns.sheared_grid(2, 2, shear=0.0)
    body5 = multigraph(panel_hinge_multigraph(grid), 5)
    packing = pack_spanning_trees(len(grid.panels), body5, k=6)
    assert packing.feasible and verify_packing(packing, 4, body5)
    _ok(9, f"{cases} oracle comparisons agree; certificates validate; "
           f"2x2 quad-grid five-fold hinge graph packs 6 trees (generically rigid)")


def test_c10_flat_state_and_fig4_orders():
    pat = patterns.three_squares()
    flat = np.array([-math.pi, -math.pi])
    assert is_flat_state(flat)
    assert not is_flat_state(np.array([-math.pi, -0.5]))

    order_a = check_state(pat, flat, lambda_pairs=[(0, 2, 1)])
    order_b = check_state(pat, flat, lambda_pairs=[(0, 2, -1)])
    assert order_a.verdict == "ordered" and not order_a.conflicts
    assert order_b.verdict == "ordered" and not order_b.conflicts
    bad = check_state(pat, flat, lambda_pairs=[(0, 2, 1), (2, 0, 1)])
    assert bad.verdict == "crossing" and bad.conflicts
    _ok(10, "(-pi, -pi) detected flat; both stacking orders validate; "
            "contradictory assignment rejected as crossing")
