"""Newton iteration: W matrix, steps, solve dispatch and frontier search."""

import itertools

import numpy as np
import pytest

import mepsolve as mp
from mepsolve import SolverConfig
from mepsolve.newton import (
    f_index,
    frontier_smallest,
    newton_step_homogeneous,
    newton_step_inhomogeneous,
    w_matrix,
)

from conftest import DIAG_SUM_ORDER, DIAG_TABLE


def unit(v):
    return v / np.linalg.norm(v)


def test_w_matrix_entries(diag_problem):
    u1 = unit(np.array([1.0, 2.0, -1.0]))
    u2 = unit(np.array([0.5, 0.5, 1.0]))
    w = w_matrix(diag_problem, (u1, u2))
    assert w.shape == (2, 3)
    for ell in range(3):
        assert w[0, ell] == pytest.approx(
            u1 @ diag_problem.matrices[0][ell] @ u1)
        assert w[1, ell] == pytest.approx(
            u2 @ diag_problem.matrices[1][ell] @ u2)


def test_w_matrix_real_for_hermitian_complex_problem():
    rng = np.random.default_rng(3)
    rows = []
    for _ in range(2):
        row = []
        for _ in range(3):
            a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            row.append((a + a.conj().T) / 2)
        rows.append(row)
    prob = mp.MepProblem(rows, hermitian=True)
    u = tuple(unit(rng.standard_normal(3) + 1j * rng.standard_normal(3))
              for _ in range(2))
    w = w_matrix(prob, u)
    assert not np.iscomplexobj(w)


def test_inhomogeneous_step_solves_linear_system():
    w = np.array([[1.0, 2.0, 0.5],
                  [-1.0, 0.25, 1.5]])
    lam = newton_step_inhomogeneous(w)
    np.testing.assert_allclose(w @ np.concatenate(([1.0], lam)),
                               np.zeros(2), atol=1e-14)


def test_inhomogeneous_step_singular_block():
    w = np.array([[1.0, 1.0, 1.0],
                  [-1.0, 2.0, 2.0]])
    with pytest.raises(mp.SingularJacobian):
        newton_step_inhomogeneous(w)


def test_homogeneous_step_unit_nullspace():
    rng = np.random.default_rng(0)
    w = rng.standard_normal((2, 3))
    for sign in (1, -1):
        lam = newton_step_homogeneous(w, sign)
        assert np.linalg.norm(lam) == pytest.approx(1.0)
        np.testing.assert_allclose(w @ lam, np.zeros(2), atol=1e-12)
        det = np.linalg.det(np.vstack([lam[None, :], w]))
        assert np.sign(det) == sign


def test_homogeneous_step_rank_deficient():
    w = np.array([[1.0, 2.0, 3.0],
                  [2.0, 4.0, 6.0]])
    with pytest.raises(mp.RankDeficient):
        newton_step_homogeneous(w, 1)


def test_f_index_vanishes_at_eigenvalue(diag_problem):
    for index, lam in DIAG_TABLE.items():
        values = f_index(diag_problem, index, np.array(lam))
        assert np.abs(values).max() <= 1e-13


def test_solve_reaches_every_frozen_eigenvalue(diag_problem):
    for index, lam in DIAG_TABLE.items():
        rep = mp.solve(diag_problem, index, SolverConfig(seed=1))
        assert rep.converged
        np.testing.assert_allclose(rep.pair.lam, lam, atol=1e-11)
        assert rep.pair.multiindex == index


def test_fixed_point_is_stationary(diag_problem):
    # exact eigenvectors in: one step reproduces the eigenvalue and the
    # iteration stops immediately
    lam = DIAG_TABLE[(1, 1)]
    vecs = (np.eye(3)[1], np.eye(3)[1])
    rep = mp.solve(diag_problem, (1, 1), SolverConfig(seed=0),
                   initial_vectors=vecs)
    assert rep.iterations == 1
    assert rep.residuals[-1] <= 1e-12
    np.testing.assert_allclose(rep.pair.lam, lam, atol=1e-12)


def test_scalar_problem_one_iteration():
    rows = [[np.array([[2.0]]), np.array([[1.0]]), np.array([[0.5]])],
            [np.array([[-1.0]]), np.array([[0.25]]), np.array([[1.0]])]]
    prob = mp.MepProblem(rows, hermitian=True)
    rep = mp.solve(prob, (1, 1), SolverConfig())
    assert rep.converged and rep.iterations == 1
    exact = np.linalg.solve(np.array([[1.0, 0.5], [0.25, 1.0]]),
                            -np.array([2.0, -1.0]))
    np.testing.assert_allclose(rep.pair.lam, exact, atol=1e-14)


def test_signed_target_returns_oriented_unit_vector(diag_problem):
    rep = mp.solve(diag_problem, mp.SignedMultiindex((2, 2), 1),
                   SolverConfig(seed=2))
    assert rep.converged
    lam = rep.pair.lam
    assert lam.shape == (3,)
    assert np.linalg.norm(lam) == pytest.approx(1.0)
    assert rep.pair.sign == 1
    # dehomogenized value matches the frozen table
    np.testing.assert_allclose(lam[1:] / lam[0], DIAG_TABLE[(2, 2)],
                               atol=1e-10)


def test_signed_target_negative_orientation(diag_problem):
    plus = mp.solve(diag_problem, ((2, 2), 1), SolverConfig(seed=2))
    minus = mp.solve(diag_problem, ((2, 2), -1), SolverConfig(seed=2))
    np.testing.assert_allclose(plus.pair.lam, -minus.pair.lam, atol=1e-10)


def test_globalization_is_noop_when_monotone(diag_problem):
    # identical iterate histories whenever plain Newton already decreases
    base = mp.solve(diag_problem, (2, 2), SolverConfig(seed=4))
    damped = mp.solve(diag_problem, (2, 2),
                      SolverConfig(seed=4, globalize=True))
    decreasing = all(np.diff(base.residuals) <= 1e-15)
    if decreasing:
        assert len(base.lam_history) == len(damped.lam_history)
        for a, b in zip(base.lam_history, damped.lam_history):
            np.testing.assert_allclose(a, b, atol=1e-14)


def test_globalized_sweep_finds_all_laguerre_eigenvalues():
    prob = mp.gen_laguerre(4, 3, seed=7)
    found = {}
    for index in itertools.product(range(1, 5), repeat=3):
        rep = mp.solve(prob, index, SolverConfig(seed=0, globalize=True))
        assert rep.converged, index
        found[index] = rep.pair.lam
    assert len(found) == 64
    # cross-check the full set against the operator-determinant spectrum
    oracle = mp.solve_all(prob)
    newton_pts = [np.concatenate(([1.0], lam)) / np.linalg.norm(
        np.concatenate(([1.0], lam))) for lam in found.values()]
    dist = mp.hausdorff_distance(newton_pts, [e.lam for e in oracle],
                                 mod_sign=True)
    assert dist <= 1e-8


def test_max_iter_reports_status(diag_problem):
    rep = mp.solve(diag_problem, (3, 3), SolverConfig(seed=0, max_iter=1,
                                                      tol=1e-15))
    if not rep.converged:
        assert rep.status == "max-iter"
        assert rep.iterations == 1


def test_frontier_matches_brute_force_order(diag_problem):
    res = frontier_smallest(diag_problem, 9, (1.0, 1.0), SolverConfig(seed=0))
    assert [idx for idx, _, _ in res.pops] == DIAG_SUM_ORDER
    values = [val for _, _, val in res.pops]
    assert values == sorted(values)
    assert not res.partial
    assert not res.failures


def test_frontier_single_pop_is_smallest(diag_problem):
    res = frontier_smallest(diag_problem, 1, 1, SolverConfig(seed=0))
    assert len(res.pops) == 1
    assert res.pops[0][0] == (1, 1)
    assert res.solve_count == 1


def test_objective_vector_forms(diag_problem):
    from mepsolve.newton import _objective_vector

    np.testing.assert_array_equal(_objective_vector(diag_problem, 2),
                                  [0.0, 0.0, 1.0])
    np.testing.assert_array_equal(_objective_vector(diag_problem, (3.0, 4.0)),
                                  [0.0, 3.0, 4.0])
    np.testing.assert_array_equal(
        _objective_vector(diag_problem, (1.0, 3.0, 4.0)), [1.0, 3.0, 4.0])
    with pytest.raises(ValueError):
        _objective_vector(diag_problem, 3)
    with pytest.raises(ValueError):
        _objective_vector(diag_problem, (1.0, 2.0, 3.0, 4.0))


def test_frontier_records_failures():
    base = mp.gen_well_conditioned(5, 2, seed=3)
    rows = [list(r) for r in base.matrices]
    rows[0][2] = rows[0][1].copy()
    rows[1][2] = rows[1][1].copy()
    prob = mp.MepProblem(rows, hermitian=True)
    res = frontier_smallest(prob, 4, 1, SolverConfig(seed=0))
    assert res.partial
    assert res.failures
    assert res.failures[0][1] == "SingularJacobian"
