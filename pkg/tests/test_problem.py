"""Data model, residual metric, multiindex labeling and persistence."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import mepsolve as mp
from mepsolve import (
    MepProblem,
    ProblemFormatError,
    lift,
    multiindex_of,
    pencil_spectrum,
    read_problem,
    residual,
    write_problem,
)


def test_dims_and_m(diag_problem):
    assert diag_problem.m == 2
    assert diag_problem.dims == (3, 3)
    assert diag_problem.hermitian


def test_matrices_are_read_only(diag_problem):
    with pytest.raises(ValueError):
        diag_problem.matrices[0][0][0, 0] = 5.0


def test_row_length_validated():
    a = np.eye(2)
    with pytest.raises(ValueError, match="expected 3"):
        MepProblem([[a, a], [a, a, a]], hermitian=False)


def test_mismatched_sizes_rejected():
    a = np.eye(2)
    b = np.eye(3)
    with pytest.raises(ValueError):
        MepProblem([[a, a, b], [a, a, a]], hermitian=False)


def test_hermitian_flag_verified():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    s = np.eye(2)
    with pytest.raises(ValueError, match="hermitian"):
        MepProblem([[a, s, s], [s, s, s]], hermitian=True)


def test_lift_adds_unit_head(diag_problem):
    lam = np.array([0.25, -0.5])
    lifted = lift(diag_problem, lam)
    assert lifted.shape == (3,)
    assert lifted[0] == 1.0
    np.testing.assert_array_equal(lifted[1:], lam)
    # already homogeneous vectors pass through
    np.testing.assert_array_equal(lift(diag_problem, lifted), lifted)


def test_pencil_spectrum_descending(diag_problem):
    lam = np.array([1.0, -0.9440, -0.4700])
    values = pencil_spectrum(diag_problem, 0, lam)
    assert np.all(np.diff(values) <= 1e-14)


def test_residual_zero_at_exact_eigenpair(diag_problem):
    # multiindex (1,1) sits in diagonal cell (2,2): unit coordinate vectors
    pair = mp.Eigenpair(lam=np.array([-0.944, -0.47]),
                        right_vectors=(np.eye(3)[1], np.eye(3)[1]),
                        multiindex=(1, 1))
    assert residual(diag_problem, pair) <= 1e-14


def test_multiindex_of_frozen_table(diag_problem):
    from conftest import DIAG_TABLE

    for index, lam in DIAG_TABLE.items():
        assert multiindex_of(diag_problem, np.array(lam)) == index


def test_multiindex_ties_take_smaller_rank():
    # both diagonal entries of the first pencil vanish at lam = 0
    rows = [[np.zeros((2, 2)), np.eye(2), np.zeros((2, 2))],
            [np.diag([1.0, -1.0]), np.zeros((2, 2)), np.eye(2)]]
    prob = MepProblem(rows, hermitian=True)
    assert multiindex_of(prob, np.array([0.0, -1.0])) == (1, 1)


def test_round_trip(tmp_path, diag_problem):
    path = tmp_path / "diag.json"
    write_problem(diag_problem, path)
    back = read_problem(path)
    assert back.m == diag_problem.m
    assert back.dims == diag_problem.dims
    assert back.hermitian == diag_problem.hermitian
    assert back.meta["family"] == "diag-fixture"
    for row_a, row_b in zip(diag_problem.matrices, back.matrices):
        for a, b in zip(row_a, row_b):
            np.testing.assert_array_equal(a, b)


def test_read_rejects_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ProblemFormatError):
        read_problem(path)
    path.write_text('{"m": 1}')
    with pytest.raises(ProblemFormatError):
        read_problem(path)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 4), st.integers(2, 3),
       st.booleans())
def test_round_trip_exact_over_random_problems(tmp_path_factory, seed, n, m,
                                               complex_entries):
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(m):
        row = []
        for _ in range(m + 1):
            a = rng.standard_normal((n, n))
            if complex_entries:
                a = a + 1j * rng.standard_normal((n, n))
            row.append(a)
        rows.append(row)
    prob = MepProblem(rows, hermitian=False)
    path = tmp_path_factory.mktemp("rt") / "p.json"
    write_problem(prob, path)
    back = read_problem(path)
    for row_a, row_b in zip(prob.matrices, back.matrices):
        for a, b in zip(row_a, row_b):
            np.testing.assert_array_equal(a, b)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=2))
def test_lift_is_idempotent(values):
    prob = mp.gen_well_conditioned(2, 2, seed=0)
    lam = np.array(values)
    once = lift(prob, lam)
    np.testing.assert_array_equal(lift(prob, once), once)


def test_solver_errors_carry_context():
    # duplicated lambda columns make the Newton system singular for
    # every choice of vectors, so the solve must fail fast
    base = mp.gen_well_conditioned(5, 2, seed=3)
    rows = [list(r) for r in base.matrices]
    rows[0][2] = rows[0][1].copy()
    rows[1][2] = rows[1][1].copy()
    prob = MepProblem(rows, hermitian=True)
    with pytest.raises(mp.SingularJacobian) as info:
        mp.solve(prob, (3, 3), mp.SolverConfig(seed=5))
    assert info.value.iteration == 1
    assert info.value.report.status == "breakdown"
    assert isinstance(info.value, mp.SolverError)
