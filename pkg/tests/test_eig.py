"""Pencil assembly and k-th largest eigenpair extraction."""

import numpy as np
import pytest

import mepsolve as mp
from mepsolve.eig import (
    assemble_pencil,
    kth_largest_biorthogonal,
    kth_largest_hermitian,
)


def test_assemble_pencil_is_linear_combination(diag_problem):
    lam = np.array([2.0, -1.0, 0.5])
    b = assemble_pencil(diag_problem, 0, lam)
    row = diag_problem.matrices[0]
    expected = 2.0 * row[0] - 1.0 * row[1] + 0.5 * row[2]
    np.testing.assert_allclose(b, expected)


def test_kth_largest_hermitian_ranks():
    b = np.diag([3.0, -1.0, 7.0, 0.0])
    values = sorted([3.0, -1.0, 7.0, 0.0], reverse=True)
    for k in range(1, 5):
        val, vec = kth_largest_hermitian(b, k)
        assert val == pytest.approx(values[k - 1])
        np.testing.assert_allclose(b @ vec, val * vec, atol=1e-12)
        assert np.linalg.norm(vec) == pytest.approx(1.0)


def test_kth_largest_hermitian_rejects_bad_rank():
    b = np.eye(3)
    with pytest.raises(ValueError):
        kth_largest_hermitian(b, 0)
    with pytest.raises(ValueError):
        kth_largest_hermitian(b, 4)


def test_kth_largest_biorthogonal_matches_hermitian_on_symmetric():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((6, 6))
    b = (a + a.T) / 2
    for k in (1, 3, 6):
        val_h, _ = kth_largest_hermitian(b, k)
        val_b, v, w = kth_largest_biorthogonal(b, k, imag_tol=1e-8)
        assert val_b == pytest.approx(val_h, abs=1e-12)
        # left/right vectors are biorthogonal: w^H v = 1
        assert np.vdot(w, v) == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(b @ v, val_b * v, atol=1e-10)
        np.testing.assert_allclose(b.T.conj() @ w, np.conj(val_b) * w,
                                   atol=1e-10)


def test_kth_largest_biorthogonal_similarity():
    # diag scaling destroys symmetry but keeps the (real) spectrum
    rng = np.random.default_rng(5)
    a = rng.standard_normal((5, 5))
    sym = (a + a.T) / 2
    d = rng.uniform(0.5, 2.0, 5)
    nonsym = sym * d[:, None] / d[None, :]
    for k in (1, 2, 5):
        val_h, _ = kth_largest_hermitian(sym, k)
        val_b, v, w = kth_largest_biorthogonal(nonsym, k, imag_tol=1e-8)
        assert val_b == pytest.approx(val_h, abs=1e-10)
        np.testing.assert_allclose(nonsym @ v, val_b * v, atol=1e-9)


def test_complex_spectrum_raises():
    # rotation matrix: eigenvalues +-i
    b = np.array([[0.0, -1.0], [1.0, 0.0]])
    with pytest.raises(mp.ComplexSpectrum):
        kth_largest_biorthogonal(b, 1, imag_tol=1e-8)


def test_pencil_spectrum_counts_and_order(diag_problem):
    lam = np.array([1.0, 0.3, -0.2])
    values = mp.pencil_spectrum(diag_problem, 1, lam)
    b = assemble_pencil(diag_problem, 1, lam)
    np.testing.assert_allclose(values, np.sort(np.diag(b))[::-1], atol=1e-14)


def test_pencil_spectrum_complex_guard():
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    eye = np.eye(2)
    prob = mp.MepProblem([[rot, eye, eye], [eye, eye, -eye]], hermitian=False)
    with pytest.raises(mp.ComplexSpectrum):
        mp.pencil_spectrum(prob, 0, np.array([1.0, 0.0, 0.0]))
