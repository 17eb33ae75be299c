"""Dense eigensolver kernels consumed by the Newton iteration.

Everything here is a thin, contract-checked layer over LAPACK: assemble a
pencil B_k(lambda), return its k-th largest eigenpair (Hermitian path), or a
biorthogonal left/right eigenpair (real-spectrum non-Hermitian path).  Full
decompositions are used throughout -- at the matrix sizes this library
targets, a partial solve would not pay for itself, and the per-eigenvalue
cost model already budgets a full O(n^3) solve.

All operations are stateless and may run concurrently.
"""

import numpy as np
import scipy.linalg

from .problem import ComplexSpectrum, DefectiveEigenvalue

__all__ = [
    "assemble_pencil",
    "kth_largest_hermitian",
    "kth_largest_biorthogonal",
    "hermitian_eigensystem",
    "biorthogonal_eigensystem",
]


def assemble_pencil(problem, k, lam):
    """The matrix sum_{ell=0}^m lam[ell] * A_{k,ell} for equation k (0-based)."""
    lam = np.asarray(lam, dtype=np.float64).reshape(-1)
    if lam.size != problem.m + 1:
        raise ValueError(
            f"lambda has {lam.size} components, expected {problem.m + 1}")
    if not 0 <= k < problem.m:
        raise ValueError(f"equation index {k} out of range 0..{problem.m - 1}")
    row = problem.matrices[k]
    b = lam[0] * row[0]
    for ell in range(1, problem.m + 1):
        b = b + lam[ell] * row[ell]
    return b


def hermitian_eigensystem(b):
    """Eigenvalues (descending) and matching eigenvector columns of Hermitian b."""
    vals, vecs = np.linalg.eigh(b)
    return vals[::-1], vecs[:, ::-1]


def kth_largest_hermitian(b, k):
    """The k-th largest eigenvalue (1-based rank) of Hermitian ``b``.

    Returns ``(eigenvalue, unit eigenvector)``.  With a degenerate spectrum
    any eigenvector of the k-th ranked eigenvalue is a valid answer; the
    LAPACK ordering makes the choice deterministic.
    """
    n = b.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"rank {k} out of range 1..{n}")
    vals, vecs = np.linalg.eigh(b)
    return float(vals[n - k]), vecs[:, n - k]


def biorthogonal_eigensystem(b, imag_tol=1e-8):
    """Real parts (descending) with right/left eigenvector columns of ``b``.

    Raises ComplexSpectrum when the imaginary parts exceed
    ``imag_tol * ||b||_F``.
    """
    vals, vl, vr = scipy.linalg.eig(b, left=True, right=True)
    scale = max(np.linalg.norm(b), 1e-300)
    worst = np.abs(vals.imag).max()
    if worst > imag_tol * scale:
        raise ComplexSpectrum(
            f"imaginary eigenvalue parts up to {worst:.3e} exceed "
            f"{imag_tol:.1e} * ||B|| = {imag_tol * scale:.3e}")
    order = np.argsort(-vals.real, kind="stable")
    return vals.real[order], vr[:, order], vl[:, order]


def kth_largest_biorthogonal(b, k, imag_tol=1e-8):
    """The k-th largest (by real part) eigenvalue of a real-spectrum matrix.

    Returns ``(eigenvalue, right, left)`` with a unit right vector and the
    left vector scaled so that left^H right = 1.  Raises ComplexSpectrum if
    the spectrum is not real within tolerance and DefectiveEigenvalue if the
    raw left/right pairing is numerically orthogonal.
    """
    n = b.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"rank {k} out of range 1..{n}")
    vals, vr, vl = biorthogonal_eigensystem(b, imag_tol=imag_tol)
    right = vr[:, k - 1]
    right = right / np.linalg.norm(right)
    raw_left = vl[:, k - 1]
    raw_left = raw_left / np.linalg.norm(raw_left)
    coupling = np.vdot(raw_left, right)  # raw_left^H right
    if abs(coupling) < 1e-12:
        raise DefectiveEigenvalue(
            f"left/right eigenvectors of rank-{k} eigenvalue are orthogonal "
            f"(|w^H v| = {abs(coupling):.3e})")
    left = raw_left / np.conj(coupling)
    return float(vals[k - 1]), right, left
