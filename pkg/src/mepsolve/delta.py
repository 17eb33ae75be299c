"""Ground-truth spectra via operator determinants on the tensor product space.

A multiparameter problem with dimensions n_1..n_m embeds into m+1 commuting
linear problems on the N = prod(n_k) dimensional tensor product space.  The
matrices Delta_0..Delta_m are formal determinant expansions of the
(m+1) x (m+1) array whose first row selects a coordinate and whose k-th row
holds the matrices of equation k, with the Kronecker product in place of
scalar multiplication.  Joint eigenvalues lambda satisfy

    (mu^T lambda) * Delta_ell x = lambda_ell * Delta(mu) x

for the decomposable tensor x = u_1 (x) ... (x) u_m and any weight vector
mu, so one dense eigendecomposition of Delta(mu)^{-1} Delta_1 followed by
Rayleigh-type ratio reads recovers the complete spectrum.  Everything here
is brute force by design -- a validation fixture for the Newton iterations,
guarded to small sizes -- and is deliberately independent of the solver
modules (no shared linear algebra beyond the quadratic forms used for sign
orientation).
"""

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple

import numpy as np

from . import eig
from .newton import w_matrix
from .problem import NonCommuting, SingularDelta, multiindex_of

__all__ = [
    "DeltaOperators",
    "OracleEigenvalue",
    "build_delta",
    "solve_all",
    "hausdorff_distance",
]

SIZE_GUARD = 4096
PARAM_GUARD = 5

# Relative gap under which eigenvalues of a single ratio operator are
# treated as one cluster and separated by the remaining operators.  The
# nonsymmetric eigensolve scatters a multiple eigenvalue well beyond
# rounding, so the gap is generous; anything merged spuriously is split
# again by the projected re-diagonalization.
CLUSTER_GAP = 1e-8

CONSISTENCY_TOL = 1e-8


@dataclass(frozen=True)
class DeltaOperators:
    """The m+1 determinant operators, each N x N, plus the mu-weighted sum."""

    operators: tuple
    mu: np.ndarray | None = None
    weighted: np.ndarray | None = None

    @property
    def m(self):
        return len(self.operators) - 1

    @property
    def size(self):
        return self.operators[0].shape[0]


def _perm_sign(perm):
    inversions = sum(
        1
        for a in range(len(perm))
        for b in range(a + 1, len(perm))
        if perm[a] > perm[b]
    )
    return -1 if inversions % 2 else 1


def build_delta(problem, mu=None):
    """Expand the determinant operators by the Leibniz rule.

    Delta_ell collects the permutations that route column ell through the
    coordinate row; each term is the signed Kronecker product of one matrix
    per equation in fixed order.  With ``mu`` given, the weighted operator
    sum(mu_ell * Delta_ell) is formed as well.  Sizes are guarded: the
    expansion has (m+1)! terms of N^2 entries each.
    """
    m = problem.m
    size = int(np.prod(problem.dims))
    if size > SIZE_GUARD:
        raise ValueError(
            f"tensor space dimension {size} exceeds the guard {SIZE_GUARD}")
    if m > PARAM_GUARD:
        raise ValueError(f"m = {m} exceeds the guard {PARAM_GUARD}")

    dtype = np.complex128 if problem.is_complex() else np.float64
    operators = [np.zeros((size, size), dtype=dtype) for _ in range(m + 1)]
    for perm in itertools.permutations(range(m + 1)):
        factors = [problem.matrices[k][perm[k + 1]] for k in range(m)]
        term = reduce(np.kron, factors) if m > 1 else factors[0].astype(dtype)
        operators[perm[0]] += _perm_sign(perm) * term

    weighted = None
    mu_arr = None
    if mu is not None:
        mu_arr = np.asarray(mu, dtype=np.float64).reshape(-1)
        if mu_arr.size != m + 1:
            raise ValueError(
                f"weight vector has {mu_arr.size} components, expected {m + 1}")
        weighted = sum(mu_arr[ell] * operators[ell] for ell in range(m + 1))
    return DeltaOperators(
        operators=tuple(operators), mu=mu_arr, weighted=weighted)


class OracleEigenvalue(NamedTuple):
    """One joint eigenvalue: unit homogeneous lam, its multiindex, and the
    position of its eigenvector in the tensor-space eigendecomposition."""

    lam: np.ndarray
    index: tuple
    tensor_index: int


def _random_unit(rng, n, complex_data):
    v = rng.standard_normal(n)
    if complex_data:
        v = v + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _sign_witness(problem, mu, rng, draws=100):
    """True when det [mu^T; W(u)] keeps one sign over random u draws."""
    complex_data = problem.is_complex()
    reference = 0
    for _ in range(draws):
        vecs = tuple(
            _random_unit(rng, n, complex_data) for n in problem.dims)
        w = np.asarray(w_matrix(problem, vecs))
        square = np.vstack([mu[None, :], w.real])
        det = np.linalg.det(square)
        if abs(det) < 1e-12:
            return False
        s = 1 if det > 0 else -1
        if reference == 0:
            reference = s
        elif s != reference:
            return False
    return True


def _choose_mu(problem, rng):
    e0 = np.zeros(problem.m + 1)
    e0[0] = 1.0
    yield e0
    for _ in range(40):
        mu = rng.standard_normal(problem.m + 1)
        yield mu / np.linalg.norm(mu)


def _cluster_spans(values, scale):
    """Group sorted positions whose values sit within the cluster gap."""
    order = np.lexsort((values.imag, values.real))
    groups = []
    current = [order[0]]
    for pos in order[1:]:
        if abs(values[pos] - values[current[-1]]) <= CLUSTER_GAP * scale:
            current.append(pos)
        else:
            groups.append(current)
            current = [pos]
    groups.append(current)
    return groups


def _refine(columns, operators, weighted, ell, scale):
    """Split a degenerate eigenspace by diagonalizing the next ratio
    operator projected onto it, recursing over remaining operators."""
    if columns.shape[1] == 1 or ell >= len(operators):
        return [columns[:, j] for j in range(columns.shape[1])]
    order = list(range(1, len(operators))) + [0]
    op = operators[order[ell]]
    gram = columns.conj().T @ weighted @ columns
    projected = np.linalg.solve(gram, columns.conj().T @ op @ columns)
    vals, rots = np.linalg.eig(projected)
    out = []
    for group in _cluster_spans(vals, max(scale, np.abs(vals).max(), 1.0)):
        sub = columns @ rots[:, group]
        sub, _ = np.linalg.qr(sub)
        out.extend(_refine(sub, operators, weighted, ell + 1, scale))
    return out


def _zero_rank_sets(problem, lam, tie_tol=1e-8):
    """Per pencil, the 1-based descending ranks whose eigenvalue ties with
    the one nearest zero.  A simple eigenvalue gives singleton sets; a
    joint eigenvalue of higher multiplicity gives the tied rank ranges."""
    from .problem import pencil_spectrum

    sets = []
    for k in range(problem.m):
        vals = pencil_spectrum(problem, k, lam)
        nearest = np.abs(vals).min()
        scale = max(np.abs(vals).max(), 1.0)
        ranks = [r + 1 for r, v in enumerate(vals)
                 if abs(v) <= nearest + tie_tol * scale]
        sets.append(ranks)
    return sets


def _pencil_vectors(problem, lam, ranks):
    """Eigenvectors of the pencils at the given 1-based ranks."""
    vectors = []
    for k, rank in enumerate(ranks):
        b = eig.assemble_pencil(problem, k, lam)
        if problem.hermitian:
            _, v = eig.kth_largest_hermitian(b, rank)
        else:
            _, v, _ = eig.kth_largest_biorthogonal(b, rank)
        vectors.append(v)
    return tuple(vectors)


def _oriented_representative(problem, lam, mu):
    """Flip lam onto the positive-orientation component when needed.

    The orientation determinant det [lam^T; W(u)] is evaluated with u the
    pencil eigenvectors belonging to the zero eigenvalues; when it is
    numerically ambiguous the sign of mu^T lam decides instead.
    """
    ranks = [r[0] for r in _zero_rank_sets(problem, lam)]
    vectors = _pencil_vectors(problem, lam, ranks)
    w = np.asarray(w_matrix(problem, vectors)).real
    square = np.vstack([lam[None, :], w])
    norms = np.linalg.norm(square, axis=1)
    norms[norms == 0] = 1.0
    det = float(np.linalg.det(square / norms[:, None]))
    if abs(det) > 1e-8:
        return -lam if det < 0 else lam
    return -lam if float(mu @ lam) < 0 else lam


def solve_all(problem, mu=None, seed=0):
    """All N joint eigenvalues, labeled with multiindices.

    Eigenvectors come from one dense eigendecomposition of
    Delta(mu)^{-1} Delta_1; degenerate ratio clusters are re-diagonalized
    with the remaining operators.  Each eigenvalue is returned as the unit
    homogeneous representative with positive orientation determinant
    det [lambda^T; W(u)] (falling back to mu^T lambda > 0 when the
    determinant is numerically ambiguous), where the u_k are rank-one
    factors of the tensor eigenvector.

    Without ``mu`` the weight is chosen automatically: the first coordinate
    direction, then seeded random unit vectors, accepting the first whose
    orientation determinant keeps one sign over random vector draws and
    whose weighted operator is numerically invertible.
    """
    rng = np.random.default_rng(seed)
    if mu is not None:
        candidates = [np.asarray(mu, dtype=np.float64).reshape(-1)]
    else:
        candidates = _choose_mu(problem, rng)

    # The weighted operator only needs to be invertible; a weight whose
    # orientation determinant keeps one sign is preferred (it exists for
    # definite problems) but not required.
    deltas = None
    fallback = None
    fallback_margin = 0.0
    for cand in candidates:
        trial = build_delta(problem, mu=cand)
        svals = np.linalg.svd(trial.weighted, compute_uv=False)
        margin = svals[-1] / svals[0] if svals[0] > 0 else 0.0
        if margin <= 1e-12:
            continue
        if mu is not None or _sign_witness(problem, cand, rng):
            deltas = trial
            break
        if margin > fallback_margin:
            fallback, fallback_margin = trial, margin
    if deltas is None:
        deltas = fallback
    if deltas is None:
        raise SingularDelta(
            "no weight vector produced an invertible operator determinant")

    import scipy.linalg

    lu = scipy.linalg.lu_factor(deltas.weighted)
    size = deltas.size
    t1 = scipy.linalg.lu_solve(lu, deltas.operators[1])
    vals, vecs = np.linalg.eig(t1)
    scale = max(np.abs(vals).max(), 1.0)

    columns = []
    for group in _cluster_spans(vals, scale):
        block = vecs[:, group]
        block, _ = np.linalg.qr(block)
        columns.extend(
            _refine(block, deltas.operators, deltas.weighted, 1, scale))

    if len(columns) != size:
        raise NonCommuting(
            f"refinement produced {len(columns)} eigenvectors for "
            f"dimension {size}")

    op_scale = [np.linalg.norm(op) for op in deltas.operators]
    w_scale = np.linalg.norm(deltas.weighted)
    raw = []
    for position, x in enumerate(columns):
        dx = deltas.weighted @ x
        denom = np.vdot(x, dx)
        if abs(denom) < 1e-14 * np.linalg.norm(x) * np.linalg.norm(dx):
            raise SingularDelta(
                f"eigenvector {position} is isotropic for the weighted "
                f"operator")
        ratios = np.empty(problem.m + 1, dtype=np.complex128)
        for ell in range(problem.m + 1):
            ox = deltas.operators[ell] @ x
            ratios[ell] = np.vdot(x, ox) / denom
            mismatch = np.linalg.norm(ox - ratios[ell] * dx)
            # anchor on the operator scale: vectors that one operator nearly
            # annihilates would otherwise compare roundoff against roundoff
            allowed = CONSISTENCY_TOL * (
                op_scale[ell] + abs(ratios[ell]) * w_scale + 1e-300)
            if mismatch > max(allowed, 1e-12):
                raise NonCommuting(
                    f"operator {ell} disagrees with the ratio read on "
                    f"eigenvector {position}: residual {mismatch:.3e}")
        drift = np.abs(ratios.imag).max()
        if drift > CONSISTENCY_TOL * max(np.abs(ratios).max(), 1.0):
            raise NonCommuting(
                f"eigenvalue ratios of eigenvector {position} have "
                f"imaginary part {drift:.3e}")
        raw.append(ratios.real / np.linalg.norm(ratios.real))

    return _label_representatives(problem, raw, deltas.mu)


def _label_representatives(problem, raw, mu, gap=1e-9):
    """Orient each raw eigenvalue and attach multiindices.

    Copies of a multiple eigenvalue carry tied zero ranks in several
    pencils; the tied index cells (their product set matches the
    multiplicity) are distributed over the copies so that the returned
    labels cover the index grid exactly once.
    """
    # Group duplicates by connected components of the "within gap" relation;
    # sorting-based chaining is unstable when distinct values tie in their
    # leading components.
    points = np.asarray(raw, dtype=np.float64)
    count = points.shape[0]
    close = np.abs(points[:, None, :] - points[None, :, :]).max(axis=2) <= gap
    parent = list(range(count))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(count):
        for j in range(i + 1, count):
            if close[i, j]:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    members = {}
    for pos in range(count):
        members.setdefault(find(pos), []).append(pos)
    groups = list(members.values())

    results = []
    for group in groups:
        lam = _oriented_representative(problem, raw[group[0]], mu)
        rank_sets = _zero_rank_sets(problem, lam)
        cells = sorted(itertools.product(*rank_sets))
        if len(cells) == len(group):
            for cell, position in zip(cells, sorted(group)):
                results.append(OracleEigenvalue(
                    lam=lam, index=cell, tensor_index=position))
        else:
            # Unresolvable tie structure; fall back to the plain label.
            index = multiindex_of(problem, lam)
            for position in sorted(group):
                results.append(OracleEigenvalue(
                    lam=lam, index=index, tensor_index=position))
    results.sort(key=lambda entry: entry.tensor_index)
    return results


def hausdorff_distance(first, second, mod_sign=False):
    """Symmetric Hausdorff distance between two finite point sets, given as
    arrays of shape (count, dim).

    With ``mod_sign`` the pointwise metric is min(|x - y|, |x + y|), which
    compares homogeneous representatives irrespective of orientation.
    """
    from scipy.spatial.distance import cdist

    first = np.atleast_2d(np.asarray(first, dtype=np.float64))
    second = np.atleast_2d(np.asarray(second, dtype=np.float64))
    pairwise = cdist(first, second)
    if mod_sign:
        pairwise = np.minimum(pairwise, cdist(first, -second))
    return float(max(pairwise.min(axis=1).max(), pairwise.min(axis=0).max()))
