"""Problem generators, definiteness probes, and scaling transforms.

Families
--------
``gen_laguerre``          diagonal pencils from Laguerre polynomials of random
                          nodes; increasingly ill conditioned with m.
``gen_well_conditioned``  near-identity pencils A_kl = Q D Q^T + delta_kl I;
                          uniformly well conditioned.
``gen_left_right``        the well conditioned family with negative definite
                          A_k0, so both ordering and global-convergence
                          structure hold with weight (0, 1, ..., 1).
``volkmer_example``       the classic 4x4x4 diagonal problem that is locally
                          definite but not definite.
``ellipsoidal_wave``      Chebyshev collocation of the separated ellipsoidal
                          wave equation (three parameters, non-Hermitian).

``congruence_transform`` and ``symmetrize_diagonal`` map problems to
equivalent ones; the ``check_*_definite_sampled`` functions probe the
definiteness classes by random sampling (a pass is evidence, a fail is a
certificate with witness vectors).
"""

from dataclasses import dataclass

import numpy as np

from .newton import w_matrix
from .problem import MepProblem

__all__ = [
    "RandomSpec",
    "EllipsoidConfig",
    "DefinitenessReport",
    "DiagonalMaps",
    "gen_laguerre",
    "gen_well_conditioned",
    "gen_left_right",
    "generate_random",
    "volkmer_example",
    "congruence_transform",
    "ellipsoidal_wave",
    "check_right_definite_sampled",
    "check_left_definite_sampled",
    "check_local_definite_sampled",
    "symmetrize_diagonal",
]


@dataclass(frozen=True)
class RandomSpec:
    """Recipe for one random problem instance."""

    n: int
    m: int
    seed: int = 0
    family: str = "well-conditioned"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n = {self.n} must be at least 2")
        if self.m < 2:
            raise ValueError(f"m = {self.m} must be at least 2")
        if self.family not in ("laguerre", "well-conditioned",
                               "left-right-definite"):
            raise ValueError(f"unknown family {self.family!r}")


def generate_random(spec):
    if spec.family == "laguerre":
        return gen_laguerre(spec.n, spec.m, spec.seed)
    if spec.family == "well-conditioned":
        return gen_well_conditioned(spec.n, spec.m, spec.seed)
    return gen_left_right(spec.n, spec.m, spec.seed)


def _symmetric_normal(rng, n):
    g = rng.standard_normal((n, n))
    return (g + g.T) / 2.0


def _laguerre_values(degree, x):
    # Three-term recurrence; stable on the node ranges used here.
    if degree == 0:
        return np.ones_like(x)
    prev = np.ones_like(x)
    cur = 1.0 - x
    for q in range(1, degree):
        prev, cur = cur, ((2 * q + 1 - x) * cur - q * prev) / (q + 1)
    return cur


def gen_laguerre(n, m, seed=0):
    """Random diagonal-pencil problem: A_kl = L_{l-1}(D_k) with D_k drawn
    uniformly from [k-1, k], plus a dense symmetric Gaussian A_k0."""
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(m):
        nodes = rng.uniform(k, k + 1, size=n)
        row = [_symmetric_normal(rng, n)]
        for ell in range(1, m + 1):
            row.append(np.diag(_laguerre_values(ell - 1, nodes)))
        rows.append(tuple(row))
    return MepProblem(
        matrices=tuple(rows), hermitian=True,
        meta={"family": "laguerre", "n": n, "m": m, "seed": seed})


def _random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def _well_conditioned_row(rng, n, m, k):
    row = [_symmetric_normal(rng, n)]
    for ell in range(1, m + 1):
        q = _random_orthogonal(rng, n)
        d = rng.uniform(-0.5 / m, 0.5 / m, size=n)
        a = (q * d) @ q.T
        if ell == k + 1:
            a = a + np.eye(n)
        row.append((a + a.T) / 2.0)
    return row


def gen_well_conditioned(n, m, seed=0):
    """Random problem with A_kl = Q D Q^T + delta_kl I, ||D|| <= 1/(2m):
    every Newton system stays within distance 1/2 of the identity."""
    rng = np.random.default_rng(seed)
    rows = [tuple(_well_conditioned_row(rng, n, m, k)) for k in range(m)]
    return MepProblem(
        matrices=tuple(rows), hermitian=True,
        meta={"family": "well-conditioned", "n": n, "m": m, "seed": seed})


def gen_left_right(n, m, seed=0):
    """Well-conditioned pencils with negative definite A_k0 (spectrum in
    [-3/2, -1/2]), giving both orderings with weight (0, 1, ..., 1)."""
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(m):
        row = _well_conditioned_row(rng, n, m, k)
        s = _symmetric_normal(rng, n)
        s = s / (2.0 * np.linalg.norm(s, 2))
        row[0] = -(np.eye(n) + s)
        rows.append(tuple(row))
    return MepProblem(
        matrices=tuple(rows), hermitian=True,
        meta={"family": "left-right-definite", "n": n, "m": m, "seed": seed})


def volkmer_example():
    """The 4x4x4 diagonal three-parameter problem with entries in {1, 5}
    (up to sign) that is locally definite but not definite."""
    p = np.diag([1.0, 5.0, 1.0, 1.0])
    q = np.diag([1.0, 1.0, 5.0, 1.0])
    r = np.diag([5.0, 1.0, 1.0, 1.0])
    s = -np.diag([1.0, 1.0, 1.0, 5.0])
    rows = (
        (p, q, r, s),
        (q, p, s, r),
        (r, s, p, q),
    )
    return MepProblem(
        matrices=rows, hermitian=True,
        meta={"family": "volkmer", "n": 4, "m": 3})


def congruence_transform(problem, factors):
    """Replace A_kl by B_k A_kl B_k^H for invertible factors B_k.

    Eigenvalues are unchanged; eigenvectors transform by B_k^{-H}.  Factors
    with condition estimate above 1e12 are rejected.
    """
    if len(factors) != problem.m:
        raise ValueError(
            f"{len(factors)} factors for {problem.m} equations")
    rows = []
    for k, b in enumerate(factors):
        b = np.asarray(b)
        if b.shape != (problem.dims[k], problem.dims[k]):
            raise ValueError(
                f"factor {k} has shape {b.shape}, expected square of size "
                f"{problem.dims[k]}")
        cond = np.linalg.cond(b)
        if not np.isfinite(cond) or cond > 1e12:
            raise ValueError(
                f"factor {k} has condition estimate {cond:.3e}")
        row = []
        for a in problem.matrices[k]:
            t = b @ a @ b.conj().T
            if problem.hermitian:
                t = (t + t.conj().T) / 2.0
            row.append(t)
        rows.append(tuple(row))
    meta = dict(problem.meta)
    meta["congruence"] = True
    return MepProblem(
        matrices=tuple(rows), hermitian=problem.hermitian, meta=meta)


# ---------------------------------------------------------------------------
# Ellipsoidal wave equation


@dataclass(frozen=True)
class EllipsoidConfig:
    """Semi-axes 0 < x0 < y0 < z0 and the collocation size per equation."""

    x0: float = 1.0
    y0: float = 1.5
    z0: float = 2.0
    n: int = 60

    def __post_init__(self):
        if not 0 < self.x0 < self.y0 < self.z0:
            raise ValueError(
                f"semi-axes must satisfy 0 < x0 < y0 < z0, got "
                f"({self.x0}, {self.y0}, {self.z0})")
        if self.n < 8:
            raise ValueError(f"collocation size {self.n} is below 8")

    @property
    def a(self):
        return np.sqrt(self.z0**2 - self.x0**2)

    @property
    def b(self):
        return np.sqrt(self.z0**2 - self.y0**2)

    @property
    def c(self):
        return self.a**2 / self.b**2


def _cheb(n):
    """Nodes cos(pi*j/(n-1)), j = 0..n-1, and the first-derivative matrix
    on them (n >= 2).  Nodes run from +1 down to -1."""
    if n < 2:
        raise ValueError("need at least two nodes")
    deg = n - 1
    j = np.arange(n)
    x = np.cos(np.pi * j / deg)
    c = np.hstack([2.0, np.ones(deg - 1), 2.0]) * (-1.0) ** j
    dx = x[:, None] - x[None, :]
    d = np.outer(c, 1.0 / c) / (dx + np.eye(n))
    d = d - np.diag(d.sum(axis=1))
    return x, d


def _collocation(lo, hi, n, c):
    # Map [-1, 1] onto [lo, hi]; nodes then run from hi down to lo.
    x, d = _cheb(n)
    t = (hi - lo) * x / 2.0 + (hi + lo) / 2.0
    d1 = d * (2.0 / (hi - lo))
    d2 = d1 @ d1
    p = t * (t - 1.0) * (t - c)
    phalf = 0.5 * (3.0 * t**2 - 2.0 * (1.0 + c) * t + c)
    a0 = p[:, None] * d2 + phalf[:, None] * d1
    return t, a0


def ellipsoidal_wave(config=None):
    """Collocated separation of the ellipsoidal wave equation.

    Three coupled equations t(t-1)(t-c) u'' + (3t^2 - 2(1+c)t + c)/2 u'
    + (par_1 + par_2 t + par_3 t^2) u = 0 on (c, z0^2/b^2), (1, c), (0, 1),
    each discretized on n mapped Chebyshev points with the equation imposed
    at every node including the singular endpoints 0, 1, c (where the
    leading coefficient vanishes, so those rows are first-order relations).
    The single Dirichlet condition at z0^2/b^2 removes one unknown of the
    first equation, so the dimensions are (n-1, n, n).

    The second equation is negated: its leading coefficient t(t-1)(t-c) is
    negative between 1 and c, and flipping the sign gives all three pencils
    the same orientation, which makes the multiindex grow monotonically
    with the third parameter starting from (1, 1, 1).

    The resulting matrices are non-Hermitian; parameters are ordered so
    that the third one multiplies t^2.
    """
    config = config or EllipsoidConfig()
    c = config.c
    n = config.n
    intervals = (
        (c, config.z0**2 / config.b**2),
        (1.0, c),
        (0.0, 1.0),
    )
    rows = []
    for k, (lo, hi) in enumerate(intervals):
        t, a0 = _collocation(lo, hi, n, c)
        row = [a0, np.eye(n), np.diag(t), np.diag(t**2)]
        if k == 0:
            # Dirichlet at the right endpoint hi = z0^2/b^2 (node 0).
            row = [a[1:, 1:] for a in row]
        if k == 1:
            row = [-a for a in row]
        rows.append(tuple(row))
    meta = {
        "family": "ellipsoid",
        "x0": config.x0, "y0": config.y0, "z0": config.z0, "n": n,
    }
    return MepProblem(matrices=tuple(rows), hermitian=False, meta=meta)


# ---------------------------------------------------------------------------
# Sampled definiteness probes


@dataclass(frozen=True)
class DefinitenessReport:
    """Outcome of a sampled definiteness probe.

    ``margin`` is the worst normalized determinant (or singular-value ratio)
    seen; ``witness`` holds the unit vectors that achieved it.  A failed
    check certifies non-definiteness; a passed check is sampling evidence
    only.
    """

    passed: bool
    margin: float
    witness: tuple
    samples: int
    detail: str = ""


def _sample_vectors(problem, rng):
    complex_data = problem.is_complex()
    vecs = []
    for n in problem.dims:
        v = rng.standard_normal(n)
        if complex_data:
            v = v + 1j * rng.standard_normal(n)
        vecs.append(v / np.linalg.norm(v))
    return tuple(vecs)


def _normalized_det(square):
    norms = np.linalg.norm(square, axis=1)
    norms[norms == 0] = 1.0
    return float(np.linalg.det(square / norms[:, None]))


def check_right_definite_sampled(problem, samples=1000, seed=0):
    """Sample unit vectors and evaluate det [e_0^T; W(u)], the Newton-system
    determinant; right definiteness requires it positive for every u."""
    rng = np.random.default_rng(seed)
    e0 = np.zeros(problem.m + 1)
    e0[0] = 1.0
    worst = np.inf
    witness = None
    for _ in range(samples):
        vecs = _sample_vectors(problem, rng)
        w = np.asarray(w_matrix(problem, vecs)).real
        det = _normalized_det(np.vstack([e0[None, :], w]))
        if det < worst:
            worst = det
            witness = vecs
    return DefinitenessReport(
        passed=worst > 0, margin=worst, witness=witness, samples=samples)


def check_left_definite_sampled(problem, mu, samples=1000, seed=0):
    """Check negative definiteness of every A_k0 exactly, then sample the
    per-equation determinant conditions for the weight mu.

    ``mu`` has m components (or m+1 with a leading zero).  For each k the
    m x m matrix of row quadratic forms with row k replaced by mu must have
    positive determinant for all unit vectors.
    """
    mu = np.asarray(mu, dtype=np.float64).reshape(-1)
    if mu.size == problem.m + 1:
        if abs(mu[0]) > 0:
            raise ValueError("leading weight component must be zero")
        mu = mu[1:]
    elif mu.size != problem.m:
        raise ValueError(
            f"weight vector has {mu.size} components, expected {problem.m}")

    for k in range(problem.m):
        top = np.linalg.eigvalsh(problem.matrices[k][0])[-1]
        if top >= 0:
            return DefinitenessReport(
                passed=False, margin=float(top), witness=None,
                samples=0, detail=f"A_{k}0 is not negative definite")

    rng = np.random.default_rng(seed)
    worst = np.inf
    witness = None
    for _ in range(samples):
        vecs = _sample_vectors(problem, rng)
        w = np.asarray(w_matrix(problem, vecs)).real[:, 1:]
        for k in range(problem.m):
            square = w.copy()
            square[k, :] = mu
            det = _normalized_det(square)
            if det < worst:
                worst = det
                witness = vecs
    return DefinitenessReport(
        passed=worst > 0, margin=worst, witness=witness, samples=samples)


def check_local_definite_sampled(problem, samples=1000, seed=0,
                                 threshold=1e-10):
    """Sample the rank margin of W(u): local definiteness requires full
    rank m everywhere, measured as the smallest-to-largest singular value
    ratio."""
    rng = np.random.default_rng(seed)
    worst = np.inf
    witness = None
    for _ in range(samples):
        vecs = _sample_vectors(problem, rng)
        w = np.asarray(w_matrix(problem, vecs))
        svals = np.linalg.svd(w, compute_uv=False)
        ratio = float(svals[-1] / svals[0]) if svals[0] > 0 else 0.0
        if ratio < worst:
            worst = ratio
            witness = vecs
    return DefinitenessReport(
        passed=worst > threshold, margin=worst, witness=witness,
        samples=samples)


# ---------------------------------------------------------------------------
# Diagonal symmetrization


@dataclass(frozen=True)
class DiagonalMaps:
    """Eigenvector maps accompanying a diagonal symmetrization.

    ``scale[k]`` holds s_k = sqrt(d_L / d_R).  If u solves the symmetrized
    pencil, u / s_k is a right and u * s_k a left eigenvector of the
    original one, and quadratic forms of u equal the bilinear forms of the
    mapped pair.
    """

    scale: tuple

    def right_vector(self, k, u):
        return np.asarray(u) / self.scale[k]

    def left_vector(self, k, u):
        return np.asarray(u) * self.scale[k]


def symmetrize_diagonal(problem, d_left, d_right, tol=1e-10):
    """Conjugate each equation by diag(sqrt(d_L/d_R)) and validate that the
    result is Hermitian within ``tol`` (relative, per matrix).

    Returns the Hermitian problem together with the eigenvector maps.
    Raises ValueError when the supplied diagonals do not symmetrize.
    """
    if len(d_left) != problem.m or len(d_right) != problem.m:
        raise ValueError("need one diagonal pair per equation")
    scales = []
    rows = []
    for k in range(problem.m):
        dl = np.asarray(d_left[k], dtype=np.float64).reshape(-1)
        dr = np.asarray(d_right[k], dtype=np.float64).reshape(-1)
        if dl.size != problem.dims[k] or dr.size != problem.dims[k]:
            raise ValueError(f"diagonal {k} has the wrong length")
        if (dl <= 0).any() or (dr <= 0).any():
            raise ValueError(f"diagonal {k} must be positive")
        s = np.sqrt(dl / dr)
        scales.append(s)
        row = []
        for a in problem.matrices[k]:
            t = (s[:, None] * a) / s[None, :]
            drift = np.abs(t - t.conj().T).max()
            scale = max(np.abs(t).max(), 1e-300)
            if drift > tol * scale:
                raise ValueError(
                    f"equation {k} does not symmetrize: asymmetry "
                    f"{drift:.3e} against scale {scale:.3e}")
            row.append((t + t.conj().T) / 2.0)
        rows.append(tuple(row))
    meta = dict(problem.meta)
    meta["symmetrized"] = True
    transformed = MepProblem(
        matrices=tuple(rows), hermitian=True, meta=meta)
    return transformed, DiagonalMaps(scale=tuple(scales))
