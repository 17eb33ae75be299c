"""Data model for multiparameter eigenvalue problems.

A multiparameter eigenvalue problem (MEP) couples m matrix pencils

    (A_{k0} + lambda_1 A_{k1} + ... + lambda_m A_{km}) u_k = 0,   k = 1..m,

through the shared parameter vector lambda.  The homogeneous form carries an
extra component lambda_0 multiplying A_{k0}; the inhomogeneous form is the
section lambda_0 = 1.  This module holds the problem container, the residual
and multiindex labels used everywhere else, the solver configuration/report
types, and the on-disk problem-file format.
"""

import json
import math
import time as _time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

__all__ = [
    "MepProblem",
    "SignedMultiindex",
    "Eigenpair",
    "SolverConfig",
    "SolveReport",
    "ProblemFormatError",
    "SolverError",
    "SingularJacobian",
    "RankDeficient",
    "ComplexSpectrum",
    "DefectiveEigenvalue",
    "StallDetected",
    "NonCommuting",
    "SingularDelta",
    "residual",
    "multiindex_of",
    "read_problem",
    "write_problem",
]

HERMITIAN_RTOL = 1e-12


class ProblemFormatError(ValueError):
    """Raised for malformed or inconsistent problem files."""


class SolverError(RuntimeError):
    """Base class for iteration breakdowns.

    ``iteration`` is the 1-based outer iteration at which the breakdown
    occurred (None if outside an iteration), ``report`` the partial solve
    report when one is available.
    """

    def __init__(self, message, iteration=None, report=None):
        super().__init__(message)
        self.iteration = iteration
        self.report = report


class SingularJacobian(SolverError):
    """The m x m Newton system is numerically singular."""


class RankDeficient(SolverError):
    """The m x (m+1) quadratic-form matrix does not have a unique nullspace."""


class ComplexSpectrum(SolverError):
    """A pencil expected to have a real spectrum does not."""


class DefectiveEigenvalue(SolverError):
    """Left and right eigenvectors are (numerically) orthogonal."""


class StallDetected(SolverError):
    """Damping failed to produce a residual decrease."""


class NonCommuting(RuntimeError):
    """The operator-determinant family fails its consistency check."""


class SingularDelta(RuntimeError):
    """The weighted operator determinant is numerically singular."""


class SignedMultiindex(NamedTuple):
    """A multiindex together with the orientation sigma in {+1, -1}."""

    index: tuple
    sign: int


def _as_matrix(a, k, ell):
    m = np.asarray(a)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix A[{k}][{ell}] is not square: shape {m.shape}")
    if np.iscomplexobj(m):
        m = m.astype(np.complex128)
    else:
        m = m.astype(np.float64)
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class MepProblem:
    """An MEP instance: matrices[k][ell] = A_{k+1,ell}, plus a Hermitian flag.

    ``matrices`` is indexed by equation k = 0..m-1 and coefficient
    ell = 0..m; each entry is an n_k x n_k dense matrix.  Instances are
    immutable (the arrays are marked read-only) and safe to share across
    threads.  ``meta`` carries optional descriptive entries (e.g. the
    generator family) that are persisted in problem files.
    """

    matrices: tuple
    hermitian: bool
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        rows = tuple(tuple(_as_matrix(a, k, ell) for ell, a in enumerate(row))
                     for k, row in enumerate(self.matrices))
        object.__setattr__(self, "matrices", rows)
        m = len(rows)
        if m < 1:
            raise ValueError("an MEP needs at least one equation")
        for k, row in enumerate(rows):
            if len(row) != m + 1:
                raise ValueError(
                    f"equation {k} has {len(row)} matrices, expected {m + 1}")
            nk = row[0].shape[0]
            for ell, a in enumerate(row):
                if a.shape[0] != nk:
                    raise ValueError(
                        f"A[{k}][{ell}] is {a.shape[0]}x{a.shape[0]}, "
                        f"but equation {k} has size {nk}")
        if self.hermitian:
            for k, row in enumerate(rows):
                for ell, a in enumerate(row):
                    scale = np.abs(a).max()
                    dev = np.abs(a - a.conj().T).max()
                    if dev > HERMITIAN_RTOL * max(scale, 1e-300):
                        raise ValueError(
                            f"hermitian flag set but A[{k}][{ell}] deviates "
                            f"by {dev:.3e} (entry scale {scale:.3e})")

    @property
    def m(self):
        return len(self.matrices)

    @property
    def dims(self):
        return tuple(row[0].shape[0] for row in self.matrices)

    def is_complex(self):
        return any(np.iscomplexobj(a) for row in self.matrices for a in row)


@dataclass(frozen=True)
class Eigenpair:
    """An eigenvalue with its per-equation eigenvectors.

    ``lam`` has length m (inhomogeneous) or m+1 (homogeneous unit vector).
    Right vectors have unit Euclidean norm; left vectors, present only for
    non-Hermitian solves, are scaled so that w_k^H v_k = 1.
    """

    lam: np.ndarray
    right_vectors: tuple
    multiindex: tuple
    left_vectors: Optional[tuple] = None
    sign: Optional[int] = None

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=np.float64)
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "right_vectors", tuple(self.right_vectors))
        if self.left_vectors is not None:
            object.__setattr__(self, "left_vectors", tuple(self.left_vectors))

    @property
    def homogeneous(self):
        return self.lam.size == len(self.right_vectors) + 1


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls shared by all solver variants.

    ``imag_tol`` bounds the relative imaginary part under which the spectrum
    of a non-Hermitian pencil still counts as real.
    """

    tol: float = 1e-11
    max_iter: int = 40
    tau: float = 0.5
    seed: int = 0
    globalize: bool = False
    imag_tol: float = 1e-8

    def __post_init__(self):
        if not (0.0 < self.tau < 1.0):
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        if self.tol <= 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class SolveReport:
    """Outcome of one solve: status, history and the final eigenpair.

    ``status`` is one of ``converged``, ``max-iter`` or ``breakdown``.
    ``residuals[j-1]`` is the infinity norm of the per-equation eigenvalues
    after outer iteration j, so ``len(residuals) == iterations``.
    ``lam_history`` records the accepted iterate of each outer iteration.
    """

    status: str
    iterations: int
    residuals: list
    pair: Optional[Eigenpair]
    wall_time: float
    lam_history: list = field(default_factory=list)

    @property
    def converged(self):
        return self.status == "converged"


def lift(problem, lam):
    """Return the homogeneous representative of ``lam``.

    Inhomogeneous vectors of length m are lifted with lambda_0 = 1;
    homogeneous vectors of length m+1 pass through unchanged.
    """
    lam = np.asarray(lam, dtype=np.float64).reshape(-1)
    if lam.size == problem.m:
        return np.concatenate(([1.0], lam))
    if lam.size == problem.m + 1:
        return lam
    raise ValueError(
        f"eigenvalue has {lam.size} components, expected "
        f"{problem.m} or {problem.m + 1}")


def residual(problem, pair):
    """Normalized residual max_k ||sum_l lambda_l A_{kl} u_k|| / ||u_k||.

    Inhomogeneous eigenvalues are lifted with lambda_0 = 1.
    """
    lam = lift(problem, pair.lam)
    if len(pair.right_vectors) != problem.m:
        raise ValueError(
            f"{len(pair.right_vectors)} eigenvectors for {problem.m} equations")
    worst = 0.0
    for k in range(problem.m):
        u = np.asarray(pair.right_vectors[k]).reshape(-1)
        if u.size != problem.dims[k]:
            raise ValueError(
                f"eigenvector {k} has size {u.size}, expected {problem.dims[k]}")
        b = sum(lam[ell] * problem.matrices[k][ell] for ell in range(problem.m + 1))
        worst = max(worst, float(np.linalg.norm(b @ u) / np.linalg.norm(u)))
    return worst


def pencil_spectrum(problem, k, lam, imag_tol=1e-8):
    """All eigenvalues of B_k(lam) sorted descending (stable), as reals.

    For non-Hermitian problems the spectrum must be real up to
    ``imag_tol * ||B||``; otherwise ComplexSpectrum is raised.
    """
    lam = np.asarray(lam, dtype=np.float64)
    b = sum(lam[ell] * problem.matrices[k][ell] for ell in range(problem.m + 1))
    if problem.hermitian:
        vals = np.linalg.eigvalsh(b)[::-1]
    else:
        w = np.linalg.eigvals(b)
        scale = max(np.linalg.norm(b), 1e-300)
        worst = np.abs(w.imag).max()
        if worst > imag_tol * scale:
            raise ComplexSpectrum(
                f"pencil {k} has imaginary eigenvalue parts up to "
                f"{worst:.3e} (scale {scale:.3e})")
        vals = w.real[np.argsort(-w.real, kind="stable")]
    return vals


def multiindex_of(problem, lam, imag_tol=1e-8):
    """Label an eigenvalue point by the ranks of zero in the pencil spectra.

    Component k is the 1-based position of the eigenvalue of B_k(lam)
    nearest zero when the spectrum is sorted descending; ties go to the
    smaller rank.  ``lam`` may be inhomogeneous (lifted with lambda_0 = 1)
    or homogeneous.
    """
    lam = lift(problem, lam)
    index = []
    for k in range(problem.m):
        vals = pencil_spectrum(problem, k, lam, imag_tol=imag_tol)
        index.append(int(np.argmin(np.abs(vals))) + 1)
    return tuple(index)


# ---------------------------------------------------------------------------
# Problem files
#
# A problem file is a JSON document with fields
#
#   m          number of spectral parameters,
#   dims       [n_1, ..., n_m],
#   hermitian  boolean,
#   matrices   matrices[k][ell] = flat row-major list of [re, im] pairs,
#   meta       optional object with descriptive entries.
#
# Every float is written as %.16e (17 significant digits), which round-trips
# IEEE doubles exactly; the writer below is byte-deterministic, so
# write(read(f)) == f for canonical files.  Readers reject NaN/Inf.
# ---------------------------------------------------------------------------

def _fmt(x):
    return "%.16e" % x


def _matrix_text(a):
    flat = np.asarray(a, dtype=np.complex128).reshape(-1)
    pairs = ",".join("[%s,%s]" % (_fmt(z.real), _fmt(z.imag)) for z in flat)
    return "[" + pairs + "]"


def write_problem(problem, path):
    """Serialize ``problem`` to ``path`` in the canonical problem-file format."""
    lines = ["{"]
    lines.append('"m": %d,' % problem.m)
    lines.append('"dims": [%s],' % ", ".join(str(n) for n in problem.dims))
    lines.append('"hermitian": %s,' % ("true" if problem.hermitian else "false"))
    lines.append('"matrices": [')
    for k, row in enumerate(problem.matrices):
        lines.append("[")
        for ell, a in enumerate(row):
            sep = "," if ell < problem.m else ""
            lines.append(_matrix_text(a) + sep)
        lines.append("]," if k < problem.m - 1 else "]")
    lines.append("],")
    lines.append('"meta": %s' % json.dumps(problem.meta, sort_keys=True))
    lines.append("}")
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _reject_constant(name):
    raise ProblemFormatError(f"non-finite value {name!r} in problem file")


def read_problem(path):
    """Parse a problem file; see ``write_problem`` for the format."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ProblemFormatError("top level must be an object")
    try:
        m = doc["m"]
        dims = doc["dims"]
        hermitian = doc["hermitian"]
        matrices = doc["matrices"]
    except KeyError as exc:
        raise ProblemFormatError(f"missing field {exc}") from None
    meta = doc.get("meta", {})
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ProblemFormatError(f"m must be a positive integer, got {m!r}")
    if (not isinstance(dims, list) or len(dims) != m
            or any(not isinstance(n, int) or isinstance(n, bool) or n < 1
                   for n in dims)):
        raise ProblemFormatError(f"dims must be {m} positive integers")
    if not isinstance(hermitian, bool):
        raise ProblemFormatError("hermitian must be a boolean")
    if not isinstance(meta, dict):
        raise ProblemFormatError("meta must be an object")
    if not isinstance(matrices, list) or len(matrices) != m:
        raise ProblemFormatError(f"matrices must hold {m} equations")
    rows = []
    for k in range(m):
        row = matrices[k]
        nk = dims[k]
        if not isinstance(row, list) or len(row) != m + 1:
            raise ProblemFormatError(
                f"equation {k} must hold {m + 1} matrices")
        mats = []
        for ell in range(m + 1):
            flat = row[ell]
            if not isinstance(flat, list) or len(flat) != nk * nk:
                raise ProblemFormatError(
                    f"matrix [{k}][{ell}] must hold {nk * nk} entries")
            a = np.empty(nk * nk, dtype=np.complex128)
            for pos, pair in enumerate(flat):
                if (not isinstance(pair, list) or len(pair) != 2
                        or any(isinstance(v, bool) or not isinstance(v, (int, float))
                               for v in pair)):
                    raise ProblemFormatError(
                        f"entry {pos} of matrix [{k}][{ell}] is not an "
                        f"[re, im] pair")
                re, im = float(pair[0]), float(pair[1])
                if not (math.isfinite(re) and math.isfinite(im)):
                    raise ProblemFormatError(
                        f"non-finite entry in matrix [{k}][{ell}]")
                a[pos] = complex(re, im)
            a = a.reshape(nk, nk)
            if np.abs(a.imag).max() == 0.0:
                a = a.real.copy()
            mats.append(a)
        rows.append(tuple(mats))
    try:
        return MepProblem(matrices=tuple(rows), hermitian=hermitian, meta=meta)
    except ValueError as exc:
        raise ProblemFormatError(str(exc)) from None


def now():
    return _time.perf_counter()
