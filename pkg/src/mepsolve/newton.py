"""Newton iterations that target one eigenvalue by its multiindex.

The iteration alternates two moves.  From the current eigenvector tuple it
forms the m x (m+1) matrix W of quadratic forms u_k^H A_{kl} u_k and takes
the Newton step: the solution of W (1, lambda)^T = 0 in the inhomogeneous
case (a dense m x m solve -- the tensor Rayleigh quotient of the vectors),
or the sigma-oriented unit nullspace vector of W in the homogeneous case.
At the new lambda it re-solves the m pencil eigenproblems at the target
ranks, which yields both the next vectors and the stopping quantity: the
vector of ranked eigenvalues F_i(lambda), whose infinity norm is driven to
zero.

Four variants share this loop:

* inhomogeneous Hermitian (right definite problems),
* homogeneous Hermitian with a sign target (locally definite problems),
* inhomogeneous with damping between consecutive iterates (globalized),
* inhomogeneous non-Hermitian via left/right eigenvectors and the
  bilinear forms w_k^H A_{kl} v_k.

``frontier_smallest`` enumerates eigenvalues in increasing objective order
by expanding computed multiindices one unit step at a time.
"""

from dataclasses import dataclass, field

import numpy as np

from . import eig
from .problem import (
    Eigenpair,
    RankDeficient,
    SignedMultiindex,
    SingularJacobian,
    SolveReport,
    SolverConfig,
    SolverError,
    StallDetected,
    now,
)

__all__ = [
    "w_matrix",
    "f_index",
    "newton_step_inhomogeneous",
    "newton_step_homogeneous",
    "solve",
    "solve_globalized",
    "frontier_smallest",
    "FrontierResult",
]

# Damping rounds per outer iteration before giving up; tau = 1/2 shrinks the
# step by 2^-60 at the cap, far below any meaningful resolution.
DAMPING_CAP = 60

COND_LIMIT = 1e14


def w_matrix(problem, right_vectors, left_vectors=None):
    """The m x (m+1) matrix of (bi)quadratic forms of the current vectors.

    Entry (k, ell) is u_k^H A_{kl} u_k, or w_k^H A_{kl} v_k when left
    vectors are supplied.  For Hermitian problems the entries are real and
    the imaginary rounding residue is checked before being discarded.
    """
    m = problem.m
    if len(right_vectors) != m:
        raise ValueError(f"{len(right_vectors)} vectors for {m} equations")
    rows = np.empty((m, m + 1), dtype=np.complex128)
    for k in range(m):
        v = np.asarray(right_vectors[k]).reshape(-1)
        if v.size != problem.dims[k]:
            raise ValueError(
                f"vector {k} has size {v.size}, expected {problem.dims[k]}")
        w = v if left_vectors is None else np.asarray(left_vectors[k]).reshape(-1)
        for ell in range(m + 1):
            rows[k, ell] = np.vdot(w, problem.matrices[k][ell] @ v)
    if problem.hermitian and left_vectors is None:
        drift = np.abs(rows.imag).max()
        scale = max(np.abs(rows).max(), 1.0)
        if drift > 1e-12 * scale:
            raise ValueError(
                f"quadratic forms of a Hermitian problem have imaginary "
                f"part {drift:.3e}")
        return rows.real.copy()
    if np.abs(rows.imag).max() == 0.0:
        return rows.real.copy()
    return rows


def f_index(problem, index, lam, imag_tol=1e-8, want_vectors=False):
    """The Newton function: component k is the index[k]-th largest eigenvalue
    of the pencil B_k(lam).

    ``lam`` may be inhomogeneous (lifted with lambda_0 = 1) or homogeneous.
    With ``want_vectors`` the realized eigenvectors are returned as well --
    ``(values, rights)`` for Hermitian problems and
    ``(values, rights, lefts)`` otherwise.
    """
    from .problem import lift

    lam = lift(problem, lam)
    _check_index(problem, index)
    values = np.empty(problem.m)
    rights = []
    lefts = []
    for k in range(problem.m):
        b = eig.assemble_pencil(problem, k, lam)
        if problem.hermitian:
            values[k], v = eig.kth_largest_hermitian(b, index[k])
            rights.append(v)
        else:
            values[k], v, w = eig.kth_largest_biorthogonal(
                b, index[k], imag_tol=imag_tol)
            rights.append(v)
            lefts.append(w)
    if not want_vectors:
        return values
    if problem.hermitian:
        return values, tuple(rights)
    return values, tuple(rights), tuple(lefts)


def newton_step_inhomogeneous(w):
    """Solve W (1, lambda)^T = 0 for lambda via the right m x m block.

    Raises SingularJacobian when the block's condition number exceeds 1e14,
    which signals loss of definiteness.
    """
    w = np.asarray(w)
    jac = w[:, 1:]
    cond = np.linalg.cond(jac)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularJacobian(
            f"Newton system condition estimate {cond:.3e} exceeds {COND_LIMIT:.1e}")
    lam = np.linalg.solve(jac, -w[:, 0])
    if np.iscomplexobj(lam):
        drift = np.abs(lam.imag).max()
        scale = max(np.abs(lam).max(), 1.0)
        if drift > 1e-8 * scale:
            raise SingularJacobian(
                f"complex Newton step (imaginary part {drift:.3e})")
        lam = lam.real.copy()
    return lam


def _det_sign(lam, w):
    """Sign of det [lambda^T; W] by a sign-tracking factorization."""
    square = np.vstack([lam[None, :], np.asarray(w).real])
    sign, _ = np.linalg.slogdet(square)
    return int(np.sign(sign.real)) if np.iscomplexobj(sign) else int(sign)


def newton_step_homogeneous(w, sign):
    """The unit nullspace vector of W oriented so det [lambda^T; W] has
    the requested sign.

    Raises RankDeficient when the second-smallest singular value of W falls
    below 1e-12 ||W||, i.e. the nullspace is not one-dimensional.
    """
    w = np.asarray(w)
    if np.iscomplexobj(w):
        drift = np.abs(w.imag).max()
        if drift > 1e-8 * max(np.abs(w).max(), 1.0):
            raise RankDeficient(
                f"quadratic-form matrix has imaginary part {drift:.3e}")
        w = w.real.copy()
    m = w.shape[0]
    _, svals, vt = np.linalg.svd(w, full_matrices=True)
    if svals[m - 1] < 1e-12 * svals[0]:
        raise RankDeficient(
            f"second-smallest singular value {svals[m - 1]:.3e} below "
            f"1e-12 * ||W|| = {1e-12 * svals[0]:.3e}")
    lam = vt[m, :]
    oriented = _det_sign(lam, w)
    if oriented == 0:
        raise RankDeficient("orientation determinant vanished")
    if oriented != sign:
        lam = -lam
    return lam


def _check_index(problem, index):
    index = tuple(int(i) for i in index)
    if len(index) != problem.m:
        raise ValueError(
            f"multiindex {index} has {len(index)} entries for m = {problem.m}")
    for k, (i, n) in enumerate(zip(index, problem.dims)):
        if not 1 <= i <= n:
            raise ValueError(
                f"multiindex entry {i} out of range 1..{n} for equation {k}")
    return index


def _random_unit_vectors(problem, rng):
    vecs = []
    complex_data = problem.is_complex()
    for n in problem.dims:
        v = rng.standard_normal(n)
        if complex_data:
            v = v + 1j * rng.standard_normal(n)
        vecs.append(v / np.linalg.norm(v))
    return tuple(vecs)


def _split_target(target):
    if isinstance(target, SignedMultiindex):
        return tuple(target.index), int(target.sign)
    if (isinstance(target, tuple) and len(target) == 2
            and isinstance(target[0], (tuple, list))):
        index, sign = target
        return tuple(index), int(sign)
    return tuple(target), None


def _pencil_block(problem, index, lam_hom, imag_tol):
    """Ranked eigenvalues and vectors of all m pencils at a homogeneous point."""
    values = np.empty(problem.m)
    rights = []
    lefts = [] if not problem.hermitian else None
    for k in range(problem.m):
        b = eig.assemble_pencil(problem, k, lam_hom)
        if problem.hermitian:
            values[k], v = eig.kth_largest_hermitian(b, index[k])
            rights.append(v)
        else:
            values[k], v, w = eig.kth_largest_biorthogonal(
                b, index[k], imag_tol=imag_tol)
            rights.append(v)
            lefts.append(w)
    return values, tuple(rights), tuple(lefts) if lefts is not None else None


def solve(problem, target, config=None, initial_vectors=None):
    """Newton iteration targeting one signed multiindex.

    ``target`` is a multiindex tuple for the inhomogeneous iteration
    (Hermitian problems take the right definite path, non-Hermitian ones the
    biorthogonal path) or a ``SignedMultiindex``/(index, sign) pair for the
    homogeneous iteration on the unit sphere.  ``initial_vectors`` warm-starts
    the iteration; non-Hermitian problems accept ``(rights, lefts)``.

    Breakdowns raise SolverError subclasses with the iteration index and the
    partial report attached; hitting max_iter is a non-exceptional status.
    """
    config = config or SolverConfig()
    index, sign = _split_target(target)
    if config.globalize and sign is None and problem.hermitian:
        return _iterate(problem, index, None, config, initial_vectors,
                        globalize=True)
    return _iterate(problem, index, sign, config, initial_vectors,
                    globalize=False)


def solve_globalized(problem, target, config=None, initial_vectors=None):
    """Damped Newton iteration (inhomogeneous Hermitian problems).

    Identical to ``solve`` while the residual decreases monotonically; when
    a step increases the infinity norm of F_i, the iterate is pulled back
    toward its predecessor, lambda <- tau lambda + (1-tau) lambda_prev,
    until the norm no longer exceeds the previous one.
    """
    index, sign = _split_target(target)
    if sign is not None:
        raise ValueError("globalization applies to inhomogeneous targets only")
    config = config or SolverConfig()
    return _iterate(problem, index, None, config, initial_vectors,
                    globalize=True)


def _iterate(problem, index, sign, config, initial_vectors, globalize):
    index = _check_index(problem, index)
    if sign is not None:
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {sign}")
        if not problem.hermitian:
            raise ValueError(
                "homogeneous sign targets require a Hermitian problem")

    start = now()
    if initial_vectors is None:
        rng = np.random.default_rng(config.seed)
        rights = _random_unit_vectors(problem, rng)
        lefts = None if problem.hermitian else _random_unit_vectors(problem, rng)
    elif problem.hermitian:
        rights = tuple(np.asarray(v) / np.linalg.norm(v)
                       for v in initial_vectors)
        lefts = None
    else:
        if (len(initial_vectors) == 2
                and not np.isscalar(initial_vectors[0])
                and len(initial_vectors[0]) == problem.m
                and not isinstance(initial_vectors[0], np.ndarray)):
            raw_r, raw_l = initial_vectors
        else:
            raw_r, raw_l = initial_vectors, initial_vectors
        rights = tuple(np.asarray(v) / np.linalg.norm(v) for v in raw_r)
        lefts = tuple(np.asarray(v) for v in raw_l)

    residuals = []
    history = []
    lam_prev = None
    r_prev = np.inf
    status = "max-iter"
    pair = None

    for j in range(1, config.max_iter + 1):
        try:
            w = w_matrix(problem, rights, lefts)
            if sign is None:
                lam = newton_step_inhomogeneous(w)
                lam_hom = np.concatenate(([1.0], lam))
            else:
                lam = newton_step_homogeneous(w, sign)
                lam_hom = lam

            values, new_r, new_l = _pencil_block(
                problem, index, lam_hom, config.imag_tol)
            r_new = float(np.abs(values).max())

            if globalize and j > 1:
                rounds = 0
                while r_new > r_prev:
                    rounds += 1
                    if rounds > DAMPING_CAP:
                        raise StallDetected(
                            f"no residual decrease after {DAMPING_CAP} "
                            f"damping rounds")
                    lam = config.tau * lam + (1.0 - config.tau) * lam_prev
                    lam_hom = np.concatenate(([1.0], lam))
                    values, new_r, new_l = _pencil_block(
                        problem, index, lam_hom, config.imag_tol)
                    r_new = float(np.abs(values).max())
        except SolverError as exc:
            exc.iteration = j
            exc.report = SolveReport(
                status="breakdown", iterations=j - 1, residuals=residuals,
                pair=pair, wall_time=now() - start, lam_history=history)
            raise

        rights = new_r
        lefts = new_l
        lam_prev = lam
        r_prev = r_new
        residuals.append(r_new)
        history.append(lam.copy())
        pair = Eigenpair(
            lam=lam, right_vectors=rights, multiindex=index,
            left_vectors=lefts, sign=sign)
        if r_new <= config.tol:
            status = "converged"
            break

    return SolveReport(
        status=status,
        iterations=len(residuals),
        residuals=residuals,
        pair=pair,
        wall_time=now() - start,
        lam_history=history,
    )


@dataclass
class FrontierResult:
    """Pops of a frontier search in objective order, plus solve accounting.

    ``pops`` holds (multiindex, SolveReport, objective value); ``solves_at_pop``
    records the cumulative solve count at the moment of each pop, i.e. the
    number of solves required to produce that many results.  ``failures``
    lists (multiindex, error name) of solves that broke down; ``partial`` is
    set when the search stopped before the requested count.
    """

    pops: list
    solve_count: int
    solves_at_pop: list = field(default_factory=list)
    solve_order: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    partial: bool = False

    @property
    def pairs(self):
        return [rep.pair for _, rep, _ in self.pops]


def _objective_vector(problem, objective):
    mu = np.zeros(problem.m + 1)
    if np.isscalar(objective):
        k = int(objective)
        if not 1 <= k <= problem.m:
            raise ValueError(
                f"objective component {k} out of range 1..{problem.m}")
        mu[k] = 1.0
        return mu
    vec = np.asarray(objective, dtype=np.float64).reshape(-1)
    if vec.size == problem.m:
        mu[1:] = vec
    elif vec.size == problem.m + 1:
        mu[:] = vec
    else:
        raise ValueError(
            f"objective vector has {vec.size} components, expected "
            f"{problem.m} or {problem.m + 1}")
    return mu


def frontier_smallest(problem, count, objective, config=None):
    """Enumerate eigenvalues in increasing mu^T lambda order.

    Maintains the frontier of computed multiindices: repeatedly pop the
    member with the smallest objective value, then solve every successor
    i + e_k all of whose immediate predecessors have been popped (skipping
    entries beyond the dimensions), warm starting each from the parent's
    eigenvectors.  Delaying a successor until its last predecessor is
    popped keeps the solve count minimal while still guaranteeing -- by
    monotonicity of the objective in the multiindex -- that the next
    smallest eigenvalue is always on the frontier.  Stops after ``count``
    pops or when the frontier empties; breakdowns are recorded and their
    nodes are not expanded.
    """
    config = config or SolverConfig()
    mu = _objective_vector(problem, objective)
    root = tuple([1] * problem.m)

    def value(report):
        lam_hom = np.concatenate(([1.0], report.pair.lam)) \
            if report.pair.lam.size == problem.m else report.pair.lam
        return float(mu @ lam_hom)

    solve_count = 0
    solve_order = {}
    failures = []
    frontier = {}

    def attempt(index, warm):
        nonlocal solve_count
        solve_count += 1
        solve_order[index] = solve_count
        try:
            rep = solve(problem, index, config, initial_vectors=warm)
        except SolverError as exc:
            failures.append((index, type(exc).__name__))
            return None
        if not rep.converged:
            failures.append((index, "max-iter"))
            return None
        return rep

    rep = attempt(root, None)
    if rep is not None:
        frontier[root] = (value(rep), rep)
    attempted = {root}
    popped = set()

    pops = []
    solves_at_pop = []
    while len(pops) < count and frontier:
        best = min(frontier, key=lambda i: frontier[i][0])
        val, rep = frontier.pop(best)
        solves_at_pop.append(solve_count)
        pops.append((best, rep, val))
        popped.add(best)
        if len(pops) >= count:
            break
        if rep.pair.left_vectors is not None:
            warm = (rep.pair.right_vectors, rep.pair.left_vectors)
        else:
            warm = rep.pair.right_vectors
        for k in range(problem.m):
            succ = list(best)
            succ[k] += 1
            succ = tuple(succ)
            if succ[k] > problem.dims[k] or succ in attempted:
                continue
            ready = all(
                succ[j] == 1 or tuple(
                    succ[:j] + (succ[j] - 1,) + succ[j + 1:]) in popped
                for j in range(problem.m))
            if not ready:
                continue
            attempted.add(succ)
            srep = attempt(succ, warm)
            if srep is not None:
                frontier[succ] = (value(srep), srep)

    return FrontierResult(
        pops=pops,
        solve_count=solve_count,
        solves_at_pop=solves_at_pop,
        solve_order=solve_order,
        failures=failures,
        partial=len(pops) < count,
    )
