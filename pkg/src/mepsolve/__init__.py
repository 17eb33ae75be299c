"""Eigenvalues of definite multiparameter eigenvalue problems by multiindex.

The core entry points are :func:`solve` (Newton iteration targeting one
multiindex), :func:`frontier_smallest` (enumeration in objective order),
and :func:`solve_all` (brute-force tensor-space oracle for small problems).
Problem instances are built by the generators in :mod:`mepsolve.gallery`
or read from problem files via :func:`read_problem`.
"""

from .delta import (
    DeltaOperators,
    OracleEigenvalue,
    build_delta,
    hausdorff_distance,
    solve_all,
)
from .eig import (
    assemble_pencil,
    biorthogonal_eigensystem,
    hermitian_eigensystem,
    kth_largest_biorthogonal,
    kth_largest_hermitian,
)
from .gallery import (
    DefinitenessReport,
    DiagonalMaps,
    EllipsoidConfig,
    RandomSpec,
    check_left_definite_sampled,
    check_local_definite_sampled,
    check_right_definite_sampled,
    congruence_transform,
    ellipsoidal_wave,
    gen_laguerre,
    gen_left_right,
    gen_well_conditioned,
    generate_random,
    symmetrize_diagonal,
    volkmer_example,
)
from .newton import (
    FrontierResult,
    f_index,
    frontier_smallest,
    newton_step_homogeneous,
    newton_step_inhomogeneous,
    solve,
    solve_globalized,
    w_matrix,
)
from .problem import (
    ComplexSpectrum,
    DefectiveEigenvalue,
    Eigenpair,
    MepProblem,
    NonCommuting,
    ProblemFormatError,
    RankDeficient,
    SignedMultiindex,
    SingularDelta,
    SingularJacobian,
    SolveReport,
    SolverConfig,
    SolverError,
    StallDetected,
    lift,
    multiindex_of,
    pencil_spectrum,
    read_problem,
    residual,
    write_problem,
)

__version__ = "0.1.0"

__all__ = [
    "MepProblem",
    "Eigenpair",
    "SignedMultiindex",
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
    "lift",
    "residual",
    "pencil_spectrum",
    "multiindex_of",
    "read_problem",
    "write_problem",
    "assemble_pencil",
    "hermitian_eigensystem",
    "kth_largest_hermitian",
    "biorthogonal_eigensystem",
    "kth_largest_biorthogonal",
    "w_matrix",
    "f_index",
    "newton_step_inhomogeneous",
    "newton_step_homogeneous",
    "solve",
    "solve_globalized",
    "frontier_smallest",
    "FrontierResult",
    "DeltaOperators",
    "OracleEigenvalue",
    "build_delta",
    "solve_all",
    "hausdorff_distance",
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
    "__version__",
]
