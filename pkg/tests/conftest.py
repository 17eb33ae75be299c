"""Shared fixtures.

``diag_problem`` is a right definite two-parameter problem with diagonal
matrices, small enough that every eigenvalue can be written down by hand:
for the pair of diagonal positions (i, j) the eigenvalue solves the 2x2
linear system

    [a11_i  a12_i] [lam_1]   [a10_i]
    [a21_j  a22_j] [lam_2] = -[a20_j].

``DIAG_TABLE`` freezes that enumeration, keyed by the multiindex of each
eigenvalue (the rank of the zeroed diagonal entry in the two pencils).
"""

import numpy as np
import pytest

from mepsolve import MepProblem

DIAG_ROW1 = (np.diag([0.3, 1.7, -0.6]),
             np.diag([1.0, 2.0, 1.5]),
             np.diag([0.2, -0.4, 0.3]))
DIAG_ROW2 = (np.diag([-1.1, 0.8, 0.4]),
             np.diag([-0.3, 0.25, 0.1]),
             np.diag([2.0, 1.2, 1.6]))

# multiindex -> (lambda_1, lambda_2), from the per-cell 2x2 solves above
DIAG_TABLE = {
    (1, 1): (-9.4400000000000000e-01, -4.7000000000000000e-01),
    (1, 2): (-8.8888888888888884e-01, -1.9444444444444442e-01),
    (1, 3): (-7.6288659793814428e-01, +4.3556701030927841e-01),
    (2, 1): (-1.7391304347826084e-01, -6.3043478260869579e-01),
    (2, 2): (-2.5316455696202528e-01, -2.3417721518987342e-01),
    (2, 3): (-3.9805825242718446e-01, +4.9029126213592233e-01),
    (3, 1): (+5.5652173913043479e-01, -7.8260869565217395e-01),
    (3, 2): (+4.5569620253164556e-01, -2.7848101265822783e-01),
    (3, 3): (+2.8155339805825241e-01, +5.9223300970873782e-01),
}

# indices sorted by lambda_1 + lambda_2, i.e. the frontier pop order for
# the objective direction (1, 1)
DIAG_SUM_ORDER = [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3),
                  (3, 1), (2, 3), (3, 2), (3, 3)]


def make_diag_problem():
    return MepProblem([DIAG_ROW1, DIAG_ROW2], hermitian=True,
                      meta={"family": "diag-fixture"})


@pytest.fixture
def diag_problem():
    return make_diag_problem()
