"""Shared numerical tolerances and physical defaults.

Runtime code and the test suite read from this one table so they cannot drift
apart.
"""

import numpy as np

TOL_ORTH = 1e-9
"""Frobenius bound on ``R^T R - I`` for a valid rotation."""

TOL_SKEW = 1e-9
"""Max abs entry of ``M + M^T`` accepted by :func:`vee`."""

SMALL_ANGLE = 1e-8
"""Below this rotation angle ``so3_exp`` switches to its series form."""

TOL_DEGENERATE = 1e-9
"""Smallest singular value accepted by ``project_to_so3``."""

TOL_SINGULAR_SCALE = 1e-12
"""Minimum ``|det A|`` for the 2x2 scale block of SIM_2(3)."""

BLOWUP_NORM = 1e12
"""State magnitude treated as numerical divergence."""

CLASSIFY_TOL = 1e-2
"""Default tolerance for the limit-set classifier."""

GRAVITY = np.array([0.0, 0.0, 9.81])
"""Default inertial-frame gravity vector in m/s^2."""

S_D = np.array([[0.0, 1.0], [0.0, 0.0]])
"""Scale-block generator coupling the velocity column into the position column."""

C_VEC = np.array([[0.0], [1.0]])
"""Column selector for the position column of a 3x2 block."""
