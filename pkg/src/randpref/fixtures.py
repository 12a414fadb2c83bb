"""Reference configurations and published vectors used by tests and the CLI.

Row order of ``SYMMETRIC3_GAMMA`` and of the Monte Carlo vectors is the
published one (three budgets of four patches each); it is related to the
canonical order of :func:`compute_patch_partition` only up to permutation.
"""

from __future__ import annotations

import numpy as np

from .budgets import Budget

_PUBLISHED_ROWS = """
1 1 1 1 1 1 1 1 1 1 1 1 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0
0 0 0 0 0 0 0 0 0 0 0 0 1 1 1 1 1 1 0 0 0 0 0 0 0 0 0
0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 1 1 1 1 1 1 0 0 0
0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 1 1 1
1 1 1 1 0 0 0 0 0 0 0 0 1 1 1 1 0 0 1 1 0 0 0 0 1 1 0
0 0 0 0 1 1 1 1 0 0 0 0 0 0 0 0 0 0 0 0 1 1 0 0 0 0 0
0 0 0 0 0 0 0 0 1 1 0 0 0 0 0 0 1 1 0 0 0 0 1 0 0 0 1
0 0 0 0 0 0 0 0 0 0 1 1 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0
1 0 0 0 1 0 0 0 1 0 1 0 1 0 0 0 1 0 1 0 1 0 1 1 1 0 1
0 1 0 0 0 1 0 0 0 0 0 0 0 1 0 0 0 0 0 1 0 0 1 0 0 1 0
0 0 1 0 0 0 1 0 0 1 0 1 0 0 1 0 0 1 0 0 0 0 0 0 0 0 0
0 0 0 1 0 0 0 1 0 0 0 0 0 0 0 1 0 0 0 0 0 0 0 0 0 0 0
"""

#: 12x27 WARP type matrix exactly as published. Column 22 (0-based) carries
#: two ones in the third budget block and column 21 none.
SYMMETRIC3_GAMMA_AS_PUBLISHED = np.array(
    [[int(v) for v in line.split()] for line in _PUBLISHED_ROWS.strip().splitlines()],
    dtype=np.uint8,
)


def _corrected() -> np.ndarray:
    g = SYMMETRIC3_GAMMA_AS_PUBLISHED.copy()
    g[9, 22] = 0
    g[9, 21] = 1
    return g


#: Published matrix with the single misplaced entry moved so that every column
#: has one 1 per budget block. Permutation-equivalent to the enumerated WARP
#: matrix of the symmetric three-budget configuration.
SYMMETRIC3_GAMMA = _corrected()

#: Stochastic choice vector with all pairwise systems feasible but no joint
#: solution (published row order).
COUNTEREXAMPLE_RHO = np.array([0, 0.5, 0.5, 0, 0.5, 0, 0, 0.5, 0, 0.5, 0.5, 0])

_OUTSIDE_BLOCK = np.array([0.3, 0.2, 0.2, 0.3])
_INSIDE_BLOCK_AS_PRINTED = np.array([0.181, 0.2262, 0.2262, 0.3667])
_TRUE_BLOCK = np.array([0.1869, 0.2249, 0.2249, 0.3633])

RHO_OUTSIDE = np.tile(_OUTSIDE_BLOCK, 3)
#: Published values; each block sums to 1.0001.
RHO_INSIDE_AS_PRINTED = np.tile(_INSIDE_BLOCK_AS_PRINTED, 3)
#: Per-block renormalization of the published values.
RHO_INSIDE = np.tile(_INSIDE_BLOCK_AS_PRINTED / _INSIDE_BLOCK_AS_PRINTED.sum(), 3)
RHO_TRUE = np.tile(_TRUE_BLOCK, 3)

#: 12x3 design matrix listed alongside the Monte Carlo set-up. Not used.
MC_DESIGN_X = np.array(
    [
        [0, -1, -1],
        [0, 1, -1],
        [0, -1, 1],
        [0, 1, 1],
        [-1, 0, -1],
        [1, 0, -1],
        [-1, 0, 1],
        [1, 0, 1],
        [-1, -1, 0],
        [1, -1, 0],
        [-1, 1, 0],
        [1, 1, 0],
    ],
    dtype=float,
)

#: Two crossing budgets in two goods: intercepts (5, 2.5) and (2.5, 5).
CROSSING2_BUDGETS = (
    Budget(prices=np.array([1.0, 2.0]), expenditure=5.0),
    Budget(prices=np.array([2.0, 1.0]), expenditure=5.0),
)
#: Canonical row order: budget 0 (below 1, above 1), budget 1 (below 0, above 0).
CROSSING2_RHO = np.array([1 / 4, 3 / 4, 1 / 3, 2 / 3])
CROSSING2_NU = np.array([1 / 4, 1 / 3, 5 / 12])

SYMMETRIC3_BUDGETS = (
    Budget(prices=np.array([0.5, 0.25, 0.25]), expenditure=1.0),
    Budget(prices=np.array([0.25, 0.5, 0.25]), expenditure=1.0),
    Budget(prices=np.array([0.25, 0.25, 0.5]), expenditure=1.0),
)

CYCLE3_PRICES = np.array([[2.0, 3.0, 3.0], [3.0, 2.0, 3.0], [3.0, 3.0, 2.0]])
CYCLE3_BUNDLES = np.array([[3.0, 1.0, 7.0], [7.0, 3.0, 1.0], [1.0, 7.0, 3.0]])

#: Three crossing budgets in three goods without a common point, used for
#: simulated Shafer populations.
SHAFER_BUDGETS = (
    Budget(prices=np.array([1.0, 1.0, 1.0]), expenditure=4.0),
    Budget(prices=np.array([2.0, 1.0, 1.0]), expenditure=5.0),
    Budget(prices=np.array([1.0, 2.0, 1.5]), expenditure=6.0),
)
