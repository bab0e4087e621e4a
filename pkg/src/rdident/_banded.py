"""Block-tridiagonal solver for two species sharing one spatial grid.

Unknowns at node j are (u_j, v_j).  The coupling between species is local
(a full 2x2 block per node) while the spatial coupling is species-diagonal,
so the off-diagonal blocks are stored as 2-vectors.  Every formula below is
written so that relabelling the species produces bit-identical results.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def solve_block_tridiagonal(lower, diag, upper, rhs):
    """Solve the block system; ``lower[0]`` and ``upper[-1]`` are ignored.

    lower, upper : (n, 2)   diag : (n, 2, 2)   rhs : (n, 2)
    """
    n = rhs.shape[0]
    cp = np.empty((n, 2, 2))
    dp = np.empty((n, 2))
    out = np.empty((n, 2))
    for j in range(n):
        a = diag[j, 0, 0]
        b = diag[j, 0, 1]
        c = diag[j, 1, 0]
        d = diag[j, 1, 1]
        r0 = rhs[j, 0]
        r1 = rhs[j, 1]
        if j > 0:
            l0 = lower[j, 0]
            l1 = lower[j, 1]
            a = a - l0 * cp[j - 1, 0, 0]
            b = b - l0 * cp[j - 1, 0, 1]
            c = c - l1 * cp[j - 1, 1, 0]
            d = d - l1 * cp[j - 1, 1, 1]
            r0 = r0 - l0 * dp[j - 1, 0]
            r1 = r1 - l1 * dp[j - 1, 1]
        det = a * d - b * c
        i00 = d / det
        i01 = -b / det
        i10 = -c / det
        i11 = a / det
        u0 = upper[j, 0]
        u1 = upper[j, 1]
        cp[j, 0, 0] = i00 * u0
        cp[j, 0, 1] = i01 * u1
        cp[j, 1, 0] = i10 * u0
        cp[j, 1, 1] = i11 * u1
        dp[j, 0] = i00 * r0 + i01 * r1
        dp[j, 1] = i10 * r0 + i11 * r1
    out[n - 1, 0] = dp[n - 1, 0]
    out[n - 1, 1] = dp[n - 1, 1]
    for j in range(n - 2, -1, -1):
        x0 = out[j + 1, 0]
        x1 = out[j + 1, 1]
        out[j, 0] = dp[j, 0] - (cp[j, 0, 0] * x0 + cp[j, 0, 1] * x1)
        out[j, 1] = dp[j, 1] - (cp[j, 1, 0] * x0 + cp[j, 1, 1] * x1)
    return out
