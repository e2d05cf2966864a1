"""Tridiagonal solves for the implicit diffusion steps.

``lower[k]`` multiplies ``u[k-1]`` and ``upper[k]`` multiplies ``u[k+1]`` in
row ``k``; ``lower[0]`` and ``upper[-1]`` are ignored.
"""

import numpy as np
from scipy.linalg import solve_banded


def thomas(lower, diag, upper, rhs):
    """Forward elimination / back substitution without pivoting."""
    n = len(diag)
    c = np.empty(n)
    d = np.empty(n)
    c[0] = upper[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for k in range(1, n):
        m = diag[k] - lower[k] * c[k - 1]
        c[k] = upper[k] / m if k < n - 1 else 0.0
        d[k] = (rhs[k] - lower[k] * d[k - 1]) / m
    u = np.empty(n)
    u[-1] = d[-1]
    for k in range(n - 2, -1, -1):
        u[k] = d[k] - c[k] * u[k + 1]
    return u


def is_diagonally_dominant(lower, diag, upper):
    off = np.zeros_like(diag)
    off[1:] += np.abs(lower[1:])
    off[:-1] += np.abs(upper[:-1])
    return bool(np.all(diag > off))


def solve(lower, diag, upper, rhs):
    """Banded LAPACK solve. For the strictly diagonally dominant systems used
    here partial pivoting never swaps rows, so this is the same elimination
    as :func:`thomas`."""
    ab = np.empty((3, len(diag)))
    ab[0, 0] = 0.0
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    ab[2, -1] = 0.0
    return solve_banded((1, 1), ab, rhs, check_finite=False)
