"""Thomas elimination for the complex tridiagonal systems of the
Crank-Nicolson steps.

The matrices handled here are ``I + i*s*H`` with ``H`` real symmetric and
``s`` real, so they are never singular; elimination is done without
pivoting and every solve is certified by a residual check.
"""

import numpy as np

from .errors import NumericalError

#: relative residual accepted by :func:`solve_checked`
RESIDUAL_TOL = 1e-12


def thomas_solve(lower, diag, upper, rhs):
    """Solve ``A x = rhs`` for a tridiagonal ``A`` by Thomas elimination.

    Storage follows the usual convention::

        diag  = [a0, a1, ..., a_{n-1}]
        lower = [b1, b2, ..., b_{n-1}]   (sub-diagonal, length n - 1)
        upper = [c0, c1, ..., c_{n-2}]   (super-diagonal, length n - 1)

    :param lower: sub-diagonal
    :type lower: array of complex
    :param diag: main diagonal
    :type diag: array of complex
    :param upper: super-diagonal
    :type upper: array of complex
    :param rhs: right hand side
    :type rhs: array of complex
    :raises NumericalError: on a zero pivot
    :return: solution vector
    :rtype: array of complex
    """
    n = len(diag)
    c = np.empty(n - 1, dtype=complex)
    y = np.empty(n, dtype=complex)

    # forward elimination
    d = diag[0]
    if d == 0:
        raise NumericalError('zero pivot in tridiagonal elimination')
    if n > 1:
        c[0] = upper[0] / d
    y[0] = rhs[0] / d
    for i in range(1, n):
        d = diag[i] - lower[i - 1] * c[i - 1]
        if d == 0:
            raise NumericalError('zero pivot in tridiagonal elimination')
        if i < n - 1:
            c[i] = upper[i] / d
        y[i] = (rhs[i] - lower[i - 1] * y[i - 1]) / d

    # back substitution
    for i in range(n - 2, -1, -1):
        y[i] -= c[i] * y[i + 1]
    return y


def tridiag_matvec(lower, diag, upper, x):
    """Product of a tridiagonal matrix (same storage as
    :func:`thomas_solve`) with a vector."""
    out = diag * x
    out[1:] += lower * x[:-1]
    out[:-1] += upper * x[1:]
    return out


def solve_checked(lower, diag, upper, rhs, tol=RESIDUAL_TOL):
    """Thomas solve followed by a relative residual check.

    :param tol: accepted ``|A x - rhs| / (|A||x| + |rhs|)`` in max norm
    :type tol: float
    :raises NumericalError: if the residual exceeds ``tol``
    :return: solution vector
    :rtype: array of complex
    """
    x = thomas_solve(lower, diag, upper, rhs)
    residual = np.max(np.abs(tridiag_matvec(lower, diag, upper, x) - rhs))
    scale = (np.max(np.abs(diag)) + 2 * max(np.max(np.abs(lower), initial=0),
                                             np.max(np.abs(upper), initial=0)))
    scale = scale * np.max(np.abs(x)) + np.max(np.abs(rhs))
    if not np.isfinite(residual) or residual > tol * max(scale, 1e-300):
        raise NumericalError(
            f'tridiagonal residual {residual:.3e} above '
            f'{tol:.1e} x {scale:.3e}')
    return x
