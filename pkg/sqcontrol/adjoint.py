"""adjoint.py: backward costate propagation and the discrete integration by
parts identity pairing it with the forward equations.

The default scheme is the algebraic transpose of the Crank-Nicolson map of
:mod:`sqcontrol.dynamics`. For a node source ``g`` and terminal value
``p^N`` it reads, for k = n_t-1, ..., 0::

    lambda_k = C_k^{-1} (p^{k+1} + dt/2 g_{k+1})      (interval value)
    p^k      = A_k lambda_k + dt/2 g_k                 (node value)

With it the identity

    <p^N, z^N> + sum_j w_j <g_j, z^j> = <p^0, z^0> + sum_k dt <lambda_k, b_k>

(trapezoid weights ``w_j``) holds to round-off for every forward solution
``z`` with interval source ``b``. The ``'crank_nicolson'`` scheme
discretizes the costate PDE directly and satisfies it only up to O(dt^2).
"""

import logging

import numpy as np

from .dynamics import CrankNicolsonPropagator, Trajectory, check_compatible
from .errors import DimensionError, DivergenceError
from .field import check_same_grid, _inner

logger = logging.getLogger(__name__)

SCHEMES = ('discrete', 'crank_nicolson')


class CostateTrajectory(Trajectory):
    """Costate on the time nodes together with its interval values.

    :meth:`midpoints` returns the interval values of the scheme, which for
    the discrete adjoint differ from the node averages by
    ``dt/4 (g_k - g_{k+1})``.

    :param values: node values, shape ``(n_t + 1, n_interior)``
    :type values: array of complex
    :param interval_values: interval values, shape ``(n_t, n_interior)``
    :type interval_values: array of complex
    :param scheme: scheme that produced the costate
    :type scheme: str
    """
    def __init__(self, values, interval_values, grid, tgrid,
                 scheme='discrete'):
        super().__init__(values, grid, tgrid)
        interval_values = np.asarray(interval_values, dtype=complex)
        if interval_values.shape != (tgrid.n_t, grid.n_interior):
            raise DimensionError('costate interval values have the wrong '
                                 'shape')
        self.interval_values = interval_values
        self.scheme = scheme

    def midpoints(self):
        return self.interval_values


class CostatePropagator(CrankNicolsonPropagator):
    """Backward propagator for ``-p' + A^* p = g + u B2^* p``.

    :param terminal: terminal value p(T)
    :type terminal: ComplexField
    :param node_sources: node values of g, shape ``(n_t + 1, n_interior)``
    :type node_sources: array of complex, optional
    :param scheme: ``'discrete'`` or ``'crank_nicolson'``
    :type scheme: str
    """
    def __init__(self, spec, u, terminal, node_sources=None,
                 scheme='discrete'):
        super().__init__(spec, u)
        if scheme not in SCHEMES:
            raise ValueError(f'scheme should be one of {SCHEMES}')
        check_same_grid(terminal.grid, self.grid)
        if node_sources is not None:
            node_sources = np.asarray(node_sources, dtype=complex)
            if node_sources.shape != (self.tgrid.n_t + 1,
                                      self.grid.n_interior):
                raise DimensionError('costate sources have the wrong shape')
        self.terminal = terminal
        self.node_sources = node_sources
        self.scheme = scheme

    def solve(self):
        """Computes the costate backwards from T.

        :rtype: CostateTrajectory
        """
        n_t, dt = self.tgrid.n_t, self.tgrid.dt
        g = self.node_sources
        if g is None:
            g = np.zeros((n_t + 1, self.grid.n_interior), dtype=complex)
        p = np.empty((n_t + 1, self.grid.n_interior), dtype=complex)
        lam = np.empty((n_t, self.grid.n_interior), dtype=complex)
        p[n_t] = self.terminal.values
        for k in range(n_t - 1, -1, -1):
            if self.scheme == 'discrete':
                lam[k] = self.solve_C(k, p[k + 1] + 0.5 * dt * g[k + 1])
                p[k] = self.apply_A(k, lam[k]) + 0.5 * dt * g[k]
            else:
                rhs = self.apply_A(k, p[k + 1]) + 0.5 * dt * (g[k] + g[k + 1])
                p[k] = self.solve_C(k, rhs)
                lam[k] = 0.5 * (p[k] + p[k + 1])
            if not np.all(np.isfinite(p[k])):
                raise DivergenceError(f'costate diverged at step {k}')
        return CostateTrajectory(p, lam, self.grid, self.tgrid, self.scheme)


def propagate_dual(spec, u, terminal, source=None, scheme='discrete'):
    """Backward solve with an arbitrary terminal value and node source.

    :param terminal: p(T)
    :type terminal: ComplexField
    :param source: source g
    :type source: SourceTerm, optional
    :rtype: CostateTrajectory
    """
    node_sources = None
    if source is not None and not source.is_zero:
        node_sources = source.node_values(spec.tgrid, spec.grid)
    return CostatePropagator(spec, u, terminal, node_sources, scheme).solve()


def propagate_costate(spec, u, psi, scheme='discrete'):
    """Costate of the tracking problem: terminal ``psi(T) - psi_dT`` and
    source ``psi - psi_d``.

    :param psi: state for ``(spec, u)``
    :type psi: Trajectory
    :rtype: CostateTrajectory
    """
    check_same_grid(spec.grid, psi.grid)
    if psi.tgrid != spec.tgrid:
        raise DimensionError('state is on another time grid')
    residual = psi.values - spec.psi_d.node_values(spec.tgrid, spec.grid)
    terminal = psi.final - spec.psi_dT
    return CostatePropagator(spec, u, terminal, residual, scheme).solve()


def ibp_terms(p, z, source_b=None, source_g=None):
    """Both sides of the discrete integration by parts identity.

    :param p: backward solution with source ``source_g``
    :type p: CostateTrajectory
    :param z: forward solution with source ``source_b``
    :type z: Trajectory
    :return: (lhs, rhs)
    :rtype: tuple of complex
    """
    check_compatible(p, z)
    grid, tgrid = z.grid, z.tgrid
    h, dt = grid.h, tgrid.dt
    lhs = _inner(p.values[-1], z.values[-1], h)
    rhs = _inner(p.values[0], z.values[0], h)
    if source_g is not None and not source_g.is_zero:
        g = source_g.node_values(tgrid, grid)
        lhs += np.sum(tgrid.trapezoid_weights * _inner(g, z.values, h))
    if source_b is not None and not source_b.is_zero:
        b = source_b.interval_values(tgrid, grid)
        rhs += dt * np.sum(_inner(p.midpoints(), b, h))
    return complex(lhs), complex(rhs)


def ibp_residual(p, z, source_b=None, source_g=None):
    """``|lhs - rhs|`` of :func:`ibp_terms`."""
    lhs, rhs = ibp_terms(p, z, source_b, source_g)
    return abs(lhs - rhs)
