"""dynamics.py contains the time grid, controls, sources and trajectories,
and the Crank-Nicolson propagators of the state equation

    psi' = i Lap psi - i u b2 psi + f,      psi(0) = psi0,

of its linearization z[v] and of the Goh state xi[w].

All three equations share the generator, so they share one propagator base
class; the subclasses only differ in initial value and source.

:return: trajectories on the time nodes
:rtype: Trajectory object
"""

import logging
from dataclasses import dataclass

import numpy as np

from .AbstractPropagator import AbstractPropagator
from .errors import DimensionError, DivergenceError
from .field import (ComplexField, check_same_grid, commutator_kernels,
                    _inner, _laplacian)
from .tridiag import solve_checked

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, T] with ``n_t`` steps.

    Controls are constant on the intervals (t_k, t_k+1), states live on the
    nodes t_k.
    """
    T: float = 10.0
    n_t: int = 200

    def __post_init__(self):
        if not isinstance(self.n_t, (int, np.integer)) or self.n_t < 1:
            raise ValueError('n_t should be a positive integer')
        if not self.T > 0:
            raise ValueError('T should be positive')

    @property
    def dt(self):
        return self.T / self.n_t

    @property
    def nodes(self):
        return self.dt * np.arange(self.n_t + 1)

    @property
    def midpoints(self):
        return self.dt * (np.arange(self.n_t) + 0.5)

    @property
    def trapezoid_weights(self):
        weights = np.full(self.n_t + 1, self.dt)
        weights[0] = weights[-1] = 0.5 * self.dt
        return weights

    def refined(self, factor=2):
        return TimeGrid(self.T, self.n_t * factor)


class Control:
    """Piecewise constant control, one value per time interval.

    :param values: control values
    :type values: array of float
    :param bounds: (u_m, u_M) box bounds, defaults to None (unbounded)
    :type bounds: tuple of float, optional
    """
    def __init__(self, values, bounds=None):
        values = np.array(values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(values)):
            raise DivergenceError('control contains non-finite values')
        if bounds is not None:
            u_m, u_M = (float(b) for b in bounds)
            if not u_m < u_M:
                raise ValueError('bounds should satisfy u_m < u_M')
            if np.any(values < u_m) or np.any(values > u_M):
                raise ValueError('control values should lie within '
                                 f'[{u_m}, {u_M}]')
            bounds = (u_m, u_M)
        self.values = values
        self.bounds = bounds
        self.values.setflags(write=False)

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f'Control(n={len(self)}, bounds={self.bounds})'

    def with_values(self, values):
        """Same bounds, new values."""
        return Control(values, self.bounds)

    def unbounded(self):
        return Control(self.values)

    def l1_norm(self, dt):
        return dt * np.sum(np.abs(self.values))

    def l2_norm(self, dt):
        return np.sqrt(dt * np.sum(self.values**2))


class SourceTerm:
    """Space-time field entering as a source (f) or as a target (Psi_d).

    Use the constructors :meth:`zero`, :meth:`static` and :meth:`sampled`.
    Sampled data either has one row per interval (``'midpoints'``) or one
    row per node (``'nodes'``); the other sampling is obtained by averaging
    neighbours.
    """
    def __init__(self, data=None, sampling='zero'):
        if sampling not in ('zero', 'static', 'midpoints', 'nodes'):
            raise ValueError(f'unknown sampling {sampling!r}')
        self.data = None if data is None else np.asarray(data, dtype=complex)
        self.sampling = sampling

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def static(cls, field):
        return cls(field.values, 'static')

    @classmethod
    def sampled(cls, values, sampling='midpoints'):
        return cls(values, sampling)

    @property
    def is_zero(self):
        return self.sampling == 'zero' or not np.any(self.data)

    def _check(self, tgrid, grid, rows):
        n = grid.n_interior
        if self.sampling == 'static':
            if self.data.shape != (n,):
                raise DimensionError('static source does not match the grid')
        elif self.data is not None and self.data.shape != (rows, n):
            raise DimensionError(
                f'{self.sampling} source has shape {self.data.shape}, '
                f'expected ({rows}, {n})')

    def interval_values(self, tgrid, grid):
        """Values on the ``n_t`` intervals, shape ``(n_t, n_interior)``."""
        shape = (tgrid.n_t, grid.n_interior)
        if self.sampling == 'zero':
            return np.zeros(shape, dtype=complex)
        if self.sampling == 'static':
            self._check(tgrid, grid, None)
            return np.broadcast_to(self.data, shape).copy()
        if self.sampling == 'midpoints':
            self._check(tgrid, grid, tgrid.n_t)
            return self.data.copy()
        self._check(tgrid, grid, tgrid.n_t + 1)
        return 0.5 * (self.data[:-1] + self.data[1:])

    def node_values(self, tgrid, grid):
        """Values on the ``n_t + 1`` nodes."""
        shape = (tgrid.n_t + 1, grid.n_interior)
        if self.sampling == 'zero':
            return np.zeros(shape, dtype=complex)
        if self.sampling == 'static':
            self._check(tgrid, grid, None)
            return np.broadcast_to(self.data, shape).copy()
        if self.sampling == 'nodes':
            self._check(tgrid, grid, tgrid.n_t + 1)
            return self.data.copy()
        self._check(tgrid, grid, tgrid.n_t)
        out = np.empty(shape, dtype=complex)
        out[1:-1] = 0.5 * (self.data[:-1] + self.data[1:])
        out[0] = self.data[0]
        out[-1] = self.data[-1]
        return out

    def scaled(self, factor):
        """Source multiplied by a complex constant."""
        if self.sampling == 'zero':
            return SourceTerm.zero()
        return SourceTerm(factor * self.data, self.sampling)

    def l1_norm(self, tgrid, grid):
        """Midpoint approximation of the L1(0,T; L2) norm."""
        values = self.interval_values(tgrid, grid)
        return tgrid.dt * np.sum(np.sqrt(_inner(values, values, grid.h).real))


class Trajectory:
    """Sequence of ``n_t + 1`` fields on the nodes of a time grid.

    :param values: array of shape ``(n_t + 1, n_interior)``
    :type values: array of complex
    :param grid: spatial grid
    :type grid: SpatialGrid
    :param tgrid: time grid
    :type tgrid: TimeGrid
    """
    def __init__(self, values, grid, tgrid):
        values = np.asarray(values, dtype=complex)
        if values.shape != (tgrid.n_t + 1, grid.n_interior):
            raise DimensionError(
                f'trajectory has shape {values.shape}, expected '
                f'({tgrid.n_t + 1}, {grid.n_interior})')
        self.values = values
        self.grid = grid
        self.tgrid = tgrid

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return ComplexField(self.values[k], self.grid)

    @property
    def states(self):
        return [self[k] for k in range(len(self))]

    @property
    def final(self):
        return self[-1]

    def midpoints(self):
        """Interval averages, shape ``(n_t, n_interior)``."""
        return 0.5 * (self.values[:-1] + self.values[1:])

    def norms(self):
        return np.sqrt(_inner(self.values, self.values, self.grid.h).real)

    def sup_norm(self):
        return float(np.max(self.norms()))

    def __sub__(self, other):
        check_compatible(self, other)
        return Trajectory(self.values - other.values, self.grid, self.tgrid)


def check_compatible(a, b):
    """Raise :class:`DimensionError` unless the two objects share their
    spatial and time grids."""
    check_same_grid(a.grid, b.grid)
    if a.tgrid != b.tgrid:
        raise DimensionError(f'time grid mismatch: {a.tgrid} vs {b.tgrid}')


class CrankNicolsonPropagator(AbstractPropagator):
    """Base propagator for ``y' = -i H_k y + s_k`` on each interval, with
    ``H_k = -Lap_h + u_k diag(b2)``.

    One step reads ``A_k y^{k+1} = C_k y^k + dt s_k`` with
    ``A_k = I + i dt/2 H_k`` and ``C_k = I - i dt/2 H_k = A_k^H``.

    :param spec: problem instance
    :type spec: ProblemSpec
    :param u: control, one value per interval
    :type u: Control
    """
    def __init__(self, spec, u):
        if len(u) != spec.tgrid.n_t:
            raise DimensionError(
                f'control has {len(u)} values, time grid has '
                f'{spec.tgrid.n_t} intervals')
        self.spec = spec
        self.u = np.asarray(u.values)
        self.grid = spec.grid
        self.tgrid = spec.tgrid
        self.b2 = spec.pot.b2
        h, dt = self.grid.h, self.tgrid.dt
        self._half = 0.5j * dt
        n = self.grid.n_interior
        # A_k off-diagonals: i dt/2 * (-1/h^2)
        self._off = np.full(n - 1, -self._half / h**2)
        self._diag0 = 1.0 + self._half * 2.0 / h**2

    def apply_H(self, k, y):
        return -_laplacian(y, self.grid.h) + self.u[k] * self.b2 * y

    def apply_A(self, k, y):
        return y + self._half * self.apply_H(k, y)

    def apply_C(self, k, y):
        return y - self._half * self.apply_H(k, y)

    def solve_A(self, k, rhs):
        diag = self._diag0 + self._half * self.u[k] * self.b2
        return solve_checked(self._off, diag, self._off, rhs)

    def solve_C(self, k, rhs):
        # C_k is the entrywise conjugate of A_k (H_k is real)
        diag = np.conj(self._diag0 + self._half * self.u[k] * self.b2)
        off = np.conj(self._off)
        return solve_checked(off, diag, off, rhs)

    def initial_state(self):
        return np.zeros(self.grid.n_interior, dtype=complex)

    def source(self, k):
        """Interval source ``s_k`` or None."""
        return None

    def solve(self):
        """Computes the Crank-Nicolson solution on every node.

        :raises DivergenceError: if a state stops being finite
        :return: node values
        :rtype: Trajectory
        """
        dt = self.tgrid.dt
        values = np.empty((self.tgrid.n_t + 1, self.grid.n_interior),
                          dtype=complex)
        values[0] = self.initial_state()
        for k in range(self.tgrid.n_t):
            rhs = self.apply_C(k, values[k])
            s = self.source(k)
            if s is not None:
                rhs = rhs + dt * s
            values[k + 1] = self.solve_A(k, rhs)
            if not np.all(np.isfinite(values[k + 1])):
                raise DivergenceError(
                    f'{type(self).__name__} diverged at step {k}')
        return Trajectory(values, self.grid, self.tgrid)


class AffinePropagator(CrankNicolsonPropagator):
    """Propagator for ``y' + A y = u B2 y + b`` with given initial value and
    interval sources.

    :param initial: initial value, defaults to zero
    :type initial: ComplexField, optional
    :param sources: interval values of ``b``, shape ``(n_t, n_interior)``
    :type sources: array of complex, optional
    """
    def __init__(self, spec, u, initial=None, sources=None):
        super().__init__(spec, u)
        if initial is not None:
            check_same_grid(initial.grid, self.grid)
        self.initial = initial
        if sources is not None:
            sources = np.asarray(sources, dtype=complex)
            if sources.shape != (self.tgrid.n_t, self.grid.n_interior):
                raise DimensionError(
                    f'sources have shape {sources.shape}, expected '
                    f'({self.tgrid.n_t}, {self.grid.n_interior})')
        self.sources = sources

    def initial_state(self):
        if self.initial is None:
            return super().initial_state()
        return self.initial.values.copy()

    def source(self, k):
        if self.sources is None:
            return None
        return self.sources[k]


class StatePropagator(AffinePropagator):
    """Controlled Schroedinger equation with source f and initial psi0."""
    def __init__(self, spec, u):
        sources = None
        if not spec.f.is_zero:
            sources = spec.f.interval_values(spec.tgrid, spec.grid)
        super().__init__(spec, u, spec.psi0, sources)


class LinearizedPropagator(AffinePropagator):
    """Linearized state ``z' + A z = u B2 z + v B2 psi``, ``z(0) = 0``."""
    def __init__(self, spec, u, psi_ref, v):
        _check_reference(spec, psi_ref)
        if len(v) != spec.tgrid.n_t:
            raise DimensionError('direction length does not match n_t')
        sources = (-1j * np.asarray(v.values)[:, None] * spec.pot.b2
                   * psi_ref.midpoints())
        super().__init__(spec, u, None, sources)


class GohPropagator(AffinePropagator):
    """Goh state ``xi' + A xi = u B2 xi + w b1``, ``xi(0) = 0``, with
    ``b1 = i b2 f - M psi``.

    :param commutator: ``'discrete'`` or ``'stencil'`` form of M
    :type commutator: str
    """
    def __init__(self, spec, u, psi_ref, w, commutator='discrete'):
        _check_reference(spec, psi_ref)
        if len(w) != spec.tgrid.n_t:
            raise DimensionError('w length does not match n_t')
        m1, _, _ = commutator_kernels(spec.pot, commutator)
        b1 = -m1(psi_ref.midpoints())
        if not spec.f.is_zero:
            b1 = b1 + 1j * spec.pot.b2 * spec.f.interval_values(spec.tgrid,
                                                                spec.grid)
        sources = np.asarray(w.values)[:, None] * b1
        super().__init__(spec, u, None, sources)


def _check_reference(spec, psi_ref):
    check_same_grid(spec.grid, psi_ref.grid)
    if spec.tgrid != psi_ref.tgrid:
        raise DimensionError('reference trajectory is on another time grid')


def propagate_forward(spec, u):
    """Solve the state equation for control ``u``.

    :param spec: problem instance
    :type spec: ProblemSpec
    :param u: control
    :type u: Control
    :rtype: Trajectory
    """
    return StatePropagator(spec, u).solve()


def propagate_affine(spec, u, initial=None, source=None):
    """Solve ``y' + A y = u B2 y + b`` for an arbitrary initial value and
    source; used by the duality checks.

    :param source: source b
    :type source: SourceTerm, optional
    """
    sources = None
    if source is not None and not source.is_zero:
        sources = source.interval_values(spec.tgrid, spec.grid)
    return AffinePropagator(spec, u, initial, sources).solve()


def propagate_linearized(spec, u_ref, psi_ref, v):
    """Linearized state z[v] around ``(u_ref, psi_ref)``."""
    return LinearizedPropagator(spec, u_ref, psi_ref, v).solve()


def propagate_goh_xi(spec, u_ref, psi_ref, w, commutator='discrete'):
    """Goh state xi[w] around ``(u_ref, psi_ref)``; ``w`` holds interval
    values."""
    return GohPropagator(spec, u_ref, psi_ref, w, commutator).solve()


def linearization_defects(spec, u, v):
    """Sup-norms of z[v], of dpsi = psi[u+v] - psi[u] and of
    eta = dpsi - z[v].

    :return: dict with keys ``'z'``, ``'dpsi'``, ``'eta'`` and ``'v_l1'``
    :rtype: dict
    """
    psi = propagate_forward(spec, u)
    z = propagate_linearized(spec, u, psi, v)
    perturbed = Control(np.asarray(u.values) + np.asarray(v.values))
    dpsi = propagate_forward(spec, perturbed) - psi
    eta = dpsi - z
    return {'z': z.sup_norm(), 'dpsi': dpsi.sup_norm(),
            'eta': eta.sup_norm(), 'v_l1': v.l1_norm(spec.tgrid.dt)}


def a_priori_constant(spec, u):
    """Measured constant of the a priori bound
    ``sup_t |psi(t)| <= c0 (|f|_L1 + |psi0|)``."""
    psi = propagate_forward(spec, u)
    denominator = (spec.f.l1_norm(spec.tgrid, spec.grid)
                   + spec.psi0.norm())
    return psi.sup_norm() / denominator
