"""objective.py contains the problem instance, the tracking cost

    J(u) = int_0^T (alpha1 u + alpha2/2 u^2) dt
           + 1/2 int_0^T |psi - psi_d|^2 dt
           + 1/2 |psi(T) - psi_dT|^2,

the switching function Lambda and the reduced gradient of F(u) = J(u, psi[u]).
"""

import logging
from dataclasses import dataclass, field as dc_field, replace as dc_replace

import numpy as np
import pandas as pd

from .adjoint import propagate_costate
from .dynamics import Control, SourceTerm, TimeGrid, check_compatible, \
    propagate_forward
from .errors import DimensionError, DivergenceError
from .field import ComplexField, Potential, SpatialGrid, check_same_grid, \
    _inner

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Complete instance of the tracking problem.

    :param grid: spatial grid
    :type grid: SpatialGrid
    :param tgrid: time grid
    :type tgrid: TimeGrid
    :param alpha1: weight of the linear control cost
    :type alpha1: float
    :param alpha2: weight of the quadratic control cost, at least 0
    :type alpha2: float
    :param bounds: box bounds (u_m, u_M)
    :type bounds: tuple of float
    :param pot: control coefficient b2
    :type pot: Potential
    :param f: source of the state equation
    :type f: SourceTerm
    :param psi0: initial state, nonzero
    :type psi0: ComplexField
    :param psi_d: desired running state
    :type psi_d: SourceTerm
    :param psi_dT: desired final state
    :type psi_dT: ComplexField
    """
    grid: SpatialGrid
    tgrid: TimeGrid
    alpha1: float
    alpha2: float
    bounds: tuple
    pot: Potential
    f: SourceTerm
    psi0: ComplexField
    psi_d: SourceTerm
    psi_dT: ComplexField
    name: str = dc_field(default='problem')

    def __post_init__(self):
        if self.alpha2 < 0:
            raise ValueError('alpha2 should be at least 0')
        u_m, u_M = (float(b) for b in self.bounds)
        if not u_m < u_M:
            raise ValueError('bounds should satisfy u_m < u_M')
        object.__setattr__(self, 'bounds', (u_m, u_M))
        object.__setattr__(self, 'alpha1', float(self.alpha1))
        object.__setattr__(self, 'alpha2', float(self.alpha2))
        for item in self.pot, self.psi0, self.psi_dT:
            check_same_grid(item.grid, self.grid)
        if self.psi0.norm() == 0:
            raise ValueError('psi0 should be nonzero')
        # shapes of the space-time data are checked once here
        self.f.interval_values(self.tgrid, self.grid)
        self.psi_d.node_values(self.tgrid, self.grid)

    def control(self, values):
        """Admissible control on this problem's box."""
        return Control(values, self.bounds)

    def constant_control(self, value):
        return self.control(np.full(self.tgrid.n_t, float(value)))

    def replace(self, **changes):
        return dc_replace(self, **changes)


@dataclass(frozen=True)
class CostBreakdown:
    """The four summands of the cost and their sum."""
    total: float
    tracking_running: float
    tracking_final: float
    control_linear: float
    control_quadratic: float

    def as_dict(self):
        return {'total': self.total,
                'tracking_running': self.tracking_running,
                'tracking_final': self.tracking_final,
                'control_linear': self.control_linear,
                'control_quadratic': self.control_quadratic}


def tracking_residual(spec, psi):
    """Node values of ``psi - psi_d``, shape ``(n_t + 1, n_interior)``."""
    return psi.values - spec.psi_d.node_values(spec.tgrid, spec.grid)


def evaluate_cost(spec, u, psi):
    """Cost of ``u`` with state ``psi``.

    Tracking uses the trapezoid rule on the nodes; the control terms are
    integrated exactly since u is piecewise constant.

    :param spec: problem instance
    :type spec: ProblemSpec
    :param u: control
    :type u: Control
    :param psi: state of ``(spec, u)``
    :type psi: Trajectory
    :raises DivergenceError: if the cost is not finite
    :rtype: CostBreakdown
    """
    check_same_grid(spec.grid, psi.grid)
    if psi.tgrid != spec.tgrid or len(u) != spec.tgrid.n_t:
        raise DimensionError('control or state does not match the time grid')
    h, dt = spec.grid.h, spec.tgrid.dt
    r = tracking_residual(spec, psi)
    running = 0.5 * np.sum(spec.tgrid.trapezoid_weights
                           * _inner(r, r, h).real)
    rT = psi.values[-1] - spec.psi_dT.values
    final = 0.5 * _inner(rT, rT, h).real
    values = np.asarray(u.values)
    linear = spec.alpha1 * dt * np.sum(values)
    quadratic = 0.5 * spec.alpha2 * dt * np.sum(values**2)
    total = running + final + linear + quadratic
    if not np.isfinite(total):
        raise DivergenceError('cost is not finite')
    return CostBreakdown(float(total), float(running), float(final),
                         float(linear), float(quadratic))


def cost(spec, u):
    """Reduced cost F(u); one forward solve."""
    return evaluate_cost(spec, u, propagate_forward(spec, u)).total


def switching_function(spec, u, psi, p):
    """Switching function on the time intervals,

        Lambda_k = alpha1 + alpha2 u_k + Re<lambda_k, -i b2 psibar_k>,

    with ``psibar_k`` the interval average of psi and ``lambda_k`` the
    interval value of the costate.

    :param p: costate of ``(spec, u, psi)``
    :type p: CostateTrajectory
    :return: one value per interval
    :rtype: array of float
    """
    check_compatible(psi, p)
    check_same_grid(spec.grid, psi.grid)
    b2_psi = -1j * spec.pot.b2 * psi.midpoints()
    coupling = _inner(p.midpoints(), b2_psi, spec.grid.h).real
    return spec.alpha1 + spec.alpha2 * np.asarray(u.values) + coupling


def switching_scale(spec, u, psi, p):
    """Size of the terms that make up Lambda, per interval maximum."""
    h = spec.grid.h
    b2_psi = spec.pot.b2 * psi.midpoints()
    lam = p.midpoints()
    coupling = (np.sqrt(_inner(b2_psi, b2_psi, h).real)
                * np.sqrt(_inner(lam, lam, h).real))
    terms = (abs(spec.alpha1) + spec.alpha2 * np.abs(np.asarray(u.values))
             + coupling)
    return float(np.max(terms))


def first_order_data(spec, u, scheme='discrete'):
    """Forward solve, costate and switching function at ``u``.

    :return: (psi, p, Lambda)
    :rtype: tuple
    """
    psi = propagate_forward(spec, u)
    p = propagate_costate(spec, u, psi, scheme)
    return psi, p, switching_function(spec, u, psi, p)


def cost_and_gradient(spec, u):
    """Reduced cost and gradient from one forward and one costate solve.

    :return: (CostBreakdown, gradient, switching function)
    :rtype: tuple
    """
    psi, p, lam = first_order_data(spec, u)
    return evaluate_cost(spec, u, psi), spec.tgrid.dt * lam, lam


def reduced_gradient(spec, u):
    """Exact gradient of the discrete reduced cost, ``g_k = dF/du_k``.

    The costate is the transpose of the discrete forward map, so
    ``g_k = dt * Lambda_k`` up to round-off.

    :rtype: array of float
    """
    return cost_and_gradient(spec, u)[1]


def finite_difference_gradient(spec, u, step=1e-5, indices=None):
    """Central difference quotients of :func:`cost`.

    :param indices: components to difference, all by default
    :type indices: sequence of int, optional
    :return: one quotient per index
    :rtype: array of float
    """
    base = np.asarray(u.values)
    if indices is None:
        indices = range(len(base))
    grad = np.empty(len(indices))
    for i, k in enumerate(indices):
        e = np.zeros(len(base))
        e[k] = step
        grad[i] = (cost(spec, Control(base + e))
                   - cost(spec, Control(base - e))) / (2 * step)
    return grad


def directional_derivative_table(spec, u, v, steps=(1e-1, 5e-2, 2.5e-2,
                                                    1.25e-2)):
    """Central differences of F along ``v`` against ``sum_k g_k v_k``.

    :param v: direction
    :type v: Control
    :param steps: decreasing step sizes
    :type steps: sequence of float
    :return: one row per step with the difference quotient, its error and
        the observed order between consecutive rows
    :rtype: pandas.DataFrame
    """
    if len(v) != spec.tgrid.n_t:
        raise DimensionError('direction length does not match n_t')
    exact = float(np.dot(reduced_gradient(spec, u), v.values))
    base, direction = np.asarray(u.values), np.asarray(v.values)
    rows = []
    for s in steps:
        plus = cost(spec, Control(base + s * direction))
        minus = cost(spec, Control(base - s * direction))
        quotient = (plus - minus) / (2 * s)
        rows.append({'step': s, 'central_difference': quotient,
                     'exact': exact, 'error': abs(quotient - exact)})
    table = pd.DataFrame(rows, columns=['step', 'central_difference',
                                        'exact', 'error'])
    ratio = table['error'].shift(1) / table['error']
    table['order'] = np.log(ratio) / np.log(table['step'].shift(1)
                                            / table['step'])
    return table
