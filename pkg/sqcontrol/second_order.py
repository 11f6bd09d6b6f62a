"""second_order.py: the quadratic form Q(z, v) of the second variation, its
Goh transform Qhat(xi, w, h) = Qhat_T + Qhat_a + Qhat_b, the coefficient
R(t) of w^2 and the probes built on them.

With ``w(t) = int_0^t v`` and ``xi = z - w B2 psi`` the cross term
``2 v Re<p, B2 z>`` of Q is integrated by parts; this removes v from the
form and leaves

    Qhat_T = |xi(T) - i h b2 psi(T)|^2 - h^2 Re<p(T), b2^2 psi(T)>
             + 2 h Re<p(T), B2 xi(T)>,
    Qhat_a = int |xi|^2 + 2 w Re(<xi, B2 psi> + <psi - psi_d, B2 xi>
             - <M^* p, xi>) dt,
    Qhat_b = int w^2 R dt,

with ``M = [A, B2]`` and

    R = |b2 psi|^2 - Re<psi - psi_d, b2^2 psi> + Re<p, -b2^2 f - [M, B2] psi>.

A nonzero ``alpha2`` adds ``alpha2 int v^2``, reported as ``Qhat_c``.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .adjoint import propagate_costate
from .dynamics import Control, propagate_forward, propagate_goh_xi, \
    propagate_linearized
from .errors import DimensionError
from .field import commutator_kernels, _inner
from .objective import evaluate_cost, switching_function, tracking_residual

logger = logging.getLogger(__name__)

#: number of Fourier modes of the random smooth profiles
N_MODES = 4


@dataclass(frozen=True, eq=False)
class QuadFormReport:
    """Components of the Goh-transformed form and, when the direction
    came from a v, the untransformed Q and the relative gap between them.

    ``Qhat_value`` is ``Qhat_T + Qhat_a + Qhat_b``; :attr:`total` adds
    ``Qhat_c``.
    """
    Q_value: float
    Qhat_value: float
    Qhat_T: float
    Qhat_a: float
    Qhat_b: float
    Qhat_c: float
    goh_identity_gap: float
    R_samples: np.ndarray

    @property
    def total(self):
        return self.Qhat_value + self.Qhat_c


class GohDirection:
    """Goh variables ``(w, h)``.

    ``w`` is stored on the time nodes with ``w(0) = 0``; the equations use
    its interval averages. ``h`` is free; it equals ``w(T)`` for the
    primitive of a direction ``v``.

    :param w_nodes: node values of w, length ``n_t + 1``
    :type w_nodes: array of float
    :param h: terminal variable
    :type h: float
    :param v: direction the primitive was taken of, if any
    :type v: Control, optional
    """
    def __init__(self, w_nodes, h, v=None):
        w_nodes = np.asarray(w_nodes, dtype=float)
        if w_nodes.ndim != 1 or len(w_nodes) < 2:
            raise DimensionError('w needs at least two node values')
        if w_nodes[0] != 0:
            raise ValueError('w should vanish at t = 0')
        if v is not None and len(v) != len(w_nodes) - 1:
            raise DimensionError('v and w have different lengths')
        self.w_nodes = w_nodes
        self.h = float(h)
        self.v = v

    @property
    def w(self):
        """Interval averages of w as a :class:`Control`."""
        return Control(0.5 * (self.w_nodes[:-1] + self.w_nodes[1:]))

    @property
    def w_final(self):
        return float(self.w_nodes[-1])

    def derivative(self, dt):
        """Forward differences of w; recovers v for a primitive."""
        return np.diff(self.w_nodes) / dt

    def norm_sq(self, dt):
        """``|w|_2^2 + h^2`` with the midpoint rule."""
        return float(dt * np.sum(self.w.values**2) + self.h**2)


def goh_primitive(v, tgrid):
    """Discrete primitive ``w^k = dt * sum_{j<k} v_j`` with ``h = w(T)``.

    :param v: direction
    :type v: Control
    :type tgrid: TimeGrid
    :rtype: GohDirection
    """
    if len(v) != tgrid.n_t:
        raise DimensionError('direction length does not match n_t')
    w_nodes = np.concatenate(([0.0], tgrid.dt * np.cumsum(v.values)))
    return GohDirection(w_nodes, w_nodes[-1], v)


def quad_form_Q(spec, u, psi, p, v, z):
    """Second variation

        Q = sum_j w_j |z_j|^2 + dt sum_k (alpha2 v_k^2
            + 2 v_k Re<lambda_k, B2 zbar_k>) + |z(T)|^2

    with trapezoid weights ``w_j`` and the costate interval values
    ``lambda_k``.

    :param z: linearized state for ``v``, or any trajectory in its place
        (``psi[u + v] - psi[u]`` gives the exact expansion)
    :type z: Trajectory
    :rtype: float
    """
    if len(v) != spec.tgrid.n_t:
        raise DimensionError('direction length does not match n_t')
    dx, dt = spec.grid.h, spec.tgrid.dt
    vals = np.asarray(v.values)
    running = np.sum(spec.tgrid.trapezoid_weights
                     * _inner(z.values, z.values, dx).real)
    b2_z = -1j * spec.pot.b2 * z.midpoints()
    cross = 2.0 * dt * np.sum(vals * _inner(p.midpoints(), b2_z, dx).real)
    final = _inner(z.values[-1], z.values[-1], dx).real
    return float(running + spec.alpha2 * dt * np.sum(vals**2) + cross
                 + final)


def singular_residual_R(spec, u, psi, p, at='nodes', commutator='discrete'):
    """Coefficient R of w^2 in Qhat.

    :param at: ``'nodes'`` (node values of psi, p and f) or
        ``'midpoints'`` (interval averages and costate interval values,
        the samples Qhat_b is built from)
    :type at: str
    :param commutator: form of M, see
        :func:`sqcontrol.field.commutator_kernels`
    :type commutator: str
    :rtype: array of float
    """
    _, _, m_b2 = commutator_kernels(spec.pot, commutator)
    dx = spec.grid.h
    b2 = spec.pot.b2
    r = tracking_residual(spec, psi)
    if at == 'nodes':
        psi_s, r_s, p_s = psi.values, r, p.values
        f_s = spec.f.node_values(spec.tgrid, spec.grid)
    elif at == 'midpoints':
        psi_s, p_s = psi.midpoints(), p.midpoints()
        r_s = 0.5 * (r[:-1] + r[1:])
        f_s = spec.f.interval_values(spec.tgrid, spec.grid)
    else:
        raise ValueError("at should be 'nodes' or 'midpoints'")
    b2_psi = b2 * psi_s
    value = (_inner(b2_psi, b2_psi, dx).real
             - _inner(r_s, b2**2 * psi_s, dx).real
             + _inner(p_s, -b2**2 * f_s - m_b2(psi_s), dx).real)
    return value


def quad_form_Qhat(spec, u, psi, p, direction, xi=None,
                   commutator='discrete'):
    """Goh-transformed form for ``direction``.

    When ``direction.v`` is set, Q(z[v], v) is computed through the
    linearized state as well and the report carries the relative gap
    ``|Q - Qhat| / (1 + |Q|)``.

    :param direction: Goh variables
    :type direction: GohDirection
    :param xi: Goh state for ``direction.w``; computed when omitted
    :type xi: Trajectory, optional
    :rtype: QuadFormReport
    """
    tgrid = spec.tgrid
    if len(direction.w_nodes) != tgrid.n_t + 1:
        raise DimensionError('direction does not match the time grid')
    if xi is None:
        xi = propagate_goh_xi(spec, u, psi, direction.w, commutator)
    _, m_adj, _ = commutator_kernels(spec.pot, commutator)
    dx, dt, hh = spec.grid.h, tgrid.dt, direction.h
    b2 = spec.pot.b2
    w_bar = direction.w.values

    psi_T, xi_T, p_T = psi.values[-1], xi.values[-1], p.values[-1]
    jump = xi_T - 1j * hh * b2 * psi_T
    q_T = (_inner(jump, jump, dx).real
           - hh**2 * _inner(p_T, b2**2 * psi_T, dx).real
           + 2.0 * hh * _inner(p_T, -1j * b2 * xi_T, dx).real)

    r = tracking_residual(spec, psi)
    r_bar = 0.5 * (r[:-1] + r[1:])
    psi_bar, xi_bar, lam = psi.midpoints(), xi.midpoints(), p.midpoints()
    mixed = (_inner(xi_bar, -1j * b2 * psi_bar, dx)
             + _inner(r_bar, -1j * b2 * xi_bar, dx)
             - _inner(m_adj(lam), xi_bar, dx)).real
    q_a = (np.sum(tgrid.trapezoid_weights * _inner(xi.values, xi.values,
                                                   dx).real)
           + 2.0 * dt * np.sum(w_bar * mixed))

    R_bar = singular_residual_R(spec, u, psi, p, 'midpoints', commutator)
    q_b = dt * np.sum(w_bar**2 * R_bar)

    if direction.v is not None:
        v_vals = np.asarray(direction.v.values)
    else:
        v_vals = direction.derivative(dt)
    q_c = spec.alpha2 * dt * np.sum(v_vals**2)

    q_value, gap = float('nan'), float('nan')
    qhat = float(q_T + q_a + q_b)
    if direction.v is not None:
        z = propagate_linearized(spec, u, psi, direction.v)
        q_value = quad_form_Q(spec, u, psi, p, direction.v, z)
        gap = abs(q_value - (qhat + q_c)) / (1.0 + abs(q_value))
    R_nodes = singular_residual_R(spec, u, psi, p, 'nodes', commutator)
    return QuadFormReport(q_value, qhat, float(q_T), float(q_a), float(q_b),
                          float(q_c), gap, R_nodes)


def goh_report(spec, u, v, commutator='discrete'):
    """Both sides of the Goh identity for the direction ``v`` at ``u``.

    :rtype: QuadFormReport
    """
    psi = propagate_forward(spec, u)
    p = propagate_costate(spec, u, psi)
    direction = goh_primitive(v, spec.tgrid)
    return quad_form_Qhat(spec, u, psi, p, direction, commutator=commutator)


def goh_identity_check(spec, u, v, commutator='discrete'):
    """Relative gap ``|Q(z[v], v) - Qhat(xi[w], w, w(T))| / (1 + |Q|)``
    computed through the independent z and xi pipelines.

    :rtype: float
    """
    if not np.any(v.values):
        return 0.0
    return goh_report(spec, u, v, commutator).goh_identity_gap


def expansion_residuals(spec, u, v):
    """Residuals of the second order expansion of F at ``u`` along ``v``.

    ``exact`` uses ``dpsi = psi[u + v] - psi[u]`` in Q and vanishes up to
    round-off; ``linearized`` uses z[v] and is of third order in v.

    :return: dict with keys ``'exact'``, ``'linearized'``, ``'v_l1'``
    :rtype: dict
    """
    psi = propagate_forward(spec, u)
    p = propagate_costate(spec, u, psi)
    lam = switching_function(spec, u, psi, p)
    dt = spec.tgrid.dt
    base = evaluate_cost(spec, u, psi).total
    moved = Control(np.asarray(u.values) + np.asarray(v.values))
    psi_moved = propagate_forward(spec, moved)
    change = evaluate_cost(spec, moved, psi_moved).total - base
    first = dt * np.dot(lam, v.values)
    z = propagate_linearized(spec, u, psi, v)
    q_exact = quad_form_Q(spec, u, psi, p, v, psi_moved - psi)
    q_lin = quad_form_Q(spec, u, psi, p, v, z)
    return {'exact': abs(change - first - 0.5 * q_exact),
            'linearized': abs(change - first - 0.5 * q_lin),
            'v_l1': v.l1_norm(dt)}


def smooth_profile(tgrid, rng, n_modes=N_MODES):
    """Random Fourier sum on the time nodes with decaying coefficients."""
    t = tgrid.nodes / tgrid.T
    profile = np.zeros_like(t)
    for m in range(1, n_modes + 1):
        a, b = rng.standard_normal(2)
        profile += (a * np.sin(m * np.pi * t) + b * np.cos(m * np.pi * t)) / m
    return profile


def sample_PC2_direction(arcs, seed):
    """Random ``(w, h)`` in PC2 for the arc structure ``arcs``.

    w is a smooth random profile that is replaced by a random constant on
    each boundary arc, by 0 on an initial boundary arc and by h on a
    terminal one. Without boundary arcs w and h are unconstrained.

    :param arcs: structure of the reference control
    :type arcs: ArcStructure
    :param seed: seed of the PCG64 stream
    :type seed: int
    :rtype: GohDirection
    """
    rng = np.random.default_rng(seed)
    tgrid = arcs.tgrid
    w = smooth_profile(tgrid, rng)
    w -= w[0]
    h = float(rng.standard_normal())
    nodes = tgrid.nodes
    tol = 0.5 * tgrid.dt
    for arc in arcs.boundary_arcs():
        level = float(rng.standard_normal())
        if arc.t_start <= tol and arc.t_end >= tgrid.T - tol:
            level = h = 0.0
        elif arc.t_start <= tol:
            level = 0.0
        elif arc.t_end >= tgrid.T - tol:
            level = h
        inside = (nodes >= arc.t_start - tol) & (nodes <= arc.t_end + tol)
        w[inside] = level
    w[0] = 0.0
    return GohDirection(w, h)


def _map(function, items, max_workers):
    if max_workers is None or max_workers == 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(function, items))


def probe_pc2(spec, u, arcs, n_probes=100, seed=0, max_workers=None,
              commutator='discrete', psi=None, p=None):
    """Qhat over ``n_probes`` seeded PC2 directions.

    :return: one row per probe with the seed, Qhat, ``|w|_2^2 + h^2`` and
        their ratio (NaN for a zero direction)
    :rtype: pandas.DataFrame
    """
    if psi is None:
        psi = propagate_forward(spec, u)
    if p is None:
        p = propagate_costate(spec, u, psi)

    def probe(probe_seed):
        direction = sample_PC2_direction(arcs, probe_seed)
        report = quad_form_Qhat(spec, u, psi, p, direction,
                                commutator=commutator)
        norm_sq = direction.norm_sq(spec.tgrid.dt)
        # PC2 is {0} when a boundary arc covers [0, T]
        ratio = report.total / norm_sq if norm_sq > 0 else np.nan
        return {'seed': probe_seed, 'Qhat': report.total,
                'norm_sq': norm_sq, 'ratio': ratio}

    rows = _map(probe, [seed + i for i in range(n_probes)], max_workers)
    logger.debug('PC2 probe: %d directions', n_probes)
    return pd.DataFrame(rows, columns=['seed', 'Qhat', 'norm_sq', 'ratio'])


def project_critical_cone(v, u, lam, bounds, tol, eps_u=None):
    """Projection of ``v`` onto the critical cone at ``u``: v = 0 where
    ``|Lambda| > tol``, ``v >= 0`` on the lower contact set and ``v <= 0``
    on the upper one.

    :rtype: array of float
    """
    u_m, u_M = bounds
    if eps_u is None:
        eps_u = 1e-6 * (u_M - u_m)
    v = np.array(v, dtype=float)
    values = np.asarray(u.values)
    v[np.abs(lam) > tol] = 0.0
    lower = values <= u_m + eps_u
    upper = values >= u_M - eps_u
    v[lower] = np.maximum(v[lower], 0.0)
    v[upper] = np.minimum(v[upper], 0.0)
    return v


def probe_critical_cone(spec, u, n_probes=20, seed=0, tol=None,
                        max_workers=None):
    """Q(z[v], v) over seeded smooth directions projected onto the
    critical cone.

    :return: one row per probe with the seed, Q and ``|v|_2^2``
    :rtype: pandas.DataFrame
    """
    psi = propagate_forward(spec, u)
    p = propagate_costate(spec, u, psi)
    lam = switching_function(spec, u, psi, p)
    if tol is None:
        tol = 1e-4 * max(1.0, float(np.max(np.abs(lam))))
    dt = spec.tgrid.dt

    def probe(probe_seed):
        rng = np.random.default_rng(probe_seed)
        raw = smooth_profile(spec.tgrid, rng)
        raw = 0.5 * (raw[:-1] + raw[1:])
        v = Control(project_critical_cone(raw, u, lam, spec.bounds, tol))
        z = propagate_linearized(spec, u, psi, v)
        return {'seed': probe_seed,
                'Q': quad_form_Q(spec, u, psi, p, v, z),
                'norm_sq': float(dt * np.sum(v.values**2))}

    rows = _map(probe, [seed + i for i in range(n_probes)], max_workers)
    return pd.DataFrame(rows, columns=['seed', 'Q', 'norm_sq'])
