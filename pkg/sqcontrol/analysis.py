"""analysis.py: arc structure of a control and the report on first and
second order optimality conditions.
"""

import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np

from .adjoint import propagate_costate
from .dynamics import Control, TimeGrid, propagate_forward
from .errors import DimensionError, StructureError
from .objective import cost, evaluate_cost, switching_function, \
    switching_scale
from .second_order import goh_primitive, probe_pc2, singular_residual_R

logger = logging.getLogger(__name__)

LOWER = 'lower_boundary'
UPPER = 'upper_boundary'
SINGULAR = 'singular'
INTERIOR = 'interior'
UNRESOLVED = 'unresolved'
JUNCTION = 'bang_bang_junction_point'

BOUNDARY_KINDS = (LOWER, UPPER)


@dataclass(frozen=True)
class Arc:
    """Maximal run of intervals ``k_start <= k < k_end`` of one kind.

    Bang-bang junctions are stored as arcs of zero length with
    ``k_start == k_end``.
    """
    t_start: float
    t_end: float
    kind: str
    k_start: int
    k_end: int

    @property
    def length(self):
        return self.t_end - self.t_start

    def as_dict(self):
        return {'t_start': self.t_start, 't_end': self.t_end,
                'kind': self.kind}


@dataclass(frozen=True, eq=False)
class ArcStructure:
    """Ordered arcs covering [0, T] together with the per-interval labels.

    :param arcs: arcs in time order, junction points included
    :type arcs: list of Arc
    :param labels: kind of every time interval
    :type labels: tuple of str
    :param tgrid: time grid of the control
    :type tgrid: TimeGrid
    """
    arcs: list
    labels: tuple
    tgrid: TimeGrid

    @property
    def junction_times(self):
        """Times where the kind changes."""
        proper = self._proper
        return np.array([a.t_end for a, b in zip(proper, proper[1:])
                         if a.kind != b.kind])

    @property
    def bang_bang_junctions(self):
        return np.array([a.t_start for a in self.arcs if a.kind == JUNCTION])

    @property
    def _proper(self):
        return [a for a in self.arcs if a.kind != JUNCTION]

    def of_kind(self, *kinds):
        return [a for a in self.arcs if a.kind in kinds]

    def boundary_arcs(self):
        return self.of_kind(*BOUNDARY_KINDS)

    def singular_arcs(self):
        return self.of_kind(SINGULAR)

    def mask(self, *kinds):
        """Boolean mask of the intervals with one of ``kinds``."""
        return np.isin(np.array(self.labels), kinds)

    def unresolved_fraction(self):
        return float(np.mean(self.mask(UNRESOLVED)))

    def as_dict(self):
        return {'arcs': [a.as_dict() for a in self.arcs],
                'junction_times': self.junction_times.tolist(),
                'bang_bang_junctions': self.bang_bang_junctions.tolist()}


def _label(u_k, lam_k, u_m, u_M, eps_u, eps_lambda, affine):
    if u_k <= u_m + eps_u:
        return LOWER
    if u_k >= u_M - eps_u:
        return UPPER
    if abs(lam_k) <= eps_lambda:
        return SINGULAR if affine else INTERIOR
    return UNRESOLVED


def detect_arcs(u, bounds, lam, eps_u=None, eps_lambda=None, tgrid=None,
                affine=True, strict=True):
    """Classifies every time interval and merges runs into maximal arcs.

    An interval is a lower (upper) boundary interval if u lies within
    ``eps_u`` of u_m (u_M), singular if u is interior and
    ``|Lambda| <= eps_lambda``, and unresolved otherwise. For problems
    with ``alpha2 > 0`` (``affine=False``) interior stationary intervals
    are labelled ``'interior'`` since Lambda vanishing there carries no
    singular information. A direct switch between the two bounds adds a
    zero-length ``'bang_bang_junction_point'`` entry.

    :param u: control
    :type u: Control
    :param bounds: (u_m, u_M)
    :type bounds: tuple of float
    :param lam: switching function, one value per interval
    :type lam: array of float
    :param eps_u: defaults to ``1e-6 * (u_M - u_m)``
    :type eps_u: float, optional
    :param eps_lambda: defaults to ``1e-4 * max|Lambda|``
    :type eps_lambda: float, optional
    :param tgrid: time grid; defaults to unit steps
    :type tgrid: TimeGrid, optional
    :param strict: raise if no interval could be classified
    :type strict: bool
    :raises StructureError: if every interval is unresolved and ``strict``
    :rtype: ArcStructure
    """
    values = np.asarray(u.values)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != values.shape:
        raise DimensionError('switching function and control differ in '
                             'length')
    n = len(values)
    if tgrid is None:
        tgrid = TimeGrid(float(n), n)
    elif tgrid.n_t != n:
        raise DimensionError('control does not match the time grid')
    u_m, u_M = bounds
    if eps_u is None:
        eps_u = 1e-6 * (u_M - u_m)
    if eps_lambda is None:
        eps_lambda = 1e-4 * float(np.max(np.abs(lam)))

    labels = tuple(_label(values[k], lam[k], u_m, u_M, eps_u, eps_lambda,
                          affine) for k in range(n))
    if strict and all(label == UNRESOLVED for label in labels):
        raise StructureError('no interval of the control could be '
                             'classified')

    dt = tgrid.dt
    arcs = []
    start = 0
    for k in range(1, n + 1):
        if k < n and labels[k] == labels[start]:
            continue
        if (arcs and labels[start] in BOUNDARY_KINDS
                and arcs[-1].kind in BOUNDARY_KINDS
                and arcs[-1].kind != labels[start]):
            arcs.append(Arc(start * dt, start * dt, JUNCTION, start, start))
        arcs.append(Arc(start * dt, k * dt, labels[start], start, k))
        start = k

    structure = ArcStructure(arcs, labels, tgrid)
    fraction = structure.unresolved_fraction()
    if fraction > 0.05:
        logger.warning('%.1f %% of the horizon is unresolved',
                       100 * fraction)
    return structure


def check_first_order(u, lam, bounds, tgrid, tol=None, tol_u=None):
    """Measure of the times violating ``{Lambda > 0} in I_m`` and
    ``{Lambda < 0} in I_M``.

    :param tol: threshold on Lambda, defaults to ``1e-6 * max|Lambda|``
    :type tol: float, optional
    :param tol_u: distance to a bound counted as contact, defaults to
        ``1e-6 * (u_M - u_m)``
    :type tol_u: float, optional
    :return: ``dt * #{violating intervals}``
    :rtype: float
    """
    values = np.asarray(u.values)
    lam = np.asarray(lam, dtype=float)
    u_m, u_M = bounds
    if tol is None:
        tol = 1e-6 * float(np.max(np.abs(lam)))
    if tol_u is None:
        tol_u = 1e-6 * (u_M - u_m)
    bad = (((lam > tol) & (values > u_m + tol_u))
           | ((lam < -tol) & (values < u_M - tol_u)))
    return float(tgrid.dt * np.count_nonzero(bad))


class Complementarity(NamedTuple):
    """Result of :func:`check_strict_complementarity`; ``vacuous`` is set
    when there is no boundary arc and ``margin`` is ``inf``."""
    margin: float
    vacuous: bool


def check_strict_complementarity(arcs, lam):
    """Smallest ``|Lambda|`` over the interiors of the boundary arcs.

    Each arc is shrunk by one interval at either end, except at t = 0 and
    t = T where Lambda is required to be nonzero as well. Arcs too short
    to be shrunk are taken whole.

    :rtype: Complementarity
    """
    lam = np.asarray(lam, dtype=float)
    n_t = arcs.tgrid.n_t
    boundary = arcs.boundary_arcs()
    if not boundary:
        logger.debug('no boundary arc, strict complementarity is vacuous')
        return Complementarity(math.inf, True)
    margin = math.inf
    for arc in boundary:
        lo = arc.k_start if arc.k_start == 0 else arc.k_start + 1
        hi = arc.k_end if arc.k_end == n_t else arc.k_end - 1
        if hi <= lo:
            logger.debug('%s arc on [%g, %g] is taken whole', arc.kind,
                         arc.t_start, arc.t_end)
            lo, hi = arc.k_start, arc.k_end
        margin = min(margin, float(np.min(np.abs(lam[lo:hi]))))
    return Complementarity(margin, False)


def junction_shift(coarse, fine):
    """Largest move of a junction time between two arc structures of the
    same control problem, typically on ``n_t`` and ``2 n_t`` intervals.

    Junctions are paired in time order. A different number of junctions
    means the structure itself changed and gives ``inf``.

    :type coarse: ArcStructure
    :type fine: ArcStructure
    :return: ``max |t_coarse - t_fine|``, 0 without junctions
    :rtype: float
    """
    t_coarse, t_fine = coarse.junction_times, fine.junction_times
    if len(t_coarse) != len(t_fine):
        logger.info('junction count changed from %d to %d', len(t_coarse),
                    len(t_fine))
        return math.inf
    if not len(t_coarse):
        return 0.0
    return float(np.max(np.abs(t_coarse - t_fine)))


def check_bang_bang_junctions(arcs, R_samples, window=2):
    """Smallest node value of R within ``window`` steps of a bang-bang
    junction.

    :param R_samples: R on the time nodes
    :type R_samples: array of float
    :return: minimum, ``inf`` without bang-bang junctions
    :rtype: float
    """
    R_samples = np.asarray(R_samples, dtype=float)
    result = math.inf
    for arc in arcs.of_kind(JUNCTION):
        k = arc.k_start
        lo, hi = max(0, k - window), min(len(R_samples), k + window + 1)
        result = min(result, float(np.min(R_samples[lo:hi])))
    return result


@dataclass(frozen=True)
class AnalysisOptions:
    """Thresholds and probe settings of :func:`full_report`.

    :param eps_u: contact threshold, defaults to ``1e-6 * (u_M - u_m)``
    :param eps_lambda_rel: eps_lambda relative to the switching scale
    :param first_order_rel: accepted violation measure relative to T
    :param R_rel: accepted negative R relative to the switching scale
    :param probe_tol: accepted negative Qhat / (|w|^2 + h^2)
    :param n_probes: number of PC2 directions
    :param seed: seed of the first direction
    :param commutator: form of M used by the Goh quantities
    :param max_workers: threads for the probes
    :param grad_tol: stopping tolerance on ``|u - P(u - g)|_2`` of the
        solve that produced the control; when set, eps_lambda is at least
        ``grad_tol / dt``, the bound on ``|Lambda|`` at a free interval
        that such a solve guarantees
    """
    eps_u: float = None
    eps_lambda_rel: float = 1e-4
    first_order_rel: float = 1e-3
    R_rel: float = 1e-6
    probe_tol: float = 1e-6
    unresolved_max: float = 0.05
    n_probes: int = 100
    seed: int = 0
    commutator: str = 'discrete'
    max_workers: int = None
    grad_tol: float = None


@dataclass(frozen=True, eq=False)
class OptimalityReport:
    """Everything :func:`full_report` measured, with one verdict per
    condition. ``pc2_probe_min_ratio`` is a symptom of coercivity on the
    sampled directions, not a proof of it."""
    cost: float
    lam: np.ndarray
    arc_structure: ArcStructure
    first_order_violation: float
    strict_complementarity_margin: float
    strict_complementarity_vacuous: bool
    R_samples: np.ndarray
    R_on_singular_min: float
    R_at_bb_junctions_min: float
    pc2_probe_min_ratio: float
    scale: float
    tolerances: dict
    verdicts: dict = dc_field(default_factory=dict)

    @property
    def passed(self):
        return all(self.verdicts.values())

    def as_dict(self):
        def number(x):
            return None if not math.isfinite(x) else float(x)
        return {
            'cost': self.cost,
            'first_order_violation': self.first_order_violation,
            'strict_complementarity_margin':
                number(self.strict_complementarity_margin),
            'strict_complementarity_vacuous':
                self.strict_complementarity_vacuous,
            'R_on_singular_min': number(self.R_on_singular_min),
            'R_at_bb_junctions_min': number(self.R_at_bb_junctions_min),
            'pc2_probe_min_ratio': number(self.pc2_probe_min_ratio),
            'scale': self.scale,
            'unresolved_fraction':
                self.arc_structure.unresolved_fraction(),
            'tolerances': dict(self.tolerances),
            'verdicts': dict(self.verdicts),
            'passed': self.passed,
            'arcs': self.arc_structure.as_dict(),
        }


def full_report(spec, u, options=None):
    """Runs the state, costate, switching function, arc detection, R and
    the PC2 probe at ``u`` and collects the verdicts.

    :param spec: problem instance
    :type spec: ProblemSpec
    :param u: candidate control
    :type u: Control
    :type options: AnalysisOptions, optional
    :rtype: OptimalityReport
    """
    options = options or AnalysisOptions()
    tgrid = spec.tgrid
    psi = propagate_forward(spec, u)
    p = propagate_costate(spec, u, psi)
    lam = switching_function(spec, u, psi, p)
    scale = max(switching_scale(spec, u, psi, p), np.finfo(float).tiny)
    eps_lambda = options.eps_lambda_rel * scale
    if options.grad_tol is not None:
        eps_lambda = max(eps_lambda, options.grad_tol / tgrid.dt)
    if options.commutator == 'stencil':
        logger.warning('R and the PC2 probe use the stencil commutator, '
                       'whose O(h^2) error bounds the Goh identity gap '
                       'from below; the discrete commutator is exact')
    arcs = detect_arcs(u, spec.bounds, lam, options.eps_u, eps_lambda, tgrid,
                       affine=spec.alpha2 == 0, strict=False)

    violation = check_first_order(u, lam, spec.bounds, tgrid, tol=eps_lambda,
                                  tol_u=options.eps_u)
    margin, vacuous = check_strict_complementarity(arcs, lam)
    R_nodes = singular_residual_R(spec, u, psi, p, 'nodes',
                                  options.commutator)
    R_mid = singular_residual_R(spec, u, psi, p, 'midpoints',
                                options.commutator)
    singular = arcs.mask(SINGULAR)
    R_singular = float(np.min(R_mid[singular])) if singular.any() \
        else math.inf
    R_junctions = check_bang_bang_junctions(arcs, R_nodes)

    ratio = math.inf
    if options.n_probes > 0:
        table = probe_pc2(spec, u, arcs, options.n_probes, options.seed,
                          options.max_workers, options.commutator, psi, p)
        ratios = table['ratio'].dropna()
        if len(ratios):
            ratio = float(ratios.min())

    R_tol = options.R_rel * scale
    tolerances = {'eps_lambda': eps_lambda,
                  'first_order': options.first_order_rel * tgrid.T,
                  'R': R_tol, 'pc2_probe': options.probe_tol,
                  'unresolved': options.unresolved_max}
    verdicts = {
        'first_order': violation <= tolerances['first_order'],
        'strict_complementarity': margin > eps_lambda,
        'R_on_singular': R_singular >= -R_tol,
        'R_at_bb_junctions': R_junctions >= -R_tol,
        'pc2_probe': ratio >= -options.probe_tol,
        'arc_structure':
            arcs.unresolved_fraction() < options.unresolved_max,
    }
    verdicts = {key: bool(value) for key, value in verdicts.items()}
    report = OptimalityReport(evaluate_cost(spec, u, psi).total, lam, arcs,
                              violation, margin, vacuous, R_nodes, R_singular,
                              R_junctions, ratio, scale, tolerances, verdicts)
    logger.info('optimality report for %s: %s', spec.name,
                ', '.join(f'{k}={"pass" if v else "fail"}'
                          for k, v in verdicts.items()))
    return report


def quadratic_growth_ratio(spec, u, directions, radius=1e-2):
    """Empirical ``(F(u_s) - F(u)) / (|w|_2^2 + w(T)^2)`` for the
    admissible perturbations ``u_s = P(u + radius * v)``, with w the
    primitive of ``u_s - u``. A positive minimum is a symptom of
    quadratic growth, not a proof.

    :param directions: directions v
    :type directions: sequence of Control
    :rtype: array of float
    """
    base = cost(spec, u)
    u_m, u_M = spec.bounds
    values = np.asarray(u.values)
    ratios = []
    for v in directions:
        moved = np.clip(values + radius * np.asarray(v.values), u_m, u_M)
        step = Control(moved - values)
        if not np.any(step.values):
            ratios.append(math.nan)
            continue
        direction = goh_primitive(step, spec.tgrid)
        norm_sq = direction.norm_sq(spec.tgrid.dt)
        ratios.append((cost(spec, spec.control(moved)) - base) / norm_sq)
    return np.array(ratios)
