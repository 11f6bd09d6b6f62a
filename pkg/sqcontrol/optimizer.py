"""optimizer.py: projected gradient with Armijo backtracking for

    min F(u)   subject to   u_m <= u_k <= u_M,

plus a seeded multistart wrapper.

Steps are taken along the switching function Lambda = g / dt (the L2(0,T)
gradient) so that one ``initial_step`` suits every time grid; the
stationarity measure ``|u - P(u - g)|_2`` uses the gradient vector g.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .adjoint import propagate_costate
from .analysis import check_first_order
from .dynamics import Control, propagate_forward
from .errors import DimensionError, LineSearchError, SQControlError
from .objective import evaluate_cost, switching_function

logger = logging.getLogger(__name__)

STATUS_CONVERGED = 'converged'
STATUS_MAX_ITERS = 'max_iters'
STATUS_LINE_SEARCH = 'line_search_failed'

STEP_RULES = ('bb', 'warm')

#: range of Barzilai-Borwein steps relative to ``initial_step``
MIN_STEP = 1e-10
MAX_STEP = 1e10


@dataclass(frozen=True)
class SolverOptions:
    """Settings of :func:`solve`.

    :param max_iters: iteration limit
    :type max_iters: int
    :param grad_tol: tolerance on ``|u - P(u - g)|_2``; None selects
        ``1e-8 * sqrt(n_t) * dt``
    :type grad_tol: float, optional
    :param armijo_c: sufficient decrease constant in (0, 1)
    :type armijo_c: float
    :param backtrack_factor: step reduction in (0, 1)
    :type backtrack_factor: float
    :param initial_step: first trial step
    :type initial_step: float
    :param max_backtracks: reductions tried before giving up
    :type max_backtracks: int
    :param u_init: initial control values or a constant; None starts in
        the middle of the box
    :type u_init: float or array of float, optional
    :param seed: base seed of the multistart stream
    :type seed: int
    :param max_workers: threads for multistart, None runs sequentially
    :type max_workers: int, optional
    :param step_rule: first trial step of an iteration, ``'bb'``
        (Barzilai-Borwein) or ``'warm'`` (last step doubled)
    :type step_rule: str
    """
    max_iters: int = 500
    grad_tol: float = None
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 40
    u_init: object = None
    seed: int = 0
    max_workers: int = None
    step_rule: str = 'bb'

    def __post_init__(self):
        if not isinstance(self.max_iters, int) or self.max_iters < 1:
            raise ValueError('max_iters should be a positive integer')
        if self.grad_tol is not None and not self.grad_tol > 0:
            raise ValueError('grad_tol should be positive')
        if not 0 < self.armijo_c < 1:
            raise ValueError('armijo_c should lie in (0, 1)')
        if not 0 < self.backtrack_factor < 1:
            raise ValueError('backtrack_factor should lie in (0, 1)')
        if not self.initial_step > 0:
            raise ValueError('initial_step should be positive')
        if not isinstance(self.max_backtracks, int) or self.max_backtracks < 1:
            raise ValueError('max_backtracks should be a positive integer')
        if self.max_workers is not None and self.max_workers < 1:
            raise ValueError('max_workers should be at least 1')
        if self.step_rule not in STEP_RULES:
            raise ValueError(f'step_rule should be one of {STEP_RULES}')

    def tolerance(self, tgrid):
        if self.grad_tol is not None:
            return self.grad_tol
        return 1e-8 * np.sqrt(tgrid.n_t) * tgrid.dt

    def initial_control(self, spec):
        u_m, u_M = spec.bounds
        if self.u_init is None:
            values = np.full(spec.tgrid.n_t, 0.5 * (u_m + u_M))
        elif np.isscalar(self.u_init):
            values = np.full(spec.tgrid.n_t, float(self.u_init))
        else:
            values = np.asarray(self.u_init, dtype=float)
            if values.shape != (spec.tgrid.n_t,):
                raise DimensionError(
                    f'u_init has {values.size} values, time grid has '
                    f'{spec.tgrid.n_t} intervals')
        return spec.control(project_box(values, spec.bounds))


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Outcome of :func:`solve` or :func:`multistart`.

    ``all_costs`` holds the final cost of every start of a multistart run
    (NaN for a start that raised) and is empty for a single solve.
    """
    u_opt: Control
    cost_history: np.ndarray
    projected_grad_norms: np.ndarray
    step_sizes: np.ndarray
    iterations: int
    converged: bool
    status: str
    cost: object
    switching: np.ndarray
    first_order_violation: float
    all_costs: tuple = dc_field(default=())

    @property
    def final_cost(self):
        return self.cost.total


def project_box(u, bounds):
    """Componentwise clamp onto ``[u_m, u_M]``.

    :param u: control values
    :type u: array of float
    :param bounds: (u_m, u_M)
    :type bounds: tuple of float
    :rtype: array of float
    """
    u_m, u_M = bounds
    if not u_m < u_M:
        raise ValueError('bounds should satisfy u_m < u_M')
    return np.clip(np.asarray(u, dtype=float), u_m, u_M)


def _first_order_violation(spec, u, lam, tol):
    return check_first_order(u, lam, spec.bounds, spec.tgrid, tol=tol)


def _next_step(opts, s, du, dlam):
    """First trial step of the next iteration.

    ``'bb'`` takes the Barzilai-Borwein step ``du.du / du.dlam`` of the
    last accepted move; ``'warm'`` (and bb without positive curvature)
    retries the last accepted step enlarged once.
    """
    warm = s / opts.backtrack_factor
    if opts.step_rule == 'warm':
        return warm
    curvature = float(np.dot(du, dlam))
    if not curvature > 0:
        return warm
    step = float(np.dot(du, du)) / curvature
    return min(max(step, MIN_STEP * opts.initial_step),
               MAX_STEP * opts.initial_step)


def solve(spec, opts=None):
    """Projected gradient descent on the reduced cost.

    Every accepted iterate satisfies the box constraints and the Armijo
    condition ``F(u+) <= F(u) + c g.(u+ - u)``, so the recorded costs are
    nonincreasing. A failed line search ends the run with status
    ``'line_search_failed'``; it is logged, not raised.

    :param spec: problem instance
    :type spec: ProblemSpec
    :param opts: solver settings
    :type opts: SolverOptions, optional
    :rtype: SolveResult
    """
    opts = opts or SolverOptions()
    tol = opts.tolerance(spec.tgrid)
    dt = spec.tgrid.dt
    u = opts.initial_control(spec)
    psi = propagate_forward(spec, u)
    breakdown = evaluate_cost(spec, u, psi)
    lam = switching_function(spec, u, psi, propagate_costate(spec, u, psi))
    logger.info('solve %s: n_t=%d, start cost %.6e, tolerance %.3e, '
                '%s steps', spec.name, spec.tgrid.n_t, breakdown.total, tol,
                opts.step_rule)

    costs, norms, steps = [breakdown.total], [], []
    step = opts.initial_step
    status = STATUS_MAX_ITERS
    iteration = 0
    while True:
        values = np.asarray(u.values)
        grad = dt * lam
        pg_norm = float(np.linalg.norm(values - project_box(values - grad,
                                                            spec.bounds)))
        norms.append(pg_norm)
        if pg_norm <= tol:
            status = STATUS_CONVERGED
            break
        if iteration == opts.max_iters:
            break

        accepted = False
        s = step
        for _ in range(opts.max_backtracks):
            trial_values = project_box(values - s * lam, spec.bounds)
            if np.array_equal(trial_values, values):
                # the step no longer moves u
                break
            trial = spec.control(trial_values)
            trial_psi = propagate_forward(spec, trial)
            trial_cost = evaluate_cost(spec, trial, trial_psi)
            decrease = opts.armijo_c * np.dot(grad, trial_values - values)
            if trial_cost.total <= breakdown.total + decrease:
                accepted = True
                break
            s *= opts.backtrack_factor
        if not accepted:
            status = STATUS_LINE_SEARCH
            logger.warning('line search failed at iteration %d (cost %.6e, '
                           'projected gradient %.3e, last step %.3e)',
                           iteration, breakdown.total, pg_norm, s)
            break

        iteration += 1
        trial_lam = switching_function(spec, trial, trial_psi,
                                       propagate_costate(spec, trial,
                                                         trial_psi))
        step = _next_step(opts, s, trial_values - values, trial_lam - lam)
        u, psi, breakdown, lam = trial, trial_psi, trial_cost, trial_lam
        costs.append(breakdown.total)
        steps.append(s)
        logger.debug('iteration %d: cost %.10e, projected gradient %.3e, '
                     'step %.3e', iteration, breakdown.total, pg_norm, s)

    converged = status == STATUS_CONVERGED
    logger.info('solve %s: %s after %d iterations, cost %.10e, projected '
                'gradient %.3e', spec.name, status, iteration,
                breakdown.total, norms[-1])
    # a converged run has |Lambda| <= tol / dt where u is free
    violation = _first_order_violation(spec, u, lam, max(
        1e-6 * max(1.0, float(np.max(np.abs(lam)))), tol / dt))
    return SolveResult(u, np.array(costs), np.array(norms), np.array(steps),
                       iteration, converged, status, breakdown, lam,
                       violation)


def starting_controls(spec, opts, n_starts):
    """Initial controls of a multistart run.

    Start 0 is the initial control of ``opts``; start i >= 1 draws
    uniform values in the box from a PCG64 stream seeded with
    ``opts.seed + i``.
    """
    if n_starts < 1:
        raise ValueError('n_starts should be at least 1')
    u_m, u_M = spec.bounds
    starts = [opts.initial_control(spec)]
    for i in range(1, n_starts):
        rng = np.random.default_rng(opts.seed + i)
        starts.append(spec.control(rng.uniform(u_m, u_M, spec.tgrid.n_t)))
    return starts


def multistart(spec, opts=None, n_starts=5):
    """Best of ``n_starts`` seeded solves.

    :raises LineSearchError: if every start raised
    :rtype: SolveResult
    """
    opts = opts or SolverOptions()
    start_opts = [replace(opts, u_init=u.values)
                  for u in starting_controls(spec, opts, n_starts)]

    def run(o):
        try:
            return solve(spec, o)
        except SQControlError as err:
            logger.warning('multistart: start failed with %s', err)
            return err

    if opts.max_workers is None or opts.max_workers == 1:
        outcomes = [run(o) for o in start_opts]
    else:
        with ThreadPoolExecutor(max_workers=opts.max_workers) as pool:
            outcomes = list(pool.map(run, start_opts))

    results = [r for r in outcomes if isinstance(r, SolveResult)]
    if not results:
        raise LineSearchError('every start failed: '
                              + '; '.join(str(e) for e in outcomes))
    all_costs = tuple(r.final_cost if isinstance(r, SolveResult)
                      else float('nan') for r in outcomes)
    best = min(results, key=lambda r: r.final_cost)
    logger.info('multistart %s: %d of %d starts finished, best cost %.10e',
                spec.name, len(results), n_starts, best.final_cost)
    return replace(best, all_costs=all_costs)
