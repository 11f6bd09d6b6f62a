#
# Protocol class
#

import copy
import inspect
import json
import logging

from .AbstractProtocol import AbstractProtocol
from .analysis import AnalysisOptions
from .dynamics import TimeGrid
from .errors import ConfigError
from .field import ComplexField, SpatialGrid
from .objective import ProblemSpec
from .optimizer import SolverOptions
from .profiles import select_potential, select_source, select_state, \
    select_target

logger = logging.getLogger(__name__)

#: profile entries of the problem group
PROFILE_KEYS = ('b2', 'psi0', 'psi_d', 'psi_dT', 'f')

#: keys at the top level that are accepted and ignored
IGNORED_KEYS = ('_provenance',)


def default_parameters():
    """Defaults of every configuration key.

    The grids and the horizon are those of the reference experiment
    (40 spatial and 200 time steps, T = 10); weights, bounds and profiles
    are repository defaults chosen to produce a singular arc.
    """
    return {
        'name': 'singular_tracking',
        'problem': {
            'x_lo': 0.0,
            'x_hi': 1.0,
            'n_x': 40,
            'T': 10.0,
            'n_t': 200,
            'alpha1': -1e-3,
            'alpha2': 0.0,
            'bounds': [0.0, 1.0],
            'b2': {'kind': 'bump', 'c': 16.0},
            'psi0': {'kind': 'ground_state'},
            'psi_d': {'kind': 'ground_state', 'frequency': 0.4},
            'psi_dT': {'kind': 'terminal_of_running'},
            'f': {'kind': 'zero'},
        },
        'solver': {
            'max_iters': 4000,
            'grad_tol': 2e-5,
            'armijo_c': 1e-4,
            'backtrack_factor': 0.5,
            'initial_step': 1.0,
            'max_backtracks': 40,
            'u_init': None,
            'n_starts': 1,
            'seed': 0,
            'max_workers': None,
            'step_rule': 'bb',
        },
        'analysis': {
            'n_probes': 100,
            'seed': 0,
            'eps_u': None,
            'eps_lambda_rel': 1e-4,
            'first_order_rel': 1e-3,
            'R_rel': 1e-6,
            'probe_tol': 1e-6,
            'unresolved_max': 0.05,
            'commutator': 'discrete',
            'max_workers': None,
        },
        'output': {
            'dir': 'output',
            'plots': True,
        },
    }


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


class Protocol(AbstractProtocol):
    """Protocol object which builds the problem, the solver settings and
    the analysis settings from a JSON config and the default parameters.

    Args:
        AbstractProtocol (Class): AbstractProtocol is super-class of Protocol.
    """
    def __init__(self, file_dir=None):
        """Initialises Protocol object with default parameters

        The groups are:
        name = run name, used in the logs and in result.json
        problem = grids (x_lo, x_hi, n_x, T, n_t), weights alpha1 and
        alpha2, bounds [u_m, u_M] and the profiles b2, psi0, psi_d, psi_dT
        and f, each a dict with a 'kind' and its parameters
        solver = projected gradient settings and the number of starts
        analysis = thresholds and PC2 probe settings of the report
        output = directory of the artifacts and whether to plot

        Args:
            file_dir (string, optional): Path of a JSON config updating the
            defaults. Defaults to None.
        """
        self.params = default_parameters()
        if file_dir:
            self.fill_parameters(file_dir)

    def read_config(self, file_dir):
        """Reads in a JSON config file

        Args:
            file_dir (string): Path of the config file

        Raises:
            ConfigError: If the file is not valid JSON or not an object

        Returns:
            dict: Dictionary of the parameters
        """
        with open(file_dir, 'r', encoding='utf-8') as config_file:
            text = config_file.read()
        try:
            config = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f'invalid JSON: {err.msg}', line=err.lineno,
                              column=err.colno) from None
        if not isinstance(config, dict):
            raise ConfigError('config should be a JSON object')
        return config

    def merge(self, defaults, update, path=''):
        """Merges ``update`` into ``defaults`` recursively.

        Profile dicts that name a 'kind' replace the default profile
        instead of being merged into it.

        Raises:
            ConfigError: On a key that has no default
        """
        merged = copy.deepcopy(defaults)
        for key, value in update.items():
            dotted = f'{path}{key}'
            if path == '' and key in IGNORED_KEYS:
                continue
            if key not in defaults:
                raise ConfigError('unknown key', key=dotted)
            default = defaults[key]
            if isinstance(default, dict) and isinstance(value, dict):
                if key in PROFILE_KEYS and 'kind' in value:
                    merged[key] = copy.deepcopy(value)
                else:
                    merged[key] = self.merge(default, value, dotted + '.')
            elif isinstance(default, dict):
                raise TypeError(f'{dotted} should be an object')
            else:
                merged[key] = value
        return merged

    def check_parameters_dict(self):
        """Checks the parameter groups are dictionaries

        Raises:
            TypeError: If a group is not a dictionary
        """
        if not isinstance(self.params, dict):
            raise TypeError('data input should be a dictionary')
        for group in 'problem', 'solver', 'analysis', 'output':
            if not isinstance(self.params[group], dict):
                raise TypeError(f'{group} should be a dictionary')

    def check_name(self):
        """Checks the name and output directory are strings

        Raises:
            TypeError: If name or output.dir is not a string
        """
        if not isinstance(self.params['name'], str):
            raise TypeError('name should be a string')
        if not isinstance(self.params['output']['dir'], str):
            raise TypeError('output.dir should be a string')
        if not isinstance(self.params['output']['plots'], bool):
            raise TypeError('output.plots should be true or false')

    def check_grids(self):
        """Checks the spatial and time grid parameters

        Raises:
            TypeError: If n_x or n_t is not an integer, or an end point or
            T is not a number
            ValueError: If n_x < 3, n_t < 1, T <= 0 or x_hi <= x_lo
        """
        problem = self.params['problem']
        for i in 'n_x', 'n_t':
            if not _is_int(problem[i]):
                raise TypeError(f'problem.{i} should be an integer')
        for i in 'x_lo', 'x_hi', 'T':
            if not _is_number(problem[i]):
                raise TypeError(f'problem.{i} should be a number')
        if problem['n_x'] < 3:
            raise ConfigError('should be at least 3', key='problem.n_x')
        if problem['n_t'] < 1:
            raise ConfigError('should be at least 1', key='problem.n_t')
        if problem['T'] <= 0:
            raise ConfigError('should be positive', key='problem.T')
        if problem['x_hi'] <= problem['x_lo']:
            raise ConfigError('should be larger than x_lo',
                              key='problem.x_hi')

    def check_weights(self):
        """Checks alpha1, alpha2 and the bounds

        Raises:
            TypeError: If a weight or bound is not a number
            ValueError: If alpha2 < 0 or the bounds are not increasing
        """
        problem = self.params['problem']
        for i in 'alpha1', 'alpha2':
            if not _is_number(problem[i]):
                raise TypeError(f'problem.{i} should be a number')
        if problem['alpha2'] < 0:
            raise ConfigError('should be at least 0', key='problem.alpha2')
        bounds = problem['bounds']
        if (not isinstance(bounds, (list, tuple)) or len(bounds) != 2
                or not all(_is_number(b) for b in bounds)):
            raise TypeError('problem.bounds should be a pair of numbers')
        if not bounds[0] < bounds[1]:
            raise ConfigError('should satisfy u_m < u_M',
                              key='problem.bounds')

    def check_profiles(self):
        """Checks every profile names a known kind and only parameters of
        that kind

        Raises:
            TypeError: If a profile is not a dictionary
            ValueError: If the kind or a parameter is unknown
        """
        problem = self.params['problem']
        selectors = {'b2': select_potential, 'psi0': select_state,
                     'psi_d': select_target, 'psi_dT': select_state,
                     'f': select_source}
        for key in PROFILE_KEYS:
            profile = problem[key]
            dotted = f'problem.{key}'
            if not isinstance(profile, dict) or 'kind' not in profile:
                raise TypeError(f'{dotted} should be an object with a kind')
            kind = profile['kind']
            if key == 'psi_dT' and kind == 'terminal_of_running':
                builder = None
            else:
                try:
                    builder = selectors[key](kind)
                except KeyError as err:
                    raise ConfigError(err.args[0], key=f'{dotted}.kind') \
                        from None
            allowed = set()
            if builder is not None:
                allowed = set(inspect.signature(builder).parameters)
                allowed -= {'grid', 'tgrid'}
            for name in profile:
                if name != 'kind' and name not in allowed:
                    raise ConfigError('unknown key', key=f'{dotted}.{name}')

    def check_solver(self):
        """Checks the solver group

        Raises:
            TypeError: If a setting has the wrong type
            ValueError: If a setting is out of range
        """
        solver = self.params['solver']
        for i in 'max_iters', 'max_backtracks', 'n_starts', 'seed':
            if not _is_int(solver[i]):
                raise TypeError(f'solver.{i} should be an integer')
        for i in 'armijo_c', 'backtrack_factor', 'initial_step':
            if not _is_number(solver[i]):
                raise TypeError(f'solver.{i} should be a number')
        if solver['n_starts'] < 1:
            raise ConfigError('should be at least 1', key='solver.n_starts')
        if solver['max_workers'] is not None and \
                not _is_int(solver['max_workers']):
            raise TypeError('solver.max_workers should be an integer')
        if solver['grad_tol'] is not None and \
                not _is_number(solver['grad_tol']):
            raise TypeError('solver.grad_tol should be a number')
        if not isinstance(solver['step_rule'], str):
            raise TypeError('solver.step_rule should be a string')
        u_init = solver['u_init']
        if u_init is not None and not _is_number(u_init) and not (
                isinstance(u_init, list) and all(map(_is_number, u_init))):
            raise TypeError('solver.u_init should be a number or a list')
        try:
            self.generate_solver_options()
        except ValueError as err:
            raise ConfigError(str(err), key='solver') from None

    def check_analysis(self):
        """Checks the analysis group

        Raises:
            TypeError: If a setting has the wrong type
            ValueError: If a setting is out of range
        """
        analysis = self.params['analysis']
        for i in 'n_probes', 'seed':
            if not _is_int(analysis[i]):
                raise TypeError(f'analysis.{i} should be an integer')
        for i in ('eps_lambda_rel', 'first_order_rel', 'R_rel', 'probe_tol',
                  'unresolved_max'):
            if not _is_number(analysis[i]):
                raise TypeError(f'analysis.{i} should be a number')
            if analysis[i] < 0:
                raise ConfigError('should be at least 0',
                                  key=f'analysis.{i}')
        if analysis['n_probes'] < 0:
            raise ConfigError('should be at least 0',
                              key='analysis.n_probes')
        if analysis['commutator'] not in ('discrete', 'stencil'):
            raise ConfigError("should be 'discrete' or 'stencil'",
                              key='analysis.commutator')

    def call_all_checks(self):
        """Calls all the check functions at once
        """
        self.check_parameters_dict()
        self.check_name()
        self.check_grids()
        self.check_weights()
        self.check_profiles()
        self.check_solver()
        self.check_analysis()

    def fill_parameters(self, file_dir):
        """Fills the parameters using the config file and updates the
        default values based on these values

        Args:
            file_dir (string): Path of the config file
        """
        config = self.read_config(file_dir)
        self.params = self.merge(default_parameters(), config)
        self.call_all_checks()
        logger.debug('config %s read', file_dir)

    def set_seed(self, seed):
        """Overrides the seeds of the multistart stream and of the probes."""
        self.params['solver']['seed'] = seed
        self.params['analysis']['seed'] = seed

    def generate_grids(self, refine=0, space=True):
        """Spatial and time grid, each refined ``refine`` times by 2; with
        ``space=False`` only the time grid is refined."""
        problem = self.params['problem']
        factor = 2**refine
        grid = SpatialGrid(float(problem['x_lo']), float(problem['x_hi']),
                           problem['n_x'] * (factor if space else 1))
        tgrid = TimeGrid(float(problem['T']), problem['n_t'] * factor)
        return grid, tgrid

    def generate_problem(self, refine=0, space=True):
        """Generates the problem instance from the parameters

        Args:
            refine (int, optional): number of grid doublings. Defaults to 0.
            space (bool, optional): refine the spatial grid too. Defaults to
                True.

        Returns:
            ProblemSpec: problem on the (refined) grids
        """
        problem = self.params['problem']
        grid, tgrid = self.generate_grids(refine, space)

        def params_of(key):
            profile = dict(problem[key])
            return profile.pop('kind'), profile

        kind, kw = params_of('b2')
        pot = select_potential(kind)(grid, **kw)
        kind, kw = params_of('psi0')
        psi0 = select_state(kind)(grid, **kw)
        kind, kw = params_of('psi_d')
        psi_d = select_target(kind)(grid, tgrid, **kw)
        kind, kw = params_of('f')
        f = select_source(kind)(grid, tgrid, **kw)
        kind, kw = params_of('psi_dT')
        if kind == 'terminal_of_running':
            psi_dT = ComplexField(psi_d.node_values(tgrid, grid)[-1], grid)
        else:
            psi_dT = select_state(kind)(grid, **kw)

        return ProblemSpec(grid, tgrid, problem['alpha1'], problem['alpha2'],
                           tuple(problem['bounds']), pot, f, psi0, psi_d,
                           psi_dT, self.params['name'])

    def generate_solver_options(self):
        """SolverOptions of the solver group."""
        solver = dict(self.params['solver'])
        solver.pop('n_starts')
        return SolverOptions(**solver)

    @property
    def n_starts(self):
        return self.params['solver']['n_starts']

    def generate_analysis_options(self):
        """AnalysisOptions of the analysis group."""
        return AnalysisOptions(grad_tol=self.params['solver']['grad_tol'],
                               **self.params['analysis'])
