"""
solution.py: artifacts of the command line runs, written as CSV (pandas),
JSON and PNG plots (matplotlib, Agg canvas)
"""

import json
import logging
import os

import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from .AbstractSolution import AbstractSolution
from .version_info import VERSION

logger = logging.getLogger(__name__)

#: version of the layout of result.json and report.json
SCHEMA = 1

#: column order of every CSV file; never reordered
COLUMNS = {
    'u_opt': ['t_mid', 'u'],
    'lambda': ['t_mid', 'lambda'],
    'psi_final': ['x', 're_psi', 'im_psi', 'abs_psi_sq'],
    'cost_history': ['iteration', 'cost', 'projected_grad_norm'],
    'R': ['t', 'R'],
    'check': ['suite', 'level', 'n_x', 'n_t', 'gap', 'tolerance', 'order',
              'passed'],
}


def _finite(value):
    value = float(value)
    return value if np.isfinite(value) else None


def write_json(data, file_path):
    with open(file_path, 'w', encoding='utf-8') as file:
        json.dump(data, file, indent=2)


class _Artifacts(AbstractSolution):
    """Shared writing of tables, JSON documents and plots."""
    def __init__(self, plots=True):
        self.plots = plots

    def documents(self):
        """JSON documents as ``{file name: dict}``."""
        return {}

    def figures(self):
        """Plots as ``{file name: Figure}``."""
        return {}

    def save_tables(self, dir_path):
        for name, table in self.get_solution.items():
            table.to_csv(os.path.join(dir_path, f'{name}.csv'), index=False)

    def save_documents(self, dir_path):
        for name, data in self.documents().items():
            write_json(data, os.path.join(dir_path, name))

    def save_plots(self, dir_path):
        for name, figure in self.figures().items():
            figure.savefig(os.path.join(dir_path, name))

    def output(self, dir_path):
        """Creates ``dir_path`` and writes every artifact into it.

        :return: paths written
        :rtype: list of str
        """
        os.makedirs(dir_path, exist_ok=True)
        self.save_tables(dir_path)
        self.save_documents(dir_path)
        if self.plots:
            self.save_plots(dir_path)
        written = sorted(os.listdir(dir_path))
        logger.info('wrote %s to %s', ', '.join(written), dir_path)
        return [os.path.join(dir_path, name) for name in written]


def _step_plot(t, values, ylabel, title, hlines=()):
    figure = Figure()
    ax = figure.subplots()
    ax.step(t, values, where='mid')
    for level in hlines:
        ax.axhline(level, color='grey', linestyle=':', linewidth=0.8)
    ax.set_xlabel('Time')
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return figure


class SolveOutput(_Artifacts):
    """Artifacts of ``solve``: u_opt.csv, lambda.csv, psi_final.csv,
    cost_history.csv, result.json, arcs.json and the plots.

    :param spec: problem instance
    :type spec: ProblemSpec
    :param result: solver outcome
    :type result: SolveResult
    :param psi: state of the optimal control
    :type psi: Trajectory
    :param report: optimality report of the optimal control
    :type report: OptimalityReport, optional
    """
    def __init__(self, spec, result, psi, report=None, plots=True):
        super().__init__(plots)
        self.spec = spec
        self.result = result
        self.psi = psi
        self.report = report

    @property
    def get_solution(self):
        t_mid = self.spec.tgrid.midpoints
        psi_T = self.psi.values[-1]
        n = len(self.result.cost_history)
        norms = np.full(n, np.nan)
        norms[:len(self.result.projected_grad_norms)] = \
            self.result.projected_grad_norms[:n]
        tables = {
            'u_opt': pd.DataFrame({'t_mid': t_mid,
                                   'u': self.result.u_opt.values}),
            'lambda': pd.DataFrame({'t_mid': t_mid,
                                    'lambda': self.result.switching}),
            'psi_final': pd.DataFrame({'x': self.spec.grid.nodes,
                                       're_psi': psi_T.real,
                                       'im_psi': psi_T.imag,
                                       'abs_psi_sq': np.abs(psi_T)**2}),
            'cost_history': pd.DataFrame({'iteration': np.arange(n),
                                          'cost': self.result.cost_history,
                                          'projected_grad_norm': norms}),
        }
        return {name: table[COLUMNS[name]] for name, table in tables.items()}

    def documents(self):
        result = self.result
        data = {
            'schema': SCHEMA,
            'version': VERSION,
            'name': self.spec.name,
            'n_x': self.spec.grid.n_x,
            'n_t': self.spec.tgrid.n_t,
            'status': result.status,
            'converged': result.converged,
            'iterations': result.iterations,
            'cost': result.cost.as_dict(),
            'projected_grad_norm': float(result.projected_grad_norms[-1]),
            'first_order_violation': result.first_order_violation,
            'all_costs': [_finite(c) for c in result.all_costs],
        }
        documents = {'result.json': data}
        if self.report is not None:
            report = self.report.as_dict()
            data['verdicts'] = report['verdicts']
            data['passed'] = report['passed']
            documents['arcs.json'] = dict(report['arcs'], schema=SCHEMA)
        return documents

    def figures(self):
        t_mid = self.spec.tgrid.midpoints
        return {
            'u_opt.png': _step_plot(t_mid, self.result.u_opt.values, 'u',
                                    'Optimal control', self.spec.bounds),
            'lambda.png': _step_plot(t_mid, self.result.switching, 'Lambda',
                                     'Switching function', (0.0,)),
        }


class VerifyOutput(_Artifacts):
    """Artifacts of ``verify``: report.json, lambda.csv, R.csv and the
    plots.

    :param report: optimality report
    :type report: OptimalityReport
    """
    def __init__(self, spec, report, plots=True):
        super().__init__(plots)
        self.spec = spec
        self.report = report

    @property
    def get_solution(self):
        return {
            'lambda': pd.DataFrame({'t_mid': self.spec.tgrid.midpoints,
                                    'lambda': self.report.lam}),
            'R': pd.DataFrame({'t': self.spec.tgrid.nodes,
                               'R': self.report.R_samples}),
        }

    def documents(self):
        data = self.report.as_dict()
        data.update(schema=SCHEMA, version=VERSION, name=self.spec.name)
        return {'report.json': data}

    def figures(self):
        figure = Figure()
        ax = figure.subplots()
        ax.plot(self.spec.tgrid.nodes, self.report.R_samples)
        for arc in self.report.arc_structure.singular_arcs():
            ax.axvspan(arc.t_start, arc.t_end, color='grey', alpha=0.2)
        ax.set_xlabel('Time')
        ax.set_ylabel('R')
        ax.set_title('R(t), singular arcs shaded')
        return {
            'lambda.png': _step_plot(self.spec.tgrid.midpoints,
                                     self.report.lam, 'Lambda',
                                     'Switching function', (0.0,)),
            'r.png': figure,
        }


class CheckOutput(_Artifacts):
    """Table of a ``check`` run, written as check.csv."""
    def __init__(self, table):
        super().__init__(plots=False)
        self.table = table

    @property
    def get_solution(self):
        return {'check': self.table[COLUMNS['check']]}
