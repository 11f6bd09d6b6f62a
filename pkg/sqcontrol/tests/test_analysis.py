import json
import math
import unittest

import numpy as np
import numpy.testing as npt

from sqcontrol.tests.problems import convex_problem, small_problem, \
    smooth_control


class ArcDetectionTest(unittest.TestCase):
    """
    Tests :func:`detect_arcs` and the :class:`ArcStructure` class.
    """
    def setUp(self):
        from sqcontrol.dynamics import TimeGrid
        self.tgrid = TimeGrid(1.0, 20)

    def test_three_arcs(self):
        from sqcontrol.analysis import detect_arcs
        from sqcontrol.dynamics import Control
        u = Control([0.0] * 5 + [0.5] * 10 + [1.0] * 5)
        lam = np.array([1.0] * 5 + [0.0] * 10 + [-1.0] * 5)
        arcs = detect_arcs(u, (0.0, 1.0), lam, tgrid=self.tgrid)
        self.assertEqual([a.kind for a in arcs.arcs],
                         ['lower_boundary', 'singular', 'upper_boundary'])
        npt.assert_allclose(arcs.junction_times, [0.25, 0.75])
        self.assertEqual(len(arcs.bang_bang_junctions), 0)
        self.assertEqual(len(arcs.boundary_arcs()), 2)
        self.assertEqual(arcs.singular_arcs()[0].k_start, 5)
        self.assertEqual(arcs.unresolved_fraction(), 0.0)
        self.assertEqual(int(np.sum(arcs.mask('singular'))), 10)

    def test_bang_bang(self):
        from sqcontrol.analysis import detect_arcs
        from sqcontrol.dynamics import Control
        u = Control([1.0] * 10 + [0.0] * 10)
        lam = np.linspace(-1.0, 1.0, 20)
        arcs = detect_arcs(u, (0.0, 1.0), lam, tgrid=self.tgrid)
        self.assertEqual([a.kind for a in arcs.arcs],
                         ['upper_boundary', 'bang_bang_junction_point',
                          'lower_boundary'])
        npt.assert_allclose(arcs.bang_bang_junctions, [0.5])
        npt.assert_allclose(arcs.junction_times, [0.5])
        self.assertEqual(arcs.arcs[1].length, 0.0)
        self.assertEqual(set(arcs.as_dict()),
                         {'arcs', 'junction_times', 'bang_bang_junctions'})

    def test_unresolved(self):
        from sqcontrol.analysis import detect_arcs
        from sqcontrol.dynamics import Control
        from sqcontrol.errors import StructureError
        u = Control(np.full(20, 0.5))
        lam = np.ones(20)
        with self.assertRaises(StructureError):
            detect_arcs(u, (0.0, 1.0), lam, tgrid=self.tgrid)
        with self.assertLogs('sqcontrol.analysis', 'WARNING'):
            arcs = detect_arcs(u, (0.0, 1.0), lam, tgrid=self.tgrid,
                               strict=False)
        self.assertEqual(arcs.unresolved_fraction(), 1.0)

    def test_interior(self):
        from sqcontrol.analysis import detect_arcs
        from sqcontrol.dynamics import Control
        u = Control(np.full(20, 0.5))
        arcs = detect_arcs(u, (0.0, 1.0), np.zeros(20), eps_lambda=1e-8,
                           tgrid=self.tgrid, affine=False)
        self.assertEqual([a.kind for a in arcs.arcs], ['interior'])

    def test_dimensions(self):
        from sqcontrol.analysis import detect_arcs
        from sqcontrol.dynamics import Control
        from sqcontrol.errors import DimensionError
        u = Control(np.full(20, 0.5))
        with self.assertRaises(DimensionError):
            detect_arcs(u, (0.0, 1.0), np.zeros(19))
        with self.assertRaises(DimensionError):
            detect_arcs(Control(np.zeros(10)), (0.0, 1.0), np.zeros(10),
                        tgrid=self.tgrid)


class ConditionTest(unittest.TestCase):
    """
    Tests the first order, complementarity and junction checks.
    """
    def test_first_order(self):
        from sqcontrol.analysis import check_first_order
        from sqcontrol.dynamics import Control, TimeGrid
        tgrid = TimeGrid(1.0, 4)
        u = Control([0.0, 0.5, 1.0, 1.0])
        good = np.array([1.0, 0.0, -1.0, -2.0])
        self.assertEqual(check_first_order(u, good, (0.0, 1.0), tgrid), 0.0)
        # Lambda > 0 away from the lower bound, Lambda < 0 off the upper one
        bad = np.array([1.0, 1.0, 1.0, -2.0])
        self.assertAlmostEqual(
            check_first_order(u, bad, (0.0, 1.0), tgrid), 0.5)

    def test_strict_complementarity(self):
        from sqcontrol.analysis import check_strict_complementarity, \
            detect_arcs
        from sqcontrol.dynamics import Control, TimeGrid
        tgrid = TimeGrid(1.0, 20)
        u = Control([0.0] * 5 + [0.5] * 10 + [1.0] * 5)
        lam = np.array([0.2, 0.4, 0.6, 0.8, 1e-9] + [0.0] * 10
                       + [-1e-9, -1.0, -1.0, -1.0, -0.5])
        arcs = detect_arcs(u, (0.0, 1.0), lam, eps_lambda=1e-8, tgrid=tgrid)
        # the entries next to the singular arc are not counted
        result = check_strict_complementarity(arcs, lam)
        self.assertAlmostEqual(result.margin, 0.2)
        self.assertFalse(result.vacuous)
        u = Control(np.full(20, 0.5))
        arcs = detect_arcs(u, (0.0, 1.0), np.zeros(20), tgrid=tgrid)
        result = check_strict_complementarity(arcs, np.zeros(20))
        self.assertEqual(result.margin, math.inf)
        self.assertTrue(result.vacuous)

    def test_short_boundary_arc(self):
        from sqcontrol.analysis import check_strict_complementarity, \
            detect_arcs
        from sqcontrol.dynamics import Control, TimeGrid
        tgrid = TimeGrid(1.0, 20)
        u = Control([0.5] * 5 + [0.0] + [0.5] * 14)
        lam = np.zeros(20)
        lam[5] = 0.3
        arcs = detect_arcs(u, (0.0, 1.0), lam, eps_lambda=1e-8, tgrid=tgrid)
        with self.assertLogs('sqcontrol.analysis', 'DEBUG'):
            result = check_strict_complementarity(arcs, lam)
        self.assertAlmostEqual(result.margin, 0.3)
        self.assertFalse(result.vacuous)

    def test_junction_shift(self):
        from sqcontrol.analysis import detect_arcs, junction_shift
        from sqcontrol.dynamics import Control, TimeGrid

        def bang_bang(n_t, switch):
            tgrid = TimeGrid(1.0, n_t)
            k = round(switch * n_t)
            u = Control([1.0] * k + [0.0] * (n_t - k))
            lam = np.where(np.arange(n_t) < k, -1.0, 1.0)
            return detect_arcs(u, (0.0, 1.0), lam, tgrid=tgrid)

        coarse, fine = bang_bang(20, 0.5), bang_bang(40, 0.525)
        self.assertAlmostEqual(junction_shift(coarse, fine), 0.025)
        self.assertEqual(junction_shift(coarse, coarse), 0.0)
        tgrid = TimeGrid(1.0, 20)
        flat = detect_arcs(Control(np.full(20, 0.5)), (0.0, 1.0),
                           np.zeros(20), tgrid=tgrid)
        self.assertEqual(junction_shift(flat, flat), 0.0)
        with self.assertLogs('sqcontrol.analysis', 'INFO'):
            self.assertEqual(junction_shift(coarse, flat), math.inf)

    def test_bang_bang_junctions(self):
        from sqcontrol.analysis import check_bang_bang_junctions, \
            detect_arcs
        from sqcontrol.dynamics import Control, TimeGrid
        tgrid = TimeGrid(1.0, 20)
        u = Control([1.0] * 10 + [0.0] * 10)
        arcs = detect_arcs(u, (0.0, 1.0), np.linspace(-1.0, 1.0, 20),
                           tgrid=tgrid)
        R = np.ones(21)
        R[10] = -3.0
        R[0] = -5.0
        self.assertEqual(check_bang_bang_junctions(arcs, R), -3.0)
        self.assertEqual(check_bang_bang_junctions(arcs, np.ones(21)), 1.0)


class ReportTest(unittest.TestCase):
    """
    Tests :func:`full_report` and the growth ratio.
    """
    def test_convex_optimum(self):
        from sqcontrol.analysis import AnalysisOptions, full_report
        spec = convex_problem(alpha1=0.3)
        u = spec.control(np.full(spec.tgrid.n_t, -0.3))
        report = full_report(spec, u, AnalysisOptions(n_probes=5))
        self.assertTrue(report.passed, report.verdicts)
        self.assertEqual(report.first_order_violation, 0.0)
        self.assertEqual(report.strict_complementarity_margin, math.inf)
        self.assertGreater(report.pc2_probe_min_ratio, 0.0)
        data = json.loads(json.dumps(report.as_dict()))
        self.assertTrue(data['passed'])
        self.assertIsNone(data['strict_complementarity_margin'])
        self.assertEqual(set(data['verdicts']), {
            'first_order', 'strict_complementarity', 'R_on_singular',
            'R_at_bb_junctions', 'pc2_probe', 'arc_structure'})

    def test_non_stationary(self):
        from sqcontrol.analysis import AnalysisOptions, full_report
        spec = convex_problem(alpha1=0.3)
        u = spec.control(np.full(spec.tgrid.n_t, 0.5))
        report = full_report(spec, u, AnalysisOptions(n_probes=0))
        self.assertFalse(report.passed)
        self.assertFalse(report.verdicts['first_order'])
        self.assertAlmostEqual(report.first_order_violation, spec.tgrid.T)
        self.assertEqual(report.pc2_probe_min_ratio, math.inf)

    def test_report_shapes(self):
        from sqcontrol.analysis import AnalysisOptions, full_report
        spec = small_problem()
        u = smooth_control(spec)
        report = full_report(spec, u, AnalysisOptions(n_probes=3))
        self.assertEqual(report.lam.shape, (spec.tgrid.n_t,))
        self.assertEqual(report.R_samples.shape, (spec.tgrid.n_t + 1,))
        self.assertGreater(report.scale, 0.0)
        json.dumps(report.as_dict())

    def test_solver_tolerance_floor(self):
        """
        A control from a solve stopped at grad_tol only bounds |Lambda| by
        grad_tol / dt on its free intervals.
        """
        from sqcontrol.analysis import AnalysisOptions, full_report
        spec = small_problem()
        u = smooth_control(spec)
        loose = full_report(spec, u, AnalysisOptions(n_probes=0))
        self.assertAlmostEqual(loose.tolerances['eps_lambda'],
                               1e-4 * loose.scale)
        report = full_report(spec, u, AnalysisOptions(n_probes=0,
                                                      grad_tol=1e3))
        self.assertEqual(report.tolerances['eps_lambda'],
                         1e3 / spec.tgrid.dt)
        self.assertEqual([a.kind for a in report.arc_structure.arcs],
                         ['singular'])
        self.assertTrue(report.strict_complementarity_vacuous)
        self.assertTrue(report.as_dict()['strict_complementarity_vacuous'])

    def test_stencil_warning(self):
        from sqcontrol.analysis import AnalysisOptions, full_report
        spec = small_problem()
        with self.assertLogs('sqcontrol.analysis', 'WARNING'):
            full_report(spec, smooth_control(spec),
                        AnalysisOptions(n_probes=0, commutator='stencil'))

    def test_quadratic_growth(self):
        from sqcontrol.analysis import quadratic_growth_ratio
        from sqcontrol.dynamics import Control
        spec = convex_problem(alpha1=0.3)
        u = spec.control(np.full(spec.tgrid.n_t, -0.3))
        rng = np.random.default_rng(0)
        directions = [Control(rng.standard_normal(spec.tgrid.n_t))
                      for _ in range(3)]
        directions.append(Control(np.zeros(spec.tgrid.n_t)))
        ratios = quadratic_growth_ratio(spec, u, directions)
        self.assertTrue(np.all(ratios[:3] > 0))
        self.assertTrue(np.isnan(ratios[3]))


if __name__ == '__main__':
    unittest.main()
