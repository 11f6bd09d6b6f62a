import unittest

import numpy as np
import pandas as pd

from sqcontrol.tests.problems import small_problem


def suite_table(gaps):
    table = pd.DataFrame({'suite': 'goh', 'level': range(len(gaps)),
                          'gap': gaps, 'passed': True})
    table['order'] = np.log2(table['gap'].shift(1) / table['gap'])
    return table


class OrderTest(unittest.TestCase):
    """
    Tests the refinement order gate of the suites.
    """
    def test_first_order_gaps_pass(self):
        from sqcontrol.checks import gate_orders
        table = gate_orders(suite_table([8e-3, 4e-3, 2e-3, 1e-3]), 0.9)
        self.assertTrue(table['passed'].all())

    def test_slow_level_fails(self):
        from sqcontrol.checks import gate_orders
        with self.assertLogs('sqcontrol.checks', 'WARNING'):
            table = gate_orders(suite_table([8e-3, 4e-3, 3e-3, 1.5e-3]),
                                0.9)
        self.assertEqual(list(table['passed']), [True, True, False, True])

    def test_round_off_floor(self):
        from sqcontrol.checks import gate_orders
        table = gate_orders(suite_table([1e-12, 2e-12]), 0.9)
        self.assertTrue(table['passed'].all())

    def test_failed_gap_stays_failed(self):
        from sqcontrol.checks import gate_orders
        table = suite_table([8e-3, 4e-3])
        table.loc[1, 'passed'] = False
        self.assertFalse(gate_orders(table, 0.9)['passed'].iloc[1])


class SuiteTest(unittest.TestCase):
    def test_goh_levels(self):
        from sqcontrol.checks import run_suite
        specs = [small_problem(n_t=n_t) for n_t in (20, 40)]
        table = run_suite('goh', specs)
        self.assertEqual(list(table['n_t']), [20, 40])
        self.assertTrue(np.isnan(table['order'].iloc[0]))
        self.assertTrue(np.isfinite(table['order'].iloc[1]))

    def test_stencil_warning(self):
        from sqcontrol.checks import run_suite
        with self.assertLogs('sqcontrol.checks', 'WARNING'):
            run_suite('goh', [small_problem()], commutator='stencil')

    def test_unknown_suite(self):
        from sqcontrol.checks import run_suite
        with self.assertRaises(ValueError):
            run_suite('hessian', [small_problem()])


if __name__ == '__main__':
    unittest.main()
