import os
import tempfile
import unittest

import numpy as np
import numpy.testing as npt
import pandas as pd

from sqcontrol.tests.problems import config, fixture


class CommandLineTest(unittest.TestCase):
    """
    Tests the exit codes and artifacts of :func:`sqcontrol.cli.main`.
    """
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, *names):
        return os.path.join(self.tmp.name, *names)

    def run_main(self, *argv):
        from sqcontrol.cli import main
        return main(['-q'] + [str(a) for a in argv])

    def write_control(self, values, name='control.csv'):
        pd.DataFrame({'u': values}).to_csv(self.path(name), index=False)
        return self.path(name)

    def test_solve_and_verify(self):
        code = self.run_main('solve', config('convex.json'), '--out-dir',
                             self.path('solve'))
        self.assertEqual(code, 0)
        u_opt = pd.read_csv(self.path('solve', 'u_opt.csv'))
        self.assertEqual(len(u_opt), 50)
        npt.assert_allclose(u_opt['u'], 0.0, atol=1e-9)
        self.assertTrue(os.path.isfile(self.path('solve', 'result.json')))

        code = self.run_main('verify', config('convex.json'),
                             self.path('solve', 'u_opt.csv'), '--out-dir',
                             self.path('verify'))
        self.assertEqual(code, 0)
        self.assertTrue(os.path.isfile(self.path('verify', 'report.json')))

    def test_verify_fails_off_optimum(self):
        rng = np.random.default_rng(0)
        control = self.write_control(rng.uniform(-1.0, 1.0, 50))
        code = self.run_main('verify', config('convex.json'), control,
                             '--out-dir', self.path('verify'))
        self.assertEqual(code, 1)

    def test_verify_bound_control(self):
        """
        u = u_m on [0, T] with Lambda > 0 passes every check.
        """
        control = self.write_control(np.full(20, -1.0))
        code = self.run_main('verify', fixture('convex_bound.json'),
                             control, '--out-dir', self.path('verify'))
        self.assertEqual(code, 0)

    def test_bad_control_file(self):
        cases = [
            self.write_control(np.zeros(49), 'short.csv'),
            self.write_control(np.full(50, 2.0), 'outside.csv'),
            self.path('missing.csv'),
        ]
        pd.DataFrame({'v': np.zeros(50)}).to_csv(self.path('no_u.csv'),
                                                 index=False)
        cases.append(self.path('no_u.csv'))
        for control in cases:
            code = self.run_main('verify', config('convex.json'), control,
                                 '--out-dir', self.path('verify'))
            self.assertEqual(code, 65, control)

    def test_config_errors(self):
        for name in ('bad_json.json', 'unknown_key.json',
                     'unknown_profile.json', 'profile_parameter.json',
                     'not_an_object.json', 'missing.json'):
            code = self.run_main('solve', fixture(name), '--out-dir',
                                 self.path('solve'))
            self.assertEqual(code, 64, name)
        code = self.run_main('check', config('convex.json'), '--refine',
                             '-1')
        self.assertEqual(code, 64)

    def test_not_converged(self):
        code = self.run_main('solve', fixture('small.json'), '--out-dir',
                             self.path('small'), '--seed', '3')
        self.assertEqual(code, 2)
        self.assertTrue(os.path.isfile(self.path('small', 'result.json')))

    def test_check(self):
        from sqcontrol.solution import COLUMNS
        code = self.run_main('check', config('convex.json'), '--which',
                             'all', '--refine', '0', '--out-dir',
                             self.path('check'))
        self.assertEqual(code, 0)
        table = pd.read_csv(self.path('check', 'check.csv'))
        self.assertEqual(list(table.columns), COLUMNS['check'])
        self.assertEqual(sorted(table['suite']),
                         ['goh', 'grad', 'ibp', 'unitary'])

    def test_parser(self):
        from sqcontrol.cli import build_parser
        parser = build_parser()
        args = parser.parse_args(['check', 'c.json'])
        self.assertEqual(args.refine, 1)
        self.assertEqual(args.which, 'all')
        args = parser.parse_args(['solve', 'c.json', '--seed', '5'])
        self.assertEqual(args.refine, 0)
        self.assertEqual(args.seed, 5)
        with self.assertRaises(SystemExit):
            parser.parse_args(['check', 'c.json', '--which', 'hessian'])
        with self.assertRaises(SystemExit):
            parser.parse_args(['-v', '-q', 'solve', 'c.json'])


if __name__ == '__main__':
    unittest.main()
