import unittest

import numpy as np
import numpy.testing as npt

from sqcontrol.tests.problems import small_problem, smooth_control


def random_data(spec, seed):
    from sqcontrol.dynamics import SourceTerm
    from sqcontrol.field import ComplexField
    rng = np.random.default_rng(seed)
    n, n_t = spec.grid.n_interior, spec.tgrid.n_t

    def sample(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    return (ComplexField(sample(n), spec.grid),
            ComplexField(sample(n), spec.grid),
            SourceTerm.sampled(sample(n_t, n), 'midpoints'),
            SourceTerm.sampled(sample(n_t + 1, n), 'nodes'))


class CostateTest(unittest.TestCase):
    """
    Tests the backward propagation in :mod:`sqcontrol.adjoint`.
    """
    def test_terminal_value(self):
        from sqcontrol.adjoint import propagate_costate
        from sqcontrol.dynamics import propagate_forward
        spec = small_problem()
        u = smooth_control(spec)
        psi = propagate_forward(spec, u)
        p = propagate_costate(spec, u, psi)
        npt.assert_allclose(p.final.values,
                            psi.final.values - spec.psi_dT.values)
        self.assertEqual(p.scheme, 'discrete')
        self.assertEqual(p.midpoints().shape,
                         (spec.tgrid.n_t, spec.grid.n_interior))

    def test_ibp_identity(self):
        """
        The discrete costate is the transpose of the forward map, so the
        pairing identity holds to round-off for arbitrary data.
        """
        from sqcontrol.adjoint import ibp_terms, propagate_dual
        from sqcontrol.dynamics import propagate_affine
        spec = small_problem(n_x=20, n_t=50)
        u = smooth_control(spec)
        for seed in range(10):
            z0, pT, b, g = random_data(spec, seed)
            z = propagate_affine(spec, u, z0, b)
            p = propagate_dual(spec, u, pT, g)
            lhs, rhs = ibp_terms(p, z, b, g)
            self.assertLess(abs(lhs - rhs), 1e-11 * max(abs(lhs), 1.0))

    def test_ibp_mismatched_scheme(self):
        """
        The Crank-Nicolson costate satisfies the identity only
        approximately.
        """
        from sqcontrol.adjoint import ibp_residual, propagate_dual
        from sqcontrol.dynamics import propagate_affine
        spec = small_problem(n_x=20, n_t=50)
        u = smooth_control(spec)
        z0, pT, b, g = random_data(spec, 0)
        z = propagate_affine(spec, u, z0, b)
        exact = ibp_residual(propagate_dual(spec, u, pT, g), z, b, g)
        mismatched = ibp_residual(
            propagate_dual(spec, u, pT, g, 'crank_nicolson'), z, b, g)
        self.assertGreater(mismatched, 1e3 * max(exact, 1e-15))

    def test_schemes_agree(self):
        """
        Both schemes discretize the same costate equation; on smooth data
        they differ by O(dt^2).
        """
        from sqcontrol.adjoint import propagate_costate
        from sqcontrol.dynamics import propagate_forward
        differences = []
        for n_t in 40, 80:
            spec = small_problem(n_x=8, n_t=n_t)
            u = spec.constant_control(0.5)
            psi = propagate_forward(spec, u)
            p = propagate_costate(spec, u, psi)
            q = propagate_costate(spec, u, psi, 'crank_nicolson')
            differences.append(np.max(np.abs(p.values - q.values)))
        self.assertGreater(differences[0] / differences[1], 2.5)

    def test_interval_values(self):
        from sqcontrol.adjoint import propagate_costate
        from sqcontrol.dynamics import propagate_forward
        spec = small_problem(n_t=40)
        u = smooth_control(spec)
        psi = propagate_forward(spec, u)
        p = propagate_costate(spec, u, psi)
        q = propagate_costate(spec, u, psi, 'crank_nicolson')
        npt.assert_allclose(q.midpoints(), 0.5 * (q.values[:-1]
                                                  + q.values[1:]))
        # node averages up to dt/4 (r_k - r_k+1)
        gap = np.max(np.abs(p.midpoints() - 0.5 * (p.values[:-1]
                                                   + p.values[1:])))
        self.assertLess(gap, 0.1 * np.max(np.abs(p.values)))

    def test_errors(self):
        from sqcontrol.adjoint import CostateTrajectory, propagate_costate, \
            propagate_dual
        from sqcontrol.dynamics import Trajectory, propagate_forward
        from sqcontrol.errors import DimensionError
        spec = small_problem()
        u = smooth_control(spec)
        psi = propagate_forward(spec, u)
        with self.assertRaises(ValueError):
            propagate_dual(spec, u, spec.psi0, scheme='backward_euler')
        with self.assertRaises(DimensionError):
            CostateTrajectory(psi.values, psi.values, spec.grid, spec.tgrid)
        coarse = small_problem(n_t=10)
        other = Trajectory(np.zeros((11, spec.grid.n_interior)), spec.grid,
                           coarse.tgrid)
        with self.assertRaises(DimensionError):
            propagate_costate(spec, u, other)


if __name__ == '__main__':
    unittest.main()
