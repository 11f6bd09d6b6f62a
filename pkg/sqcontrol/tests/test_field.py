import unittest

import numpy as np
import numpy.testing as npt


def sine_field(grid, mode=1):
    from sqcontrol.field import ComplexField
    s = (grid.nodes - grid.x_lo) / grid.length
    return ComplexField(np.sin(mode * np.pi * s) + 0j, grid)


def random_field(grid, seed=0):
    from sqcontrol.field import ComplexField
    rng = np.random.default_rng(seed)
    n = grid.n_interior
    return ComplexField(rng.standard_normal(n) + 1j * rng.standard_normal(n),
                        grid)


class SpatialGridTest(unittest.TestCase):
    """
    Tests the :class:`SpatialGrid` and :class:`ComplexField` classes.
    """
    def test_grid(self):
        from sqcontrol.field import SpatialGrid
        grid = SpatialGrid(0.0, 2.0, 8)
        self.assertAlmostEqual(grid.h, 0.25)
        self.assertEqual(grid.n_interior, 7)
        npt.assert_allclose(grid.nodes, 0.25 * np.arange(1, 8))
        self.assertEqual(grid.refined().n_x, 16)
        self.assertEqual(grid, SpatialGrid(0.0, 2.0, 8))

    def test_bad_grid(self):
        from sqcontrol.field import SpatialGrid
        with self.assertRaises(ValueError):
            SpatialGrid(0.0, 1.0, 2)
        with self.assertRaises(ValueError):
            SpatialGrid(1.0, 1.0, 10)

    def test_field(self):
        from sqcontrol.errors import DimensionError, DivergenceError
        from sqcontrol.field import ComplexField, SpatialGrid
        grid = SpatialGrid(0.0, 1.0, 10)
        with self.assertRaises(DimensionError):
            ComplexField(np.zeros(10), grid)
        with self.assertRaises(DivergenceError):
            ComplexField(np.full(9, np.nan), grid)
        x = random_field(grid)
        npt.assert_allclose((x + 2 * x - x).values, 2 * x.values)
        npt.assert_allclose((-x).values, -x.values)
        self.assertAlmostEqual(x.norm(), x.conj().norm())
        other = ComplexField(np.zeros(19), SpatialGrid(0.0, 1.0, 20))
        with self.assertRaises(DimensionError):
            x + other


class InnerProductTest(unittest.TestCase):
    def test_inner(self):
        from sqcontrol.field import SpatialGrid, inner
        grid = SpatialGrid(0.0, 1.0, 16)
        x, y = random_field(grid, 1), random_field(grid, 2)
        self.assertAlmostEqual(inner(x, y), np.conj(inner(y, x)))
        self.assertAlmostEqual(inner(2j * x, y), 2j * inner(x, y))
        self.assertAlmostEqual(inner(x, 2j * y), -2j * inner(x, y))
        self.assertAlmostEqual(inner(x, x).imag, 0.0)
        self.assertAlmostEqual(inner(x, x).real,
                               grid.h * np.sum(np.abs(x.values)**2))

    def test_grid_mismatch(self):
        from sqcontrol.errors import DimensionError
        from sqcontrol.field import SpatialGrid, inner
        x = random_field(SpatialGrid(0.0, 1.0, 16))
        y = random_field(SpatialGrid(0.0, 1.0, 8))
        with self.assertRaises(DimensionError):
            inner(x, y)


class OperatorTest(unittest.TestCase):
    """
    Tests the Laplacian, B2 and the commutator operators.
    """
    def test_laplacian_eigenvector(self):
        from sqcontrol.field import SpatialGrid, apply_laplacian
        grid = SpatialGrid(0.0, 1.0, 20)
        for mode in 1, 3:
            x = sine_field(grid, mode)
            eigenvalue = -2.0 / grid.h**2 * (1 - np.cos(mode * np.pi
                                                        * grid.h))
            npt.assert_allclose(apply_laplacian(x).values,
                                eigenvalue * x.values, atol=1e-10)

    def test_laplacian_matrix(self):
        from sqcontrol.field import SpatialGrid, apply_laplacian, \
            generator_matrix, laplacian_matrix
        grid = SpatialGrid(-1.0, 1.0, 12)
        x = random_field(grid)
        L = laplacian_matrix(grid)
        npt.assert_allclose(L @ x.values, apply_laplacian(x).values)
        npt.assert_allclose((L - L.T).toarray(), 0.0)
        npt.assert_allclose(generator_matrix(grid).toarray(),
                            -1j * L.toarray())

    def test_B2hat(self):
        from sqcontrol.field import B2hat_matrix, SpatialGrid, apply_B2hat
        from sqcontrol.profiles import bump_potential
        grid = SpatialGrid(0.0, 1.0, 12)
        pot = bump_potential(grid)
        x = random_field(grid)
        npt.assert_allclose(apply_B2hat(pot, x).values,
                            -1j * pot.b2 * x.values)
        npt.assert_allclose(B2hat_matrix(pot) @ x.values,
                            apply_B2hat(pot, x).values)

    def test_discrete_commutator(self):
        """
        commutator_M1 is A B2 - B2 A of the assembled matrices.
        """
        from sqcontrol.field import B2hat_matrix, SpatialGrid, \
            commutator_M1, commutator_M1_B2, generator_matrix
        from sqcontrol.profiles import bump_potential
        grid = SpatialGrid(0.0, 1.0, 14)
        pot = bump_potential(grid)
        A = generator_matrix(grid).toarray()
        B = B2hat_matrix(pot).toarray()
        M = A @ B - B @ A
        x = random_field(grid, 5)
        npt.assert_allclose(commutator_M1(pot, x).values, M @ x.values,
                            atol=1e-9)
        npt.assert_allclose(commutator_M1_B2(pot, x).values,
                            (M @ B - B @ M) @ x.values, atol=1e-9)

    def test_discrete_commutator_skew(self):
        from sqcontrol.field import SpatialGrid, commutator_M1, inner
        from sqcontrol.profiles import bump_potential
        grid = SpatialGrid(0.0, 1.0, 16)
        pot = bump_potential(grid)
        x, y = random_field(grid, 1), random_field(grid, 2)
        self.assertAlmostEqual(inner(commutator_M1(pot, x), y),
                               -inner(x, commutator_M1(pot, y)))

    def test_stencil_adjoint(self):
        from sqcontrol.field import SpatialGrid, apply_M1, \
            apply_M1_adjoint, inner
        from sqcontrol.profiles import bump_potential
        grid = SpatialGrid(0.0, 1.0, 16)
        pot = bump_potential(grid)
        x, y = random_field(grid, 3), random_field(grid, 4)
        self.assertAlmostEqual(inner(apply_M1(pot, x), y),
                               inner(x, apply_M1_adjoint(pot, y)))

    def test_stencil_consistency(self):
        """
        The closed form M1 and the assembled commutator agree to O(h^2)
        on smooth fields.
        """
        from sqcontrol.field import SpatialGrid, apply_M1, commutator_M1
        from sqcontrol.profiles import bump_potential
        errors = []
        for n_x in 20, 40:
            grid = SpatialGrid(0.0, 1.0, n_x)
            pot = bump_potential(grid)
            x = sine_field(grid)
            diff = apply_M1(pot, x).values - commutator_M1(pot, x).values
            errors.append(np.max(np.abs(diff)))
        self.assertGreater(errors[0] / errors[1], 3.0)

    def test_stencil_B2_commutator(self):
        from sqcontrol.field import SpatialGrid, apply_M1_B2_commutator
        from sqcontrol.profiles import bump_potential
        grid = SpatialGrid(0.0, 1.0, 10)
        pot = bump_potential(grid)
        x = random_field(grid)
        npt.assert_allclose(apply_M1_B2_commutator(pot, x).values,
                            2j * pot.grad_b2**2 * x.values)

    def test_commutator_kernels(self):
        from sqcontrol.field import SpatialGrid, commutator_kernels
        from sqcontrol.profiles import bump_potential
        pot = bump_potential(SpatialGrid(0.0, 1.0, 10))
        for kind in 'discrete', 'stencil':
            self.assertEqual(len(commutator_kernels(pot, kind)), 3)
        with self.assertRaises(ValueError):
            commutator_kernels(pot, 'spectral')


class PotentialTest(unittest.TestCase):
    def test_from_samples(self):
        from sqcontrol.field import Potential, SpatialGrid
        from sqcontrol.profiles import bump_potential
        grid = SpatialGrid(0.0, 1.0, 200)
        exact = bump_potential(grid)
        sampled = Potential.from_samples(grid, exact.b2)
        npt.assert_allclose(sampled.grad_b2, exact.grad_b2, atol=5e-3)
        npt.assert_allclose(sampled.lap_b2, exact.lap_b2, atol=1e-2)

    def test_validation(self):
        from sqcontrol.errors import DimensionError
        from sqcontrol.field import Potential, SpatialGrid
        grid = SpatialGrid(0.0, 1.0, 10)
        zeros = np.zeros(9)
        with self.assertRaises(DimensionError):
            Potential(np.zeros(10), zeros, zeros, grid)
        with self.assertRaises(TypeError):
            Potential(zeros + 1j, zeros, zeros, grid)
        self.assertTrue(Potential.constant(grid, 2.0).is_constant)


if __name__ == '__main__':
    unittest.main()
