"""field.py: spatial discretization of the interval (x_lo, x_hi) with
homogeneous Dirichlet boundary conditions.

Fields live on the interior nodes ``x_j = x_lo + j*h``, ``j = 1..n_x-1``;
the boundary values are eliminated, so every operator below is square and
the Laplacian is tridiagonal. The functions working on raw arrays (leading
underscore) act along the last axis, which lets the time-dependent code
apply them to a whole trajectory at once.

Operator conventions::

    A  = -i Lap_h                 (generator, psi' + A psi = u B2 psi + f)
    B2 = -i diag(b2)
    M1 = -2 grad(b2) . grad - lap(b2)          (stencil form)
    M  = A B2 - B2 A = diag(b2) Lap_h - Lap_h diag(b2)   (assembled form)
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse

from .errors import DimensionError, DivergenceError


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid on (x_lo, x_hi) with ``n_x`` steps.

    :param x_lo: left end point
    :type x_lo: float
    :param x_hi: right end point
    :type x_hi: float
    :param n_x: number of spatial steps, at least 3
    :type n_x: int
    """
    x_lo: float = 0.0
    x_hi: float = 1.0
    n_x: int = 40

    def __post_init__(self):
        if not isinstance(self.n_x, (int, np.integer)) or self.n_x < 3:
            raise ValueError('n_x should be an integer of at least 3')
        if not self.x_hi > self.x_lo:
            raise ValueError('x_hi should be larger than x_lo')

    @property
    def h(self):
        return (self.x_hi - self.x_lo) / self.n_x

    @property
    def n_interior(self):
        return self.n_x - 1

    @property
    def length(self):
        return self.x_hi - self.x_lo

    @property
    def nodes(self):
        """Interior node coordinates."""
        return self.x_lo + self.h * np.arange(1, self.n_x)

    def zeros(self):
        return ComplexField(np.zeros(self.n_interior, dtype=complex), self)

    def refined(self, factor=2):
        """Same domain with ``factor`` times as many steps."""
        return SpatialGrid(self.x_lo, self.x_hi, self.n_x * factor)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex values on the interior nodes of a :class:`SpatialGrid`.

    :param values: one complex value per interior node
    :type values: array of complex
    :param grid: grid the values live on
    :type grid: SpatialGrid
    """
    values: np.ndarray
    grid: SpatialGrid

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_interior,):
            raise DimensionError(
                f'field has shape {values.shape}, grid needs '
                f'({self.grid.n_interior},)')
        if not np.all(np.isfinite(values)):
            raise DivergenceError('field contains non-finite values')
        object.__setattr__(self, 'values', values)

    def _check(self, other):
        if not isinstance(other, ComplexField):
            return NotImplemented
        check_same_grid(self.grid, other.grid)
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return ComplexField(self.values + other.values, self.grid)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return ComplexField(self.values - other.values, self.grid)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return ComplexField(scalar * self.values, self.grid)

    __rmul__ = __mul__

    def __neg__(self):
        return ComplexField(-self.values, self.grid)

    def conj(self):
        return ComplexField(np.conj(self.values), self.grid)

    def norm(self):
        return np.sqrt(inner(self, self).real)


@dataclass(frozen=True, eq=False)
class Potential:
    """Control coefficient b2 with its first and second derivative, all
    sampled on the interior nodes.

    :param b2: real samples of b2
    :type b2: array of float
    :param grad_b2: samples of the derivative of b2
    :type grad_b2: array of float
    :param lap_b2: samples of the second derivative of b2
    :type lap_b2: array of float
    :param grid: grid of the samples
    :type grid: SpatialGrid
    """
    b2: np.ndarray
    grad_b2: np.ndarray
    lap_b2: np.ndarray
    grid: SpatialGrid
    name: str = dc_field(default='custom')

    def __post_init__(self):
        for key in 'b2', 'grad_b2', 'lap_b2':
            values = np.asarray(getattr(self, key))
            if np.iscomplexobj(values):
                if np.any(values.imag != 0):
                    raise TypeError(f'{key} should be real valued')
                values = values.real
            values = values.astype(float)
            if values.shape != (self.grid.n_interior,):
                raise DimensionError(
                    f'{key} has shape {values.shape}, grid needs '
                    f'({self.grid.n_interior},)')
            object.__setattr__(self, key, values)

    @classmethod
    def from_samples(cls, grid, b2, name='custom_samples'):
        """Build a potential from samples only; derivatives by central
        differences with zero ghost values (b2 vanishes on the boundary).
        """
        b2 = np.asarray(b2, dtype=float)
        return cls(b2, _central_difference(b2, grid.h),
                   _laplacian(b2, grid.h), grid, name)

    @classmethod
    def constant(cls, grid, value=0.0):
        n = grid.n_interior
        return cls(np.full(n, float(value)), np.zeros(n), np.zeros(n), grid,
                   'constant')

    @property
    def is_constant(self):
        return bool(np.all(self.grad_b2 == 0) and np.all(self.lap_b2 == 0)
                    and np.ptp(self.b2) == 0)


def check_same_grid(a, b):
    """Raise :class:`DimensionError` if the two grids differ."""
    if a != b:
        raise DimensionError(f'grid mismatch: {a} vs {b}')


# -- raw array kernels (last axis = space) ---------------------------------

def _inner(x, y, h):
    return h * np.sum(x * np.conj(y), axis=-1)


def _laplacian(x, h):
    out = -2.0 * x
    out[..., 1:] += x[..., :-1]
    out[..., :-1] += x[..., 1:]
    return out / h**2


def _central_difference(x, h):
    out = np.zeros_like(x)
    out[..., 1:-1] = x[..., 2:] - x[..., :-2]
    out[..., 0] = x[..., 1]
    out[..., -1] = -x[..., -2]
    return out / (2.0 * h)


def _m1_stencil(pot, x):
    return (-2.0 * pot.grad_b2 * _central_difference(x, pot.grid.h)
            - pot.lap_b2 * x)


def _m1_stencil_adjoint(pot, x):
    # transpose of the real matrix -2 diag(g) D - diag(l), with D^T = -D
    return (2.0 * _central_difference(pot.grad_b2 * x, pot.grid.h)
            - pot.lap_b2 * x)


def _m1_discrete(pot, x):
    h = pot.grid.h
    return pot.b2 * _laplacian(x, h) - _laplacian(pot.b2 * x, h)


def _m1_discrete_adjoint(pot, x):
    # skew-symmetric since Lap_h is symmetric and b2 real
    return -_m1_discrete(pot, x)


def _m1_b2_commutator_discrete(pot, x):
    b2x = -1j * pot.b2 * x
    return _m1_discrete(pot, b2x) + 1j * pot.b2 * _m1_discrete(pot, x)


def commutator_kernels(pot, commutator='discrete'):
    """Raw kernels ``(M, M^H, [M, B2])`` for the chosen form of the
    commutator of the generator with B2.

    :param commutator: ``'discrete'`` for the assembled commutator of the
        discrete operators, ``'stencil'`` for the closed form M1
    :type commutator: str
    :return: three callables acting on arrays (last axis = space)
    :rtype: tuple
    """
    if commutator == 'discrete':
        return (lambda x: _m1_discrete(pot, x),
                lambda x: _m1_discrete_adjoint(pot, x),
                lambda x: _m1_b2_commutator_discrete(pot, x))
    elif commutator == 'stencil':
        return (lambda x: _m1_stencil(pot, x),
                lambda x: _m1_stencil_adjoint(pot, x),
                lambda x: 2j * pot.grad_b2**2 * x)
    else:
        raise ValueError("commutator should be 'discrete' or 'stencil'")


# -- operations on ComplexField --------------------------------------------

def inner(x, y):
    """Discrete L2 inner product ``h * sum(x_j * conj(y_j))``, linear in
    the first and antilinear in the second argument.

    :raises DimensionError: if the fields live on different grids
    :rtype: complex
    """
    check_same_grid(x.grid, y.grid)
    return complex(_inner(x.values, y.values, x.grid.h))


def apply_laplacian(x):
    """Three-point Laplacian with Dirichlet ghost values 0.

    :rtype: ComplexField
    """
    return ComplexField(_laplacian(x.values, x.grid.h), x.grid)


def apply_B2hat(pot, x):
    """Multiplication by ``-i b2``."""
    check_same_grid(pot.grid, x.grid)
    return ComplexField(-1j * pot.b2 * x.values, x.grid)


def apply_M1(pot, x):
    """Closed-form commutator ``-2 grad(b2) . grad(x) - x lap(b2)`` with
    central differences for ``grad(x)``."""
    check_same_grid(pot.grid, x.grid)
    return ComplexField(_m1_stencil(pot, x.values), x.grid)


def apply_M1_adjoint(pot, x):
    """Conjugate transpose of the assembled :func:`apply_M1` operator."""
    check_same_grid(pot.grid, x.grid)
    return ComplexField(_m1_stencil_adjoint(pot, x.values), x.grid)


def apply_M1_B2_commutator(pot, x):
    """Closed-form ``[M1, B2] x = 2i |grad(b2)|^2 x``."""
    check_same_grid(pot.grid, x.grid)
    return ComplexField(2j * pot.grad_b2**2 * x.values, x.grid)


def commutator_M1(pot, x):
    """Exact commutator ``A_h B2 - B2 A_h`` of the discrete operators."""
    check_same_grid(pot.grid, x.grid)
    return ComplexField(_m1_discrete(pot, x.values), x.grid)


def commutator_M1_B2(pot, x):
    """Exact ``[M, B2]`` for the discrete commutator ``M``."""
    check_same_grid(pot.grid, x.grid)
    return ComplexField(_m1_b2_commutator_discrete(pot, x.values), x.grid)


def laplacian_matrix(grid):
    """Assembled sparse Dirichlet Laplacian.

    :rtype: scipy.sparse.csr_matrix
    """
    n = grid.n_interior
    main = -2.0 * np.ones(n) / grid.h**2
    off = np.ones(n - 1) / grid.h**2
    return scipy.sparse.diags([off, main, off], offsets=[-1, 0, 1],
                              format='csr')


def B2hat_matrix(pot):
    """Assembled sparse ``-i diag(b2)``."""
    return scipy.sparse.diags(-1j * pot.b2, format='csr')


def generator_matrix(grid):
    """Assembled sparse generator ``A = -i Lap_h``."""
    return -1j * laplacian_matrix(grid)
