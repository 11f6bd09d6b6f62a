"""Closed-form profiles for the coefficient b2, the initial and desired
states and the source f. Configs refer to them by key; the ``select_*``
functions map a key to the function building the profile.

Every builder takes the grid(s) first and its parameters as keywords, so
the keywords a config may give are exactly the builder's keyword
arguments.
"""

import logging

import numpy as np
import scipy.linalg

from .dynamics import SourceTerm
from .field import ComplexField, Potential

logger = logging.getLogger(__name__)


def select_potential(key):
    """Function to select the b2 profile specified by key in the config.

    :param key: ['bump', 'sine', 'constant', 'zero', 'custom_samples']
    :type key: str
    :raises KeyError: key does not point to a profile
    :return: builder ``f(grid, **params) -> Potential``
    :rtype: function
    """
    return _select(key, POTENTIALS, 'b2')


def select_state(key):
    """Function to select a state profile (psi0, or psi_dT other than
    'terminal_of_running').

    :param key: ['ground_state', 'gaussian', 'custom', 'zero']
    :type key: str
    :return: builder ``f(grid, **params) -> ComplexField``
    :rtype: function
    """
    return _select(key, STATES, 'state')


def select_target(key):
    """Function to select the desired running state psi_d.

    :param key: ['ground_state', 'static', 'zero']
    :type key: str
    :return: builder ``f(grid, tgrid, **params) -> SourceTerm``
    :rtype: function
    """
    return _select(key, TARGETS, 'psi_d')


def select_source(key):
    """Function to select the source f.

    :param key: ['zero', 'gaussian_pulse', 'static']
    :type key: str
    :return: builder ``f(grid, tgrid, **params) -> SourceTerm``
    :rtype: function
    """
    return _select(key, SOURCES, 'f')


def _select(key, table, what):
    try:
        return table[key]
    except KeyError:
        raise KeyError(f'unknown {what} profile {key!r}, expected one of '
                       f'{sorted(table)}') from None


def _unit(grid):
    # coordinate mapped onto (0, 1)
    return (grid.nodes - grid.x_lo) / grid.length


# -- b2 ---------------------------------------------------------------------

def bump_potential(grid, c=16.0):
    """``c s^2 (1 - s)^2`` with ``s = (x - x_lo) / L``; b2 and its first
    derivative vanish on the boundary. Derivatives are exact.
    """
    s, L = _unit(grid), grid.length
    b2 = c * s**2 * (1 - s)**2
    grad = 2 * c * s * (1 - s) * (1 - 2 * s) / L
    lap = 2 * c * (1 - 6 * s + 6 * s**2) / L**2
    return Potential(b2, grad, lap, grid, 'bump')


def sine_potential(grid, c=1.0):
    """``c sin(pi s)``. Its derivative does not vanish on the boundary."""
    logger.warning('b2 profile "sine" has a nonzero derivative on the '
                   'boundary; use it for experiments only')
    s, L = _unit(grid), grid.length
    k = np.pi / L
    return Potential(c * np.sin(np.pi * s), c * k * np.cos(np.pi * s),
                     -c * k**2 * np.sin(np.pi * s), grid, 'sine')


def constant_potential(grid, value=1.0):
    return Potential.constant(grid, value)


def zero_potential(grid):
    return Potential.constant(grid, 0.0)


def sampled_potential(grid, samples):
    """b2 from interior samples, derivatives by central differences."""
    samples = np.asarray(samples, dtype=float)
    return Potential.from_samples(grid, samples)


POTENTIALS = {
    'bump': bump_potential,
    'sine': sine_potential,
    'constant': constant_potential,
    'zero': zero_potential,
    'custom_samples': sampled_potential,
}


# -- states -----------------------------------------------------------------

def _dirichlet_eigenpair(grid):
    n = grid.n_interior
    diag = np.full(n, 2.0 / grid.h**2)
    off = np.full(n - 1, -1.0 / grid.h**2)
    energy, vector = scipy.linalg.eigh_tridiagonal(
        diag, off, select='i', select_range=(0, 0))
    vector = vector[:, 0]
    if vector[np.argmax(np.abs(vector))] < 0:
        vector = -vector
    return float(energy[0]), vector


def ground_energy(grid):
    """Smallest eigenvalue of ``-Lap_h``."""
    return _dirichlet_eigenpair(grid)[0]


def _normalized(values, grid):
    field = ComplexField(values, grid)
    norm = field.norm()
    if norm == 0:
        raise ValueError('state profile vanishes on the grid')
    return ComplexField(values / norm, grid)


def ground_state(grid, phase=0.0):
    """Normalized first eigenvector of the discrete Dirichlet Laplacian
    times ``exp(-i phase)``."""
    _, vector = _dirichlet_eigenpair(grid)
    return _normalized(np.exp(-1j * phase) * vector, grid)


def gaussian_state(grid, center=None, width=0.1, wavenumber=0.0):
    """Normalized ``exp(-(x - center)^2 / (2 width^2) + i k x)``."""
    if center is None:
        center = grid.x_lo + 0.5 * grid.length
    if not width > 0:
        raise ValueError('width should be positive')
    x = grid.nodes
    values = np.exp(-(x - center)**2 / (2 * width**2) + 1j * wavenumber * x)
    return _normalized(values, grid)


def custom_state(grid, re, im=None):
    values = np.asarray(re, dtype=float) + 0j
    if im is not None:
        values = values + 1j * np.asarray(im, dtype=float)
    return ComplexField(values, grid)


def zero_state(grid):
    return grid.zeros()


STATES = {
    'ground_state': ground_state,
    'gaussian': gaussian_state,
    'custom': custom_state,
    'zero': zero_state,
}


# -- desired running state ----------------------------------------------------

def rotating_ground_state(grid, tgrid, phase=0.0, frequency=0.0):
    """``exp(-i (E1 t + frequency t + phase)) phi1`` on the time nodes.

    With ``frequency = phase = 0`` this is the free evolution of the
    ground state phi1 with energy E1.
    """
    energy, _ = _dirichlet_eigenpair(grid)
    phi = ground_state(grid).values
    t = tgrid.nodes
    rotation = np.exp(-1j * ((energy + frequency) * t + phase))
    return SourceTerm.sampled(rotation[:, None] * phi, 'nodes')


def static_target(grid, tgrid, state=None):
    """Time-independent target given by a state profile dict."""
    state = dict(state or {'kind': 'ground_state'})
    builder = select_state(state.pop('kind'))
    return SourceTerm.static(builder(grid, **state))


def zero_target(grid, tgrid):
    return SourceTerm.zero()


TARGETS = {
    'ground_state': rotating_ground_state,
    'static': static_target,
    'zero': zero_target,
}


# -- source f -----------------------------------------------------------------

def zero_source(grid, tgrid):
    return SourceTerm.zero()


def gaussian_pulse(grid, tgrid, amplitude=1.0, center=None, width=0.1):
    """``amplitude exp(-(x - center)^2 / (2 width^2)) sin(pi t / T)`` on the
    interval midpoints."""
    if center is None:
        center = grid.x_lo + 0.5 * grid.length
    x = grid.nodes
    shape = np.exp(-(x - center)**2 / (2 * width**2))
    envelope = np.sin(np.pi * tgrid.midpoints / tgrid.T)
    return SourceTerm.sampled(amplitude * envelope[:, None] * shape,
                              'midpoints')


def static_source(grid, tgrid, state=None, amplitude=1.0):
    state = dict(state or {'kind': 'ground_state'})
    builder = select_state(state.pop('kind'))
    return SourceTerm.static(amplitude * builder(grid, **state))


SOURCES = {
    'zero': zero_source,
    'gaussian_pulse': gaussian_pulse,
    'static': static_source,
}
