"""
AbstractPropagator.py: Abstract class for time propagation of the
controlled Schroedinger equation and its variations
"""
from abc import ABC, abstractmethod


class AbstractPropagator(ABC):
    @abstractmethod
    def solve(self):
        """ Propagates the equation over the whole time grid

        :raises NotImplementedError:  Must be implemented by subclasses.
        """
        raise NotImplementedError("Abstract method")
