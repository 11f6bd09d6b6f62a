"""
AbstractProtocol.py: Abstract class for the run configuration of an optimal
control problem
"""
from abc import ABC, abstractmethod


class AbstractProtocol(ABC):
    @abstractmethod
    def generate_problem(self):
        """Generates the optimal control problem from the input arguments
        that define the run protocol.

        :raises NotImplementedError: Must be implemented by subclasses.
        """
        raise NotImplementedError("Abstract method")
