"""
AbstractSolution.py: Abstract class for the artifacts written by a command
"""
from abc import ABC, abstractmethod


class AbstractSolution(ABC):
    @property
    @abstractmethod
    def get_solution(self):
        """Returns the tables that make up the written artifacts

        :raises NotImplementedError: Must be implemented by subclass
        """
        raise NotImplementedError("Abstract method")

    @abstractmethod
    def output(self, dir_path):
        """Writes the artifacts into ``dir_path``

        :raises NotImplementedError: Must be implemented by subclass
        """
        raise NotImplementedError("Abstract method")
