"""errors.py: exception hierarchy of sqcontrol.

Every error raised on purpose by the package derives from
:class:`SQControlError`. The command line maps the subclasses onto exit
codes (see :mod:`sqcontrol.cli`).
"""


class SQControlError(Exception):
    """Base class of all sqcontrol errors."""


class DimensionError(SQControlError, ValueError):
    """Grid or length mismatch between fields, controls or trajectories."""


class NumericalError(SQControlError, ArithmeticError):
    """Singular pivot or a linear solve whose residual is above tolerance."""


class DivergenceError(NumericalError):
    """NaN or Inf appeared in a state, costate or cost value."""


class StructureError(SQControlError):
    """No time interval of the control could be classified."""


class LineSearchError(SQControlError):
    """Every start of a multistart run ended in a line-search failure."""


class ConfigError(SQControlError, ValueError):
    """Invalid run configuration.

    :param message: human readable description
    :type message: str
    :param key: dotted path of the offending key, if any
    :type key: str, optional
    :param line: line of a JSON syntax error, if any
    :type line: int, optional
    :param column: column of a JSON syntax error, if any
    :type column: int, optional
    """
    def __init__(self, message, key=None, line=None, column=None):
        self.key = key
        self.line = line
        self.column = column
        where = []
        if key is not None:
            where.append(f'key {key!r}')
        if line is not None:
            where.append(f'line {line}, column {column}')
        if where:
            message = f'{message} ({"; ".join(where)})'
        super().__init__(message)


class ControlFileError(SQControlError, ValueError):
    """Control file that cannot be read or does not fit the problem."""
