"""sqcontrol is a numerical toolkit for the optimal control of the bilinear
Schroedinger equation

    i psi' = -Lap psi + u(t) b2(x) psi + i f,   u_m <= u(t) <= u_M.

It contains a Crank-Nicolson state solver, the exact discrete costate and
reduced gradient, a projected gradient method, the Goh transformed second
order quantities, and the checks of first and second order optimality
conditions behind a command line interface.

"""
# Import version info
from .version_info import VERSION_INT, VERSION  # noqa

# Import errors
from .errors import (  # noqa
    SQControlError,
    DimensionError,
    NumericalError,
    DivergenceError,
    StructureError,
    LineSearchError,
    ConfigError,
    ControlFileError,
)

# Import main classes and functions
from .field import SpatialGrid, ComplexField, Potential  # noqa
from .dynamics import TimeGrid, Control, SourceTerm, Trajectory  # noqa
from .dynamics import propagate_forward, propagate_linearized  # noqa
from .adjoint import propagate_costate, ibp_residual  # noqa
from .objective import (  # noqa
    ProblemSpec,
    cost,
    evaluate_cost,
    reduced_gradient,
    switching_function,
)
from .optimizer import SolverOptions, SolveResult, solve, multistart  # noqa
from .second_order import (  # noqa
    GohDirection,
    quad_form_Q,
    quad_form_Qhat,
    goh_identity_check,
    probe_pc2,
)
from .analysis import AnalysisOptions, detect_arcs, full_report  # noqa
from .protocol import Protocol  # noqa
from .solution import SolveOutput, VerifyOutput  # noqa
