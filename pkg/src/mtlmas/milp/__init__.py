from .model import (BINARY, CONTINUOUS, EQ, FEAS_TOL, GE, LE, MilpError,
                    MilpModel, MilpSolution, Status)
from .encode import (AtomBinder, DynamicsHandles, EPS_STRICT,
                     add_l1_objective, encode_dynamics, encode_formula)
from .bnb import solve
from .solvers import (BranchAndBoundSolver, HighsSolver, highs_available,
                      make_solver)
from .lpformat import export_lp, write_lp
from .simplex import KERNEL, solve_lp

__all__ = [
    "BINARY", "CONTINUOUS", "EQ", "FEAS_TOL", "GE", "LE", "MilpError",
    "MilpModel", "MilpSolution", "Status", "AtomBinder", "DynamicsHandles",
    "EPS_STRICT", "add_l1_objective", "encode_dynamics", "encode_formula",
    "solve", "BranchAndBoundSolver", "HighsSolver", "highs_available",
    "make_solver", "export_lp", "write_lp", "KERNEL", "solve_lp",
]
