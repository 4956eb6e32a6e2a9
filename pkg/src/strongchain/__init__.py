"""Equilibria and damped dynamics of a 1D chain with singular nearest-neighbour repulsion."""
from .analysis import (
    GapProfile,
    TheoremReport,
    check_theorem1,
    check_theorem2,
    continuum_study,
    find_N0,
    gap_profile,
)
from .dynamics import ChainState, TrajectoryRecord, distance, net_force, simulate, step, total_energy
from .estimator import ChainEquilibrium
from .exceptions import (
    ChainError,
    ConvergenceError,
    DomainError,
    HypothesisViolation,
    NoSolutionError,
    RangeError,
    StiffnessError,
)
from .fixedpoint import (
    FixedPointResult,
    ShootResult,
    degenerate_three_body_field,
    interior_branch,
    oracle_minimize,
    propagate,
    residual,
    shoot_solve,
    zero_force_solution,
)
from .model import AffineField, ChainParams, ConstantField, ForceField, PiecewiseLinearField, reflect_field
from .potential import PowerLaw, TabulatedLaw, force_pair, inverse_force, pair_potential

__version__ = "0.1.0"
