"""Resolvent kernels of the discrete Laplacian on Z^d and of the
ultra-hyperbolic model operator on R^d, their threshold branching
decompositions, and executable verification suites."""

from .continuum import (
    BranchingDecomposition,
    Signature,
    continuum_branching,
    continuum_kernel,
    decompose_continuum,
)
from .estimators import ContinuumResolvent, LatticeResolvent
from .exceptions import (
    AccuracyError,
    AliasingError,
    ConfigError,
    ConvergenceError,
    DomainError,
    NonFiniteIntegrandError,
    PoleError,
    ResolventError,
)
from .lattice import (
    KernelSample,
    SignPattern,
    ThresholdContext,
    E_l,
    E_sum,
    decompose_lattice,
    lattice_branching,
    lattice_kernel,
)
from .quadrature import ArcContour, ExtrapolationLadder, TorusGrid
from .specfun import DEFAULT_CONTROL, SeriesControl
from .verify import CheckReport, RayLimitReport, boundary_jump_test, ray_limit_test, run_identity_suite

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "AliasingError",
    "ArcContour",
    "BranchingDecomposition",
    "CheckReport",
    "ConfigError",
    "ContinuumResolvent",
    "ConvergenceError",
    "DEFAULT_CONTROL",
    "DomainError",
    "E_l",
    "E_sum",
    "ExtrapolationLadder",
    "KernelSample",
    "LatticeResolvent",
    "NonFiniteIntegrandError",
    "PoleError",
    "RayLimitReport",
    "ResolventError",
    "SeriesControl",
    "SignPattern",
    "Signature",
    "ThresholdContext",
    "TorusGrid",
    "boundary_jump_test",
    "continuum_branching",
    "continuum_kernel",
    "decompose_continuum",
    "decompose_lattice",
    "lattice_branching",
    "lattice_kernel",
    "ray_limit_test",
    "run_identity_suite",
]
