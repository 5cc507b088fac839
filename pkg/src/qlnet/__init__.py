"""Translation-invariant networks of linear quantum stochastic systems.

Models rings and tori of identical open quantum harmonic oscillator
blocks with nearest-neighbour field coupling, verifies that the governing
equations are physically realizable, and computes steady mean-square cost
per site for finite fragments and in the thermodynamic limit.
"""

from . import cmatrix, errors, frequency, generators, network, performance, realizability, simulate
from .network import AxisCoupling, BlockParams, FragmentSpec, assemble_chain_generator, dft_matrix, validate
from .frequency import LaurentTable, ModeMatrices, aps_table, coupling_matrix, laurent_coeffs, mode_matrices, roots_of_unity
from .realizability import PRReport, ThetaFit, check_pr_algebraic, check_pr_frequency, commutator_flow, solve_theta
from .performance import CostResult, StabilityReport, WeightSequence, check_stability, cost_limit, fejer_truncation, finite_cost, spatial_covariance, steady_covariance, weight_spectrum
from .simulate import FullChainMoments, MomentTrajectory, fullchain_moments, integrate_moments

__version__ = "0.1.0"

__all__ = [
    "AxisCoupling",
    "BlockParams",
    "FragmentSpec",
    "validate",
    "assemble_chain_generator",
    "dft_matrix",
    "ModeMatrices",
    "LaurentTable",
    "roots_of_unity",
    "coupling_matrix",
    "mode_matrices",
    "laurent_coeffs",
    "aps_table",
    "PRReport",
    "ThetaFit",
    "check_pr_frequency",
    "check_pr_algebraic",
    "solve_theta",
    "commutator_flow",
    "WeightSequence",
    "StabilityReport",
    "CostResult",
    "weight_spectrum",
    "fejer_truncation",
    "check_stability",
    "steady_covariance",
    "finite_cost",
    "cost_limit",
    "spatial_covariance",
    "MomentTrajectory",
    "FullChainMoments",
    "integrate_moments",
    "fullchain_moments",
    "cmatrix",
    "errors",
    "frequency",
    "network",
    "generators",
    "realizability",
    "performance",
    "simulate",
]
