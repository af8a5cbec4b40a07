"""Integral-chain, high-gain, nonlinear and hybrid differentiators.

Simulation, equivalence and homogeneity checks, and a sliding-mode
closed-loop application, with compiled kernels when available.
"""
__version__ = "0.1.0"

from ._backend import BACKEND
from .control import (ClosedLoopConfig, ControllerSpec, PlantSpec, closed_loop_simulate,
                      compare_estimators, control_estimated, control_known_bound, loop_metrics,
                      plant_rhs)
from .diffcore import (DifferentiatorSpec, Variant, alpha_schedule, differentiator_rhs,
                       geometric_gains, is_hurwitz, sig)
from .equivalence import (EquivalenceReport, check_gain_constraint, map_highgain_to_chain,
                          verify_equivalence)
from .errors import IntegrationError, ValidationError
from .homogeneity import (DilationWeights, convergence_race, dilation_weights,
                          homogeneity_residual, settling_time, simulate_error_system)
from .metrics import OrderFit, convergence_order, epsilon_sweep, rmse_after, steady_max_error
from .odesim import SimConfig, TimeSeries, integrate, simulate_estimator, step
from .signals import Constant, NoiseSpec, NoiseStream, Polynomial, Sinusoid, SumSignal, sample_noise

__all__ = [
    "BACKEND", "ClosedLoopConfig", "Constant", "ControllerSpec", "DifferentiatorSpec",
    "DilationWeights", "EquivalenceReport", "IntegrationError", "NoiseSpec", "NoiseStream",
    "OrderFit", "PlantSpec", "Polynomial", "SimConfig", "Sinusoid", "SumSignal", "TimeSeries",
    "ValidationError", "Variant", "alpha_schedule", "check_gain_constraint", "closed_loop_simulate",
    "compare_estimators", "control_estimated", "control_known_bound", "convergence_order",
    "convergence_race", "differentiator_rhs", "dilation_weights", "epsilon_sweep",
    "geometric_gains", "homogeneity_residual", "integrate", "is_hurwitz", "loop_metrics",
    "map_highgain_to_chain", "plant_rhs", "rmse_after", "sample_noise", "settling_time", "sig",
    "simulate_error_system", "simulate_estimator", "steady_max_error", "step",
    "verify_equivalence",
]
