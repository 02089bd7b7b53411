"""Information dynamics of noisy observation: classical Bayes updates,
their quantum counterpart, continuous monitoring and plant-scale scenarios."""

__version__ = "0.1.0"

from .errors import (
    DimensionMismatch,
    FitFailure,
    InfodynError,
    InvalidParameter,
    NegativeBits,
    NonConverged,
    NumericalFailure,
    PhasePresent,
    QuadratureFailure,
    StabilityViolation,
    ZeroMarginal,
)
from .plant import CircularScenario, InfoLedger, landauer_update, run_cuscuta, run_heliotropism
from .quantum import (
    DensityMatrix,
    QuantumSystem,
    StateVector,
    averaged_density_analytic,
    averaged_density_mc,
    decoherence_factor,
    single_shot_update,
    von_neumann_entropy,
)
from .signal import NoiseDensity, Observation, Posterior, SignalModel, mutual_information, posterior
from .unravel import DynamicsSpec, collapse_statistics, run_ensemble, simulate_trajectory, step

__all__ = [name for name in dir() if not name.startswith("_")]
