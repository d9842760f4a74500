from __future__ import absolute_import

__version__ = '0.1.0'

from .core import (RealEnsembleError, ConfigurationError, IntegrationError,
                   NormalizationError, DomainError)
from .hamiltonian import (CouplingMatrix, PauliCoefficients,
                          pauli_to_coupling, qm_reference_evolution)
from .kernels import (FlatKernel, CosineKernel, SpikedKernel,
                      TabulatedKernel, parse_kernel, validate_kernel,
                      kernel_curvature)
from .ensemble import EnsembleState, EvolutionLaw
from .integrate import IntegratorControls, Trajectory, evolve
from .diagnostics import analyze, classify_convergence
from .experiments import ExperimentConfig, run_experiment, reproduce
