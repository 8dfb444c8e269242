"""finiteqm: finite-dimensional quantum mechanics at desk scale.

Truncated Dirac formalism, the finite-dimensional CCR obstruction,
particle-in-a-box spectra, time-sliced propagator amplitudes, and the
Gaussian-norm precision experiment, with a reproducible experiment CLI.
"""

__version__ = "0.1.0"

from .errors import (CausticError, ConfigError, DimensionMismatchError, DomainError,
                     FiniteQMError, NodeCapError, NumericalError)
from .hilbert import (OperatorMatrix, StateVector, TruncationSplit, apply, basis_state,
                      commutator, frobenius_norm, identity_operator, inner_product,
                      trace, truncation_split)
from .ccr import (CcrReport, CcrScheme, build_grid_pair, build_ladder_pair, build_pair,
                  ccr_lower_bound, ccr_report, minimize_deviation)
from .box import (BoxState, BoxSystem, energy, energy_trace_closed_form, eval_wavefunction,
                  hamiltonian_matrix, parseval_check, probabilities, revival_time,
                  spectral_evolve)
from .propagator import (Configuration, Grid, PotentialSpec, PropagatorRequest,
                         PropagatorResult, action, analytic_free_propagator,
                         analytic_harmonic_propagator, convergence_scan,
                         default_half_width, identity_resolution_check, sliced_amplitude)
from .gaussian import (GaussianNormScan, GaussianNormValue, PrecisionReport,
                       TrichotomyResult, gaussian_norm_analytic, gaussian_norm_quadrature,
                       limit_trichotomy, precision_requirement)

__all__ = [name for name in dir() if not name.startswith("_")]
