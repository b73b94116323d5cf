"""Closed-form propagation and pulse design for Gaussian wave packets in quadratic traps."""

__version__ = "0.1.0"

from .core import GaussianState, ComplexLinewidth, ground_state, make_gaussian, overlap
from .errors import (ConstraintError, DomainError, GwpackError, InfeasibleError, NumericError,
                     SingularityError, VerificationError)
from .evolve import apply, evolve_schedule, flow_map
from .propagators import (Free, ForcedHarmonic, ForceSpec, GeneralQuadratic, Harmonic,
                          InverseFree, InverseHarmonic, QuadraticPropagator, compose,
                          compose_all, free, harmonic, inverse_free_direct,
                          inverse_free_sandwich)
