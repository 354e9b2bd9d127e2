"""Canonical pairs of a two-transverse-mode degenerate optical parametric oscillator.

Classical Poisson brackets by Wirtinger forward-mode differentiation,
truncated Fock-space commutators, and the orthogonal-LO squeezing spectrum.
"""

from .wirtinger import (
    DomainError,
    ModePoint,
    WirtingerDual,
    evaluate,
    finite_difference_partials,
    lift_point,
    poisson_bracket,
)
from .classical import (
    FULL_ANGLE,
    HALF_ANGLE,
    OrientationConvention,
    SteadyState,
    orientation,
    rotating_quadrature,
    steady_state,
)
from .spectrum import SpectrumParams, squeezing_spectrum

__version__ = "0.1.0"
