"""Count outcomes on interaction networks.

Equilibrium computation, simulation, nested pseudo-likelihood estimation and
dyadic link regression, backed by the C++ core.
"""

from countnet._core import (
    NumericalError,
    ValidationError,
    choice_probabilities,
    cut_points,
    dyadic_logit,
    equilibrium,
    fit,
    peer_effect_bound,
    sieve,
    simulate,
)

__all__ = [
    "NumericalError",
    "ValidationError",
    "choice_probabilities",
    "cut_points",
    "dyadic_logit",
    "equilibrium",
    "fit",
    "peer_effect_bound",
    "sieve",
    "simulate",
]

__version__ = "0.1.0"
