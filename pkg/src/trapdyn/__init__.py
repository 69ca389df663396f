"""Desk-scale computational dynamics toolkit.

Subpackages cover exact counting for hyperbolic toral automorphisms,
shadowing-based semiconjugacies, trapping-quotient fiber probes, and an
explicit plane diffeomorphism with a cellular quotient onto the homothety
x/2.
"""

from trapdyn.linalg import (
    ToralAutomorphism,
    SpectrumSplit,
    PeriodicCountTable,
    is_hyperbolic,
    periodic_count,
    enumerate_fixed_points,
    entropy,
    growth_bounds,
    lefschetz_number,
)

__all__ = [
    "ToralAutomorphism",
    "SpectrumSplit",
    "PeriodicCountTable",
    "is_hyperbolic",
    "periodic_count",
    "enumerate_fixed_points",
    "entropy",
    "growth_bounds",
    "lefschetz_number",
]

__version__ = "0.1.0"
