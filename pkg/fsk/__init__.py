"""
fuzzyspherekit - Fuzzy Sphere Operator Algebras
===============================================

Finite-dimensional algebras A_Lambda of observables on the spaces H_Lambda
of spherical harmonics up to degree Lambda, built from trace-free symmetric
projectors, with checks of their relations, of the so(D+1) isomorphism, of
strong convergence and of the confined-shell radial spectrum.

Version: 0.3.0
License: MIT
"""

__version__ = "0.3.0"
__license__ = "MIT"

from .algebra import FuzzyAlgebra, default_k
from .core import FuzzySphereKit, RunConfig
from .embedding import EmbeddedIrrep, build_embedded_irrep
from .errors import ConfigError, ConvergenceError, FskError, InconsistencyError, TensorBudgetError
from .logger import RunLedger

__all__ = [
    'FuzzyAlgebra',
    'FuzzySphereKit',
    'RunConfig',
    'RunLedger',
    'EmbeddedIrrep',
    'build_embedded_irrep',
    'default_k',
    'FskError',
    'ConfigError',
    'TensorBudgetError',
    'InconsistencyError',
    'ConvergenceError',
]
