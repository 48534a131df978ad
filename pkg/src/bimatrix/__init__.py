"""Numerical toolkit for the Hermitian two-matrix model.

Biorthogonal polynomials and their banded recurrence operators, kernels
and sampling, the associated differential systems, unitary-group
integrals, the large-N spectral curve and wave-function asymptotics.
"""

from . import (asymptotics, biortho, diffsys, errors, group_integrals, kernels, laurent,
               loop, model, operators, precision, quadrature)
from .biortho import BiorthogonalFamily, build_family, orthogonalize
from .errors import BimatrixError
from .model import ModelSpec, Potential, gaussian_model, load_model, quartic_model, validate_model
from .operators import build_Q_P
from .quadrature import bimoment_matrix

__version__ = "0.1.0"

__all__ = [
    "asymptotics", "biortho", "diffsys", "errors", "group_integrals", "kernels", "laurent",
    "loop", "model", "operators", "precision", "quadrature",
    "BiorthogonalFamily", "BimatrixError", "ModelSpec", "Potential",
    "bimoment_matrix", "build_Q_P", "build_family", "gaussian_model", "load_model",
    "orthogonalize", "quartic_model", "validate_model",
]
