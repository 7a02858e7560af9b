"""Certified exponential stability of 2D linear parabolic PDEs.

Synthesizes polynomial Lyapunov functionals V(u) = int s(x) u^2 dx for
    u_t = a u_x1x1 + b u_x1x2 + c u_x2x2 + d u_x1 + e u_x2 + f u
on the unit square with zero Dirichlet conditions, by compiling
sum-of-squares identities to semidefinite programs solved by an embedded
interior-point method, and validates the certified decay bounds against a
finite-difference simulation.
"""

__version__ = "1.0.0"

from .pde import (InitialCondition, ModelError, ParabolicPde2D,
                  default_bump_u0, kiss_model, load_model, save_model)
from .poly import (ParseError, Polynomial, PolyMatrix3, extrema_on_box,
                   format_polynomial, monomial_basis, parse_polynomial)
from .sos import (Certificate, DegreeProfile, SosError, load_certificate,
                  save_certificate, solve_identities, verify_certificate)
from .search import (BisectionConfig, SearchError, SearchRecord,
                     StabilityVerdict, check_stability, decay_bound,
                     find_gamma, find_hcr)
from .fd import (FdError, SimConfig, SimResult, estimate_decay_rate,
                 simulate)

__all__ = [
    "BisectionConfig", "Certificate", "DegreeProfile", "FdError",
    "InitialCondition", "ModelError", "ParabolicPde2D", "ParseError",
    "Polynomial", "PolyMatrix3", "SearchError", "SearchRecord", "SimConfig",
    "SimResult", "SosError", "StabilityVerdict", "check_stability",
    "decay_bound", "default_bump_u0", "estimate_decay_rate",
    "extrema_on_box", "find_gamma", "find_hcr", "format_polynomial",
    "kiss_model", "load_certificate", "load_model", "monomial_basis",
    "parse_polynomial", "save_certificate", "save_model", "simulate",
    "solve_identities", "verify_certificate",
]
