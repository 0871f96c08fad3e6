"""Spectral measures of self-adjoint extensions of the q-oscillator position operator.

The Jacobi matrix with zero diagonal and off-diagonal b_n = sqrt([n+1]_q)
is indeterminate for q != 1, so its self-adjoint extensions form a
one-parameter family.  This package evaluates the entire functions that
describe the family, the Weyl circle at z = i, and the atomic extremal
measures, and checks all of it against a finite-matrix oracle.
"""

from .measure import (
    Atom,
    AtomicMeasure,
    SupportFunction,
    auto_window,
    build_measure,
    christoffel_mass,
    find_support,
    mass_general,
    mass_sigma0,
    mass_sigma_pi,
    measure_from_t,
    support_function,
    verify_measure,
)
from .oracle import QuadratureRule, TruncatedMatrix, compare_measures, eigen_quadrature, moments_exact, truncate
from .polynomials import CoeffTable, JacobiBasis, PolyPair, classify, coeff_table, eval_pq, pq_table
from .qkernel import QParam, q_double_factorial, q_factorial, q_number
from .series import NonConvergenceError, SeriesContext, SeriesValue, a_general, a_limit, master_identity, phi, psi
from .weyl import (
    ExtensionParam,
    NevanlinnaFns,
    WeylDisk,
    m_at_i,
    m_of_z,
    nevanlinna_matrix,
    phi0_from_t,
    t_from_phi0,
    weyl_disk,
)

__version__ = "0.1.0"

__all__ = [
    "Atom", "AtomicMeasure", "CoeffTable", "ExtensionParam", "JacobiBasis", "NevanlinnaFns",
    "NonConvergenceError", "PolyPair", "QParam", "QuadratureRule", "SeriesContext", "SeriesValue",
    "SupportFunction", "TruncatedMatrix", "WeylDisk", "a_general", "a_limit", "auto_window",
    "build_measure", "christoffel_mass", "classify", "coeff_table", "compare_measures",
    "eigen_quadrature", "eval_pq", "find_support", "m_at_i", "m_of_z", "mass_general", "mass_sigma0",
    "mass_sigma_pi", "master_identity", "measure_from_t", "moments_exact", "nevanlinna_matrix",
    "phi", "phi0_from_t", "pq_table", "psi", "q_double_factorial", "q_factorial", "q_number",
    "support_function", "t_from_phi0", "truncate", "verify_measure", "weyl_disk",
]
