"""Symbol calculus, kernel expansions and wavelet experiments for RPA-type pair amplitudes."""

from .angular import AngularExpansion, AngularIndex, Parity, eval_sph_harm, gaunt_expand, solid_harmonic_decompose
from .diagrams import Diagram, classify, classify_by_symbol_propagation, iterate, parse_diagram
from .errors import (
    ArityError,
    ConstraintError,
    DiagramSyntaxError,
    DomainError,
    NumericError,
    ResourceError,
    SymcalcError,
    TruncationError,
)
from .kernels import KernelExpansion, KernelTerm, kernel_from_symbol, oscillatory_oracle, symbol_from_kernel_term
from .mellin import CuspModel, cusp_coefficient, log_free_verdict
from .symbols import ClassicalSymbol, HomogeneousTerm, XFunction, leibniz_product
from .wavelets import analyze, besov_threshold, best_n_term, coefficient_bound_check

__version__ = "0.1.0"

__all__ = [
    "AngularExpansion", "AngularIndex", "Parity", "eval_sph_harm", "gaunt_expand", "solid_harmonic_decompose",
    "Diagram", "classify", "classify_by_symbol_propagation", "iterate", "parse_diagram",
    "ArityError", "ConstraintError", "DiagramSyntaxError", "DomainError", "NumericError",
    "ResourceError", "SymcalcError", "TruncationError",
    "KernelExpansion", "KernelTerm", "kernel_from_symbol", "oscillatory_oracle", "symbol_from_kernel_term",
    "CuspModel", "cusp_coefficient", "log_free_verdict",
    "ClassicalSymbol", "HomogeneousTerm", "XFunction", "leibniz_product",
    "analyze", "besov_threshold", "best_n_term", "coefficient_bound_check",
]
