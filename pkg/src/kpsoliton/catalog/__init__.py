"""Registry of the published symmetries, conservation laws and first integrals."""

from .registry import (
    ANY_P, ERRATUM_SUFFIX, P_EQ_1, ConsLaw, Registry, SymmetryGenerator,
    p_condition_holds, registry,
)
from .travelling import (
    ExplicitCoordinateError, FirstIntegralPair, derive_first_integrals,
    first_integral_residuals, ode_residual, published_first_integrals,
    published_separable_ode, reduce_to_first_integral, reduced_equation,
    scaling_weights, separable_ode_residual, travelling_wave,
)
from .verification import (
    KNOWN_QUARANTINE, EntryReport, VerificationReport, check_conslaw, check_generator,
    constant_ratio, verify_all, verify_user_entry,
)

__all__ = [
    "ANY_P", "ERRATUM_SUFFIX", "P_EQ_1", "ConsLaw", "EntryReport", "ExplicitCoordinateError",
    "FirstIntegralPair", "KNOWN_QUARANTINE", "Registry", "SymmetryGenerator",
    "VerificationReport", "check_conslaw", "check_generator", "constant_ratio",
    "derive_first_integrals", "first_integral_residuals", "ode_residual",
    "p_condition_holds", "published_first_integrals", "published_separable_ode",
    "reduce_to_first_integral", "reduced_equation", "registry", "scaling_weights",
    "separable_ode_residual", "travelling_wave", "verify_all", "verify_user_entry",
]
