"""Python bindings for the flexarm simulation and analysis core."""

from ._flexarm import (
    CertificateError,
    ConfigError,
    Error,
    GainError,
    NumericalError,
    UnboundedControlError,
    analyze,
    gain_certificate,
    grad_hamiltonian,
    hamiltonian,
    hessian_certificate,
    is_hurwitz,
    linearization,
    list_scenarios,
    mass_matrix,
    saturation_bound,
    scenario_json,
    simulate,
)

__all__ = [
    "CertificateError",
    "ConfigError",
    "Error",
    "GainError",
    "NumericalError",
    "UnboundedControlError",
    "analyze",
    "gain_certificate",
    "grad_hamiltonian",
    "hamiltonian",
    "hessian_certificate",
    "is_hurwitz",
    "linearization",
    "list_scenarios",
    "mass_matrix",
    "saturation_bound",
    "scenario_json",
    "simulate",
]
