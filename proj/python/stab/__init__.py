"""Python access to the stab sample-and-hold stabilization library."""

from ._core import (
    ConfigError,
    NumericError,
    endi_clf,
    endi_dynamics,
    f_tilde,
    generate_initials,
    infc_prox,
    kappa_lambda,
    run_sweep,
    simulate,
    table1_envelope,
)

__all__ = [
    "ConfigError",
    "NumericError",
    "endi_clf",
    "endi_dynamics",
    "f_tilde",
    "generate_initials",
    "infc_prox",
    "kappa_lambda",
    "run_sweep",
    "simulate",
    "table1_envelope",
]
