"""Resolvent diagnostics and a pseudospectral gKdV solver on the torus."""

from ._kdvlab import (
    KdvlabError,
    alpha,
    bottom_roundtrip_error,
    commutator_norm,
    commutator_scaling_audit,
    config_hash,
    coordinates,
    derivative,
    gaussian,
    greens_diagonal,
    hs_identity_error,
    local_mass,
    ls_norm,
    microlaw_residual,
    random_bandlimited,
    rho_alpha,
    run_experiment,
    sech2_bottom,
    series_contraction_bound,
    sobolev_kappa_norm,
    soliton,
    solve_kdv,
    synth_coefficients,
    validate_config,
    wavenumbers,
)

__all__ = [
    "KdvlabError",
    "alpha",
    "bottom_roundtrip_error",
    "commutator_norm",
    "commutator_scaling_audit",
    "config_hash",
    "coordinates",
    "derivative",
    "gaussian",
    "greens_diagonal",
    "hs_identity_error",
    "local_mass",
    "ls_norm",
    "microlaw_residual",
    "random_bandlimited",
    "rho_alpha",
    "run_experiment",
    "sech2_bottom",
    "series_contraction_bound",
    "sobolev_kappa_norm",
    "soliton",
    "solve_kdv",
    "synth_coefficients",
    "validate_config",
    "wavenumbers",
]
