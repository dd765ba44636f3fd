"""Bayesian unmixing of hyperspectral images with spectral variability.

Thin Python layer over the C++ core. Arrays follow the C++ layout:
reflectance is bands x pixels, abundances are endmembers x pixels.
"""

from ._core import (
    ConfigError,
    DomainError,
    IoError,
    NumericError,
    align_endmembers,
    armse_abundance,
    classification_accuracy,
    endmember_errors,
    extract_endmembers,
    generate_scene,
    load_cube,
    reconstruction_errors,
    sample_potts_field,
    save_cube,
    simplex_to_stick,
    spectral_angle,
    stick_jacobian,
    stick_to_simplex,
    synthetic_library,
    unmix,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "IoError",
    "NumericError",
    "align_endmembers",
    "armse_abundance",
    "classification_accuracy",
    "endmember_errors",
    "extract_endmembers",
    "generate_scene",
    "load_cube",
    "reconstruction_errors",
    "sample_potts_field",
    "save_cube",
    "simplex_to_stick",
    "spectral_angle",
    "stick_jacobian",
    "stick_to_simplex",
    "synthetic_library",
    "unmix",
]
