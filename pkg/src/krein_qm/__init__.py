"""Quantum mechanics over indefinite-norm (Krein) state spaces."""

from .core import (
    ClassificationError,
    ConvergenceError,
    GhostError,
    GhostKind,
    GhostResolution,
    IndefiniteMetric,
    KreinError,
    KreinOperator,
    NormClass,
    NotSelfAdjointError,
    NullNormError,
    SpectralClassification,
    SpectralEntry,
    classify_eigenpairs,
    classify_spectrum,
    evolve,
    ghost_resolution,
    indefinite_weights,
    inner_product,
    is_self_adjoint,
    krein_adjoint,
    observable_probabilities,
)

__version__ = "0.1.0"

__all__ = [
    "ClassificationError",
    "ConvergenceError",
    "GhostError",
    "GhostKind",
    "GhostResolution",
    "IndefiniteMetric",
    "KreinError",
    "KreinOperator",
    "NormClass",
    "NotSelfAdjointError",
    "NullNormError",
    "SpectralClassification",
    "SpectralEntry",
    "classify_eigenpairs",
    "classify_spectrum",
    "evolve",
    "ghost_resolution",
    "indefinite_weights",
    "inner_product",
    "is_self_adjoint",
    "krein_adjoint",
    "observable_probabilities",
]
