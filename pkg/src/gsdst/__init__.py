"""Decomposition of superposed complex geometric sequences via simplex volumes."""
from .denoise import (
    DenoiseConfig,
    NoisyDecomposition,
    SimilarityKind,
    cadzow_denoise,
    decompose_noisy,
    dehankelize,
    estimate_k,
    hankelize,
    informative_quotients,
    similarity,
)
from .errors import (
    DegenerateSimplexError,
    DetectionError,
    DimensionError,
    GSDError,
    InconsistencyError,
    InfeasibleError,
    InsufficientSamplesError,
    InvalidDecompositionError,
)
from .gsd import decompose, detect_k, extract_components, extract_initial_terms, extract_ratios
from .sequence import (
    Decomposition,
    GeometricComponent,
    IndexPattern,
    match_components,
    nmse,
    synthesize,
)
from .simplex import (
    basic_volume_series,
    build_search_space,
    is_geometric,
    union_polyhedron,
    volume_quotients,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateSimplexError",
    "DenoiseConfig",
    "Decomposition",
    "DetectionError",
    "DimensionError",
    "GSDError",
    "GeometricComponent",
    "InconsistencyError",
    "IndexPattern",
    "InfeasibleError",
    "InsufficientSamplesError",
    "InvalidDecompositionError",
    "NoisyDecomposition",
    "SimilarityKind",
    "basic_volume_series",
    "build_search_space",
    "cadzow_denoise",
    "decompose",
    "decompose_noisy",
    "dehankelize",
    "detect_k",
    "estimate_k",
    "extract_components",
    "extract_initial_terms",
    "extract_ratios",
    "hankelize",
    "informative_quotients",
    "is_geometric",
    "match_components",
    "nmse",
    "similarity",
    "synthesize",
    "union_polyhedron",
    "volume_quotients",
]
