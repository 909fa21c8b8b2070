"""Flat groupoid connections over exact rationals.

Groupoid nerve models with a flat connection datum, the quadruple-graded
complex of symbol-valued forms with its four anticommuting differentials,
total cohomology with an independent simplicial de Rham oracle, the pages
of the symbol-degree filtration, and pullback along groupoid morphisms —
all linear algebra exact over ℚ.
"""

from .cohomology import (
    cartan_total,
    fixed_p_pages,
    oracle_total,
    spectral_pages,
    total_cohomology,
)
from .groupoids import (
    ActionModel,
    FlatGroupoidModel,
    GroupModel,
    ModelError,
    SpaceModel,
    build_pair_model,
    build_pair_model_from_frame,
    build_transformation_model,
    build_vector_bundle_model,
    check_flatness,
    derived_connection,
    validate_structure,
)
from .kcomplex import (
    AmbientElement,
    KElement,
    cech,
    contraction,
    cup,
    derham,
    normalize,
    phi,
    symmetric_derivative,
    total_differential,
)
from .models import (
    BUNDLED_MODELS,
    ConfigError,
    load_config,
    load_model,
    model_from_config,
    model_hash,
    parse_poly,
)
from .morphisms import (
    GroupoidMorphism,
    check_chain_map,
    induced_cohomology_map,
    pullback_complex_map,
)
from .poly import Poly, Ring, RingHom
from .signs import DEFAULT_SIGNS, SignConventions
from .truncation import Grading, Truncation, TruncationError, broken_identity

__all__ = [
    "ActionModel",
    "AmbientElement",
    "BUNDLED_MODELS",
    "ConfigError",
    "DEFAULT_SIGNS",
    "FlatGroupoidModel",
    "Grading",
    "GroupModel",
    "GroupoidMorphism",
    "KElement",
    "ModelError",
    "Poly",
    "Ring",
    "RingHom",
    "SignConventions",
    "SpaceModel",
    "Truncation",
    "TruncationError",
    "broken_identity",
    "build_pair_model",
    "build_pair_model_from_frame",
    "build_transformation_model",
    "build_vector_bundle_model",
    "cartan_total",
    "cech",
    "check_chain_map",
    "check_flatness",
    "contraction",
    "cup",
    "derham",
    "derived_connection",
    "fixed_p_pages",
    "induced_cohomology_map",
    "load_config",
    "load_model",
    "model_from_config",
    "model_hash",
    "normalize",
    "oracle_total",
    "parse_poly",
    "phi",
    "pullback_complex_map",
    "spectral_pages",
    "symmetric_derivative",
    "total_cohomology",
    "total_differential",
    "validate_structure",
]
