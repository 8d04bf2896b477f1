"""Discrete gasket measures and extremal spherical densities.

Exact integer-lattice approximations of the natural self-similar measure on
the Sierpinski gasket, ball-density profiles and extremal searches with
two-sided bounds, a cylinder-classification measure oracle, spectrum
assembly, and an empirical tangent-zoom demo.
"""

from .cylinders import CylinderInterval, measure_interval, sandwich_check, sandwich_record
from .density import (
    BoundedEstimate,
    DensityRecord,
    SpectrumReport,
    assemble_spectrum,
    density,
    logscale,
    typical_ball_extremes,
    vertex_extremes,
    vertex_profile,
)
from .errors import (
    DegenerateMeasureError,
    DomainError,
    EmptySearchError,
    GeometryError,
    InvalidWordError,
    InvariantViolationError,
    LevelMismatchError,
    ResolutionError,
    ResourceLimitError,
    UnsupportedSystemError,
)
from .exact import Root3, sqrt3_sign
from .ifs import (
    ConvexPolygon,
    IfsSystem,
    Similitude,
    Word,
    apply_word,
    ball_in_open_set,
    gasket_preset,
    is_gasket_system,
    similarity_dimension,
)
from .lattice import (
    DiscreteMeasure,
    LatticePoint,
    corner_points,
    dist2_exact,
    dist2_key,
    generate_support,
    write_csv,
)
from .spatial import (
    Ball,
    CandidateRadius,
    GridIndex,
    ball_count,
    ball_mass,
    build_index,
    candidate_radii,
    default_cell_size,
)
from .zoom import ZoomStep, binned_tv_distance, zoom_sequence

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "BoundedEstimate",
    "CandidateRadius",
    "ConvexPolygon",
    "CylinderInterval",
    "DegenerateMeasureError",
    "DensityRecord",
    "DiscreteMeasure",
    "DomainError",
    "EmptySearchError",
    "GeometryError",
    "GridIndex",
    "IfsSystem",
    "InvalidWordError",
    "InvariantViolationError",
    "LatticePoint",
    "LevelMismatchError",
    "ResolutionError",
    "ResourceLimitError",
    "Root3",
    "Similitude",
    "SpectrumReport",
    "UnsupportedSystemError",
    "Word",
    "ZoomStep",
    "apply_word",
    "assemble_spectrum",
    "ball_count",
    "ball_in_open_set",
    "ball_mass",
    "binned_tv_distance",
    "build_index",
    "candidate_radii",
    "corner_points",
    "default_cell_size",
    "density",
    "dist2_exact",
    "dist2_key",
    "generate_support",
    "gasket_preset",
    "is_gasket_system",
    "logscale",
    "measure_interval",
    "sandwich_check",
    "sandwich_record",
    "similarity_dimension",
    "sqrt3_sign",
    "typical_ball_extremes",
    "vertex_extremes",
    "vertex_profile",
    "write_csv",
    "zoom_sequence",
]
