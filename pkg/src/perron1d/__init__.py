"""Exact and certified computations around one-dimensional expanding maps."""

__version__ = "0.1.0"

from .polys import IntPolynomial
from .intervals import Interval, ComplexBox
from .roots import RootEnclosure, poly_roots, solve_squarefree, PrecisionError
from .field import (
    NumberField,
    FieldElement,
    PerronClass,
    classify,
    make_field,
    mahler_measure,
    FieldConstructionError,
    ReducibleModulusError,
)
from .plmap import (
    PLMap,
    ExtendedIncidenceMatrix,
    SpectralResult,
    LapEntropyResult,
    is_extended_incidence,
    realize_pl_map,
    incidence_of,
    spectral,
    lap_entropy_estimate,
    IncidenceError,
    RealizationError,
)
from .orbits import (
    OrbitRecord,
    Trajectory,
    OrbitEscapeError,
    CloudEscapeError,
    PisotCertificate,
    PcfRoots,
    tent_map,
    critical_orbits,
    pisot_certificate,
    galois_product_cloud,
    salem_radii_walk,
    friendly_b,
    pcf_tent_roots,
    write_orbit_csv,
    write_trajectory_csv,
    write_root_cloud_csv,
)
from .cone import (
    ConeError,
    RationalCone,
    SemigroupBasis,
    LindMatrix,
    build_cone,
    semigroup_generators,
    decompose,
    lind_matrix,
)
from .builder import (
    BuildError,
    DoublingBase,
    GeneratorSequence,
    CircleExpander,
    BlowupModel,
    doubling_base,
    generator_sequence,
    power_expander_matrix,
    circle_expander,
    interval_blowup_expander,
    weak_perron_expander,
)

__all__ = [
    "IntPolynomial",
    "Interval",
    "ComplexBox",
    "RootEnclosure",
    "poly_roots",
    "solve_squarefree",
    "PrecisionError",
    "NumberField",
    "FieldElement",
    "PerronClass",
    "classify",
    "make_field",
    "mahler_measure",
    "FieldConstructionError",
    "ReducibleModulusError",
    "PLMap",
    "ExtendedIncidenceMatrix",
    "SpectralResult",
    "LapEntropyResult",
    "is_extended_incidence",
    "realize_pl_map",
    "incidence_of",
    "spectral",
    "lap_entropy_estimate",
    "IncidenceError",
    "RealizationError",
    "OrbitRecord",
    "Trajectory",
    "OrbitEscapeError",
    "CloudEscapeError",
    "PisotCertificate",
    "PcfRoots",
    "tent_map",
    "critical_orbits",
    "pisot_certificate",
    "galois_product_cloud",
    "salem_radii_walk",
    "friendly_b",
    "pcf_tent_roots",
    "write_orbit_csv",
    "write_trajectory_csv",
    "write_root_cloud_csv",
    "ConeError",
    "RationalCone",
    "SemigroupBasis",
    "LindMatrix",
    "build_cone",
    "semigroup_generators",
    "decompose",
    "lind_matrix",
    "BuildError",
    "DoublingBase",
    "GeneratorSequence",
    "CircleExpander",
    "BlowupModel",
    "doubling_base",
    "generator_sequence",
    "power_expander_matrix",
    "circle_expander",
    "interval_blowup_expander",
    "weak_perron_expander",
    "__version__",
]
