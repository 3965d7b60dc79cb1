"""Spectral analysis of electromagnetic fields in axially layered cylinders.

The field operator of a cylinder whose scalar material coefficients
depend only on the axial coordinate splits exactly over the transverse
Dirichlet and Neumann modes of the cross-section.  Each mode yields a
weighted second-order problem on the axis, unitarily equivalent to a
one-dimensional Schrodinger operator through a travel-time change of
variable, and the full spectrum is reassembled from these pieces with
its exact +/- symmetry.

Layers, bottom to top: cross_section (transverse eigenvalues), profiles
(coefficient families and their certified bounds), liouville (the
change of variable and mode potentials), schrodinger / weighted_operator
(two independent solver routes), assembly (mode budget, spectrum union,
finite-gap certificate), cli (JSON-configured batch runs).
"""

from .assembly import (
    FiniteGapCertificate,
    GapReport,
    ModeBudget,
    ModeGroup,
    PeriodicModeResult,
    SpectralPoint,
    SpectrumReport,
    StabilizingModeResult,
    finite_gap_certificate,
    mode_budget,
    run_periodic_analysis,
    run_stabilizing_analysis,
)
from .cross_section import (
    CrossSectionSpectrum,
    Disk,
    Rectangle,
    Synthetic,
    build_spectrum,
    dirichlet_eigenvalues,
    neumann_eigenvalues,
    validate_friedlander,
)
from .errors import (
    CylspecError,
    InsufficientDataError,
    InvalidWitnessError,
    NumericalError,
    ResolutionError,
    TopologyError,
    ValidationError,
    WindowError,
)
from .liouville import (
    LiouvilleData,
    ModePotential,
    build_potential,
    build_transform,
)
from .profiles import (
    CoefficientProfile,
    Constant,
    CosinePeriodic,
    EssentialBounds,
    GaussianBump,
    Periodic,
    ProductComparison,
    ProfileSum,
    Sech2Bump,
    Stabilizing,
    essential_bounds,
    family_from_dict,
    family_to_dict,
    locate_product_excess,
    make_profile,
)
from .schrodinger import (
    BandStructure,
    BoundStateResult,
    VariationalBound,
    Witness,
    band_structure,
    bound_states,
    count_below,
    discriminant,
    monodromy,
    search_witness,
    variational_upper_bound,
)
from .weighted_operator import (
    FormValue,
    WeightedEigenResult,
    WeightedOperatorSpec,
    quadratic_form_value,
    weighted_eigenvalues,
)

__version__ = "0.1.0"

__all__ = [
    "BandStructure",
    "BoundStateResult",
    "CoefficientProfile",
    "Constant",
    "CosinePeriodic",
    "CrossSectionSpectrum",
    "CylspecError",
    "Disk",
    "EssentialBounds",
    "FiniteGapCertificate",
    "FormValue",
    "GapReport",
    "GaussianBump",
    "InsufficientDataError",
    "InvalidWitnessError",
    "LiouvilleData",
    "ModeBudget",
    "ModeGroup",
    "ModePotential",
    "NumericalError",
    "Periodic",
    "PeriodicModeResult",
    "ProductComparison",
    "ProfileSum",
    "Rectangle",
    "ResolutionError",
    "Sech2Bump",
    "SpectralPoint",
    "SpectrumReport",
    "Stabilizing",
    "StabilizingModeResult",
    "Synthetic",
    "TopologyError",
    "ValidationError",
    "VariationalBound",
    "WeightedEigenResult",
    "WeightedOperatorSpec",
    "WindowError",
    "Witness",
    "band_structure",
    "bound_states",
    "build_potential",
    "build_spectrum",
    "build_transform",
    "count_below",
    "dirichlet_eigenvalues",
    "discriminant",
    "essential_bounds",
    "family_from_dict",
    "family_to_dict",
    "finite_gap_certificate",
    "locate_product_excess",
    "make_profile",
    "mode_budget",
    "monodromy",
    "neumann_eigenvalues",
    "quadratic_form_value",
    "run_periodic_analysis",
    "run_stabilizing_analysis",
    "search_witness",
    "validate_friedlander",
    "variational_upper_bound",
    "weighted_eigenvalues",
]
