"""Finite-difference laboratory for Lifshitz tails and van Hove asymptotics of
Neumann-bracketed random Schrodinger operators on strips and boxes."""

__version__ = "0.1.0"

from .grid import (
    CIRCLE,
    INTERVAL,
    DiscreteOperator,
    FaceTrace,
    GridDomain,
    GridFunction,
    assemble_operator,
    build_domain,
    reflect_double,
    restrict_operator,
    subbox,
    trace_restrict,
)
from .potential import (
    AlloyConfiguration,
    BackgroundPotential,
    DisplacementModel,
    SingleSitePotential,
    SiteDistribution,
    load_sample,
    sample_alloy,
    save_sample,
)
from .eig import (
    EigenResult,
    EigensolverError,
    count_below,
    gst_certificate,
    smallest_eigs,
)
from .spectral import (
    Catalogue,
    EquivalenceReport,
    bracketing_chain,
    classify_columns,
    dtn_map,
    equivalence_matrix,
    strip_scan,
)
from .ids import (
    AlloyModel,
    estimate_ids,
    fit_exponent,
    van_hove_envelope,
)

__all__ = [name for name in dir() if not name.startswith("_")]
