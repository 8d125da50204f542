"""Positivity of line bundles on blow-ups of P^2 at points of a plane curve.

Exact lattice arithmetic, three-valued positivity checkers with certificates,
Cremona reduction, and brute-force obstruction oracles.
"""

from .lattice import (
    BlowupContext,
    DimensionMismatch,
    DivisorClass,
    Flag,
    adjoint_class,
    canonical_class,
    curve_class,
    intersect,
    sorted_multiplicities,
)
from .criteria import (
    EffectivityCertificate,
    Inequality,
    NonUniformError,
    Property,
    Status,
    Verdict,
    certify_effective,
    check_ample,
    check_ample_uniform,
    check_globally_generated,
    check_k_very_ample,
    check_nef,
    negative_kva_certificate,
)
from .cremona import (
    CremonaStep,
    Outcome,
    ReductionTrace,
    Reindex,
    apply_cremona,
    check_excellent_e3,
    orbit_search_standard,
    reduce_to_standard_e3,
)
from .oracle import (
    ObstructionCandidate,
    bfs_condition,
    cross_check_uniform,
    enumerate_obstructions,
    reider_obstruction,
    verify_certificate,
)

__version__ = "0.1.0"
