"""Surface-area audits for convex cells of unit-ball packings and normal tilings."""

from .certificates import (
    CertificateReport,
    MeetingSegment,
    certify_cell,
    check_area_dominates_ecurv,
    check_besicovitch_eggleston,
    check_containment_volume,
    check_fejes_toth,
    check_jung_area,
    cot_sum_bound,
    meeting_segments,
    normality_bounds,
    partition_area_certificate,
)
from .errors import (
    CaseSumMismatch,
    CellAreaError,
    CertificateFailure,
    GeometryError,
    NoBoundedCandidate,
    NotAPartition,
    ParseError,
    PreconditionViolated,
)
from .optimizer import OptimizationResult, TangentPolytopeParams, area_objective, minimize_area
from .polyhedron import (
    CellMetrics,
    ConvexPolyhedron,
    HalfSpace,
    chebyshev_center,
    clip_to_cube,
    cube_halfspaces,
    hull_of_points,
    intersect_halfspaces,
    metrics,
    tangent_polytope,
)
from .tilings import (
    PeriodicPacking,
    SeriesReport,
    WindowReport,
    average_sarea_series,
    preset_packing,
    voronoi_cell,
    window_certificates,
    window_report,
)

__version__ = "0.1.0"
