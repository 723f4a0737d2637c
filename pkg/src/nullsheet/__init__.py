"""Light-like extremal surfaces in curved spacetimes.

The Cauchy problem for a light-like extremal surface reduces, through the
Burgers characteristic transform theta = vartheta + Lambda(vartheta) t, to
one geodesic per characteristic in the ambient spacetime.  This package
implements that reduction for Schwarzschild (and flat) backgrounds, with
closed-form oracle solutions for radial, circular and elliptic branches.
"""

__version__ = "0.1.0"

from .characteristics import (
    CharacteristicMap,
    burgers_residual_grid,
    map_from_callables,
    map_from_initial_data,
)
from .elliptic import carlson_rf, complete_elliptic_k, elliptic_f, jacobi_amplitude
from .errors import (
    ConfigError,
    CoverageError,
    DegenerateDataError,
    DomainError,
    ExpressionError,
    MapBreakdownError,
    MapInversionError,
    NullsheetError,
    OracleMismatchError,
)
from .geodesic import (
    DriftReport,
    Event,
    GeodesicState,
    GeodesicTrajectory,
    SolverOptions,
    conserved_along,
    geodesic_rhs,
    integrate,
    tangent_norm,
)
from .initial_data import (
    ConservedSet,
    InitialCurve,
    MonotoneReport,
    check_monotone,
    conserved_from_data,
    curve_from_callables,
    curve_from_expressions,
    curve_from_samples,
    delta_expanded_schwarzschild,
    lambda0,
    lambda0_schwarzschild,
    lightlikeness_residual,
    validate_curve,
)
from .oracles import (
    OracleKind,
    OracleParams,
    check_oracle_consistency,
    make_oracle,
)
from .reduction import (
    CaseLabel,
    CubicProfile,
    QuadratureTable,
    cubic_coefficients,
    example2_coefficients,
    example2_roots,
    example3_roots,
    profile_from_data,
    quadrature_t_tau,
    rt_squared,
    solve_cubic,
)
from .spacetime import (
    InducedMetric,
    SchwarzschildParams,
    Spacetime,
    christoffel_fd,
    induced_metric,
    minkowski,
    minkowski_spherical,
    schwarzschild,
)
from .surface import (
    DeltaReport,
    SurfaceMesh,
    build_surface,
    delta_monitor,
    export_csv,
    export_json,
    import_csv,
    import_json,
    mesh_to_rows,
    rows_to_csv_text,
    wrap_offset_from_curve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
