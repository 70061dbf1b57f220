"""Near-field beamfocusing with sparse uniform planar arrays.

Exact and closed-form power around a focal point, main-lobe geometry and
range-focusing feasibility, EDoF estimators with a polynomial surface fit,
and region interference over a user grid.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigurationError,
    DegenerateChannelError,
    DomainError,
    FeasibilityError,
    FittingError,
    InvalidInputError,
    NumericError,
    SearchError,
    SingularityError,
    SparseUPAError,
)
from .geometry import ArrayGeometry, Point3, SystemConfig, antenna_positions, load_config, upa_positions  # noqa: E402
from .channel import channel_matrix, focusing_phases, green_coefficient  # noqa: E402
from .powerfield import (  # noqa: E402
    exact_power,
    field_power,
    fresnel,
    p1_closed_form,
    p2_closed_form,
    rho2,
)
from .lobes import LobeReport, default_b_min, feasibility_report, find_b_min, main_lobe_length, main_lobe_width  # noqa: E402
from .edof import (  # noqa: E402
    EDoFSurface,
    EDoFSurfaceRegressor,
    edof_area,
    edof_direct,
    edof_grid,
    edof_trace,
    eval_edof_surface,
    fit_edof_surface,
    fitting_constraint,
    singular_spectrum,
)
from .interference import UserGrid, region_interference  # noqa: E402

__all__ = [
    "__version__",
    "ConfigurationError",
    "DegenerateChannelError",
    "DomainError",
    "FeasibilityError",
    "FittingError",
    "InvalidInputError",
    "NumericError",
    "SearchError",
    "SingularityError",
    "SparseUPAError",
    "ArrayGeometry",
    "Point3",
    "SystemConfig",
    "antenna_positions",
    "load_config",
    "upa_positions",
    "channel_matrix",
    "focusing_phases",
    "green_coefficient",
    "exact_power",
    "field_power",
    "fresnel",
    "p1_closed_form",
    "p2_closed_form",
    "rho2",
    "LobeReport",
    "default_b_min",
    "feasibility_report",
    "find_b_min",
    "main_lobe_length",
    "main_lobe_width",
    "EDoFSurface",
    "EDoFSurfaceRegressor",
    "edof_area",
    "edof_direct",
    "edof_grid",
    "edof_trace",
    "eval_edof_surface",
    "fit_edof_surface",
    "fitting_constraint",
    "singular_spectrum",
    "UserGrid",
    "region_interference",
]
