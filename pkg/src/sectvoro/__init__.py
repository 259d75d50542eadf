"""sectvoro: beta-, beta-prime-, Gaussian- and sectional Poisson-Voronoi
tessellations as Laguerre diagrams of marked Poisson point processes.

Closed-form cell statistics (face intensities, typical-cell volumes,
intrinsic volumes, f-vectors, high-dimensional limits) are evaluated by
numerical quadrature of the beta-simplex angle-sum integral and
cross-validated against Monte-Carlo simulation and the distributional
identity between planar sections of Poisson-Voronoi tessellations and
beta-Voronoi tessellations.
"""

from .jfunc import (
    INFINITY,
    JQuery,
    NonConvergenceError,
    QuadratureConfig,
    j_value,
    j_value_infinity,
)
from .formulas import (
    expected_cell_volume,
    expected_f_vector,
    expected_intrinsic_volume,
    face_intensity,
    gaussian_cell_volume,
    limit_cell_volume,
    limit_face_intensity,
    miles_cell_volume,
)
from .laguerre import (
    USING_COMPILED,
    ConvexCell,
    LaguerreDiagram,
    build_diagram,
    cell_measures,
    restrict_interior_cells,
)
from .models import (
    Beta,
    BetaPrime,
    Gaussian,
    ModelSpec,
    PoissonVoronoi,
    SectionSpec,
    norm_constant_beta,
    norm_constant_beta_prime,
    r_of_d,
    sectional_model,
)
from .pointprocess import (
    MarkedPoints,
    SimulationWindow,
    default_window,
    make_rng,
    sample_beta,
    sample_beta_prime,
    sample_gaussian,
    sample_homogeneous,
    sample_model,
    sample_sectional_ground_truth,
)
from .render import RenderStyle, render_svg

__version__ = "0.1.0"

__all__ = [
    "INFINITY",
    "JQuery",
    "NonConvergenceError",
    "QuadratureConfig",
    "j_value",
    "j_value_infinity",
    "expected_cell_volume",
    "expected_f_vector",
    "expected_intrinsic_volume",
    "face_intensity",
    "gaussian_cell_volume",
    "limit_cell_volume",
    "limit_face_intensity",
    "miles_cell_volume",
    "USING_COMPILED",
    "ConvexCell",
    "LaguerreDiagram",
    "build_diagram",
    "cell_measures",
    "restrict_interior_cells",
    "Beta",
    "BetaPrime",
    "Gaussian",
    "ModelSpec",
    "PoissonVoronoi",
    "SectionSpec",
    "norm_constant_beta",
    "norm_constant_beta_prime",
    "r_of_d",
    "sectional_model",
    "MarkedPoints",
    "SimulationWindow",
    "default_window",
    "make_rng",
    "sample_beta",
    "sample_beta_prime",
    "sample_gaussian",
    "sample_homogeneous",
    "sample_model",
    "sample_sectional_ground_truth",
    "RenderStyle",
    "render_svg",
    "__version__",
]
