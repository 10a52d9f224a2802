"""Continuum-percolation toolkit for Boolean models with discrete radii."""

__version__ = "0.1.0"

from .geometry import (  # noqa: F401
    Ball,
    SplitPoint,
    balls_intersect,
    distance,
    log_unit_ball_volume,
    rescale,
    split_point,
    unit_ball_volume,
)
from .measures import (  # noqa: F401
    ModelParams,
    RadiusMeasure,
    covered_volume,
    dirac,
    log_moment,
    make_mu_d,
    moment,
    normalized_intensity,
    scale_measure,
    theorem_range,
    two_type_intensities,
)
from .sampling import (  # noqa: F401
    BallConfiguration,
    BoxWindow,
    SizingError,
    cube_window,
    sample_boolean_model,
    stream,
)
from .percolation import (  # noqa: F401
    CellGrid,
    ClusterLabeling,
    GenealogyReport,
    UnionFind,
    alternating_path,
    build_clusters,
    crossing,
    genealogy,
)
from .branching import (  # noqa: F401
    GWOutcome,
    MeanMatrix2,
    classify,
    kappa_critical,
    mean_matrix,
    mean_total_progeny,
    perron_root,
    perron_root_log,
    simulate_gw,
)
from .embedding import (  # noqa: F401
    DegenerateRegionError,
    EmbeddingGeometry,
    bernoulli_survival,
    branch_parameters,
    certify_inclusions,
    estimate_g_plus,
    rate_limits,
    rate_slopes,
    region_volumes,
    simulate_oriented,
)
from .estimator import (  # noqa: F401
    ThresholdEstimate,
    bisect_threshold,
    crossing_curve,
    mixture_measure,
    mixture_sweep,
)
