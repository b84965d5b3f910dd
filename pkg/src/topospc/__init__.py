"""Topological statistical process control for lattice-structured parts."""

from .errors import ParseError, SimplexBudgetError, ValidationError
from .estimators import PersistenceChart, RipsDiagram
from .filtration import (
    Filtration,
    Simplex,
    build_rips,
    euler_characteristic_at,
    simplex_counts_at,
)
from .geometry import (
    DistanceMatrix,
    PointCloud,
    load_pointcloud,
    pairwise_distances,
    save_pointcloud,
)
from .harness import (
    ExperimentConfig,
    GeometricReference,
    KSResult,
    RunLengthSummary,
    geometric_reference,
    ks_uniformity_test,
    make_wireframe,
    pvalue_power_study,
    run_length_experiment,
)
from .inference import (
    PermutationTestResult,
    ReferenceSet,
    build_reference,
    permutation_test,
)
from .metrics import bottleneck_distance, duration_distance, wasserstein_distance
from .partgen import (
    DefectSpec,
    NoiseSpec,
    Wireframe,
    add_noise,
    apply_defect,
    gen_cube,
    gen_cube_lattice,
    gen_egg_like_lattice,
    gen_layered_tube,
    sample_cloud,
)
from .persistence import (
    Feature,
    PersistenceDiagram,
    barcode,
    betti_numbers,
    load_diagram,
    persistence,
    persistence_h0,
    save_diagram,
)
from .spc import (
    ChartConfig,
    ChartStep,
    RunLengthSample,
    build_phase1,
    chart_step,
    compute_diagram,
    monitor_stream,
)

__version__ = "0.1.0"
