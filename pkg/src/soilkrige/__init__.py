"""Kriging-based soil compaction mapping and robotic sampling strategies.

The package is organised as

- :mod:`soilkrige.grid`: field grid, samples and depth-layer aggregation
- :mod:`soilkrige.variogram`: experimental semivariograms and the bounded
  linear model fit
- :mod:`soilkrige.kriging`: ordinary kriging per layer and the mean kriging
  variance map
- :mod:`soilkrige.exploration`: sampling plans, TSP routing, next-best-view
  and adaptive plan edits
- :mod:`soilkrige.simulation`: synthetic ground truth, simulated runs and
  their metrics
- :mod:`soilkrige.io` and :mod:`soilkrige.cli`: config, CSV files and the
  ``soilkrige`` command
"""

from .errors import (
    ConfigError,
    DivisionGuardError,
    ExhaustedError,
    GenerationError,
    InsufficientDataError,
    NegativeVarianceError,
    NumericalError,
    OutOfBoundsError,
    SchemaError,
    SingularMatrixError,
    SoilKrigeError,
    UndefinedCorrelationError,
    ValidationError,
)
from .exploration import (
    Plan,
    StrategyConfig,
    adapt_plan_greedy,
    adapt_plan_mc,
    next_greedy,
    next_monte_carlo,
    plan_area_split,
    plan_random,
    plan_w_shape,
    tsp_route,
)
from .grid import (
    DepthProfile,
    FieldGrid,
    LayerSpec,
    Location,
    Sample,
    aggregate_layers,
    build_grid,
    cell_of,
)
from .io import load_config, load_samples_csv, normalized_rmse_report
from .kriging import (
    LayeredModel,
    LayerMap,
    build_layered_model,
    estimate,
    krige_layer,
    solve_weights,
    variance,
)
from .simulation import (
    RunRecord,
    SurrogateField,
    compare_strategies,
    demo_surrogate,
    generate_surrogate,
    kv_mse_correlation,
    model_error,
    mse,
    rmse,
    run_exploration,
    sample_at,
)
from .variogram import (
    ExperimentalVariogram,
    VariogramParams,
    experimental_semivariogram,
    fit_linear,
)

__version__ = "0.1.0"
