"""strata-lab: numerical experiments on stratified measures.

Mixtures of rectifiable measures (atoms, segments, patches, boxes) with exact
densities, entropies and dyadic-cell tables; Monte Carlo estimators for
typical-set probabilities and Hausdorff-volume growth; information dimension
by quantized-entropy slope.
"""

from ._kernels import backend_name
from .aep import (
    AdjacentTypeDiscrepancy,
    EstimateWithCI,
    ExhaustiveResult,
    StratumReport,
    TightnessReport,
    adjacent_type_discrepancy,
    estimate_stratum_volume,
    estimate_tv_defect,
    estimate_typical_probability,
    estimate_typical_volume,
    exhaustive_oracle,
    sample_strongly_typical_labels,
    stratum_report,
    tightness_diagnostic,
    type_symmetry_property,
)
from .config import (
    MeasureConfig,
    dumps_measure_config,
    load_measure_config,
    loads_measure_config,
    write_measure_config,
)
from .dyadic import (
    CellTable,
    DyadicCell,
    cell_index,
    cell_measure,
    cell_table,
    dyadic_density_estimate,
    info_dimension,
    log_sum_inequality_gap,
    quantized_entropy,
    renyi_defect,
)
from .errors import (
    AmbientMismatch,
    BadExponent,
    ConfigError,
    DegenerateWeights,
    InfiniteScore,
    OverlappingCarriers,
    StrataError,
    TooLarge,
    UnsupportedGeometry,
    WeightSumMismatch,
    ZeroWeight,
)
from .geometry import AtomSet, AxisAlignedPatch, Box, MixtureComponent, Segment
from .measure import (
    LabeledSequence,
    MixtureEntropy,
    StratifiedMeasure,
    build_standard_form,
    component_entropy,
    entropy_monte_carlo,
    log_density,
    log_density_batch,
    mixture_entropy,
    sample,
    score_moments,
)
from .randomstream import RandomStream
from .typicality import (
    EmpiricalType,
    Schedule,
    TVBound,
    TypicalityParams,
    dimension_interval,
    empirical_type,
    entropy_tv_bound,
    is_strongly_typical,
    is_weakly_typical,
    schedule,
    stratum_dimension,
    weak_log_score,
)

__version__ = "0.1.0"
