"""Regional efficiency scoring and panel-data policy evaluation."""

from .dea import (
    RTS,
    EfficiencyResult,
    ccr_efficiency,
    efficiency_table,
    format_efficiency_table,
    super_efficiency,
    yearly_range,
)
from .errors import (
    ArgumentError,
    DomainError,
    ParseError,
    RankError,
    SelectionError,
    ValidationError,
)
from .hcw import (
    ControlSelection,
    Evaluation,
    OLSFit,
    TreatmentEffectSeries,
    aic_score,
    best_subset_of_size,
    evaluate,
    ols_fit,
    predict_counterfactual,
    select_control_group,
    treatment_effects,
)
from .lp import LinearProgram, LPSolution, LPStatus, solve_lp
from .panel import (
    DEADataset,
    EvaluationConfig,
    OutcomePanel,
    bundled_table1,
    load_dea_dataset,
    load_outcome_panel,
    write_panel,
)
from .robustness import PlaceboReport, compare_paths, placebo_in_time

__version__ = "0.1.0"
