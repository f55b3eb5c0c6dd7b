"""Age-standardized mortality trends and composition (aggregation-bias) diagnostics."""
from .core import (
    AgeBand,
    AgeSpecificRates,
    AgestandError,
    CountsTable,
    InvalidTableError,
    MissingCellError,
    RateSeries,
    RectangularityError,
    Sex,
    ShapeError,
    StandardPopulation,
    StratumKey,
    UnknownYearError,
    adjusted_series,
    age_specific_rate,
    combine_tables,
    crude_rate,
    crude_series,
    mean_age,
    mean_age_series,
    rates_for_year,
    standard_from_year,
    standardized_rate,
    uniform_standard,
)
from .decompose import (
    BiasReport,
    DecompositionResult,
    UndefinedPercentError,
    bias_report,
    counterfactual_series,
    decompose_change,
)
from .ingest import ValidationReport, dumps_counts_csv, parse_counts_csv, parse_wonder_export, validate
from .stratify import PipelineConfig, run_pipeline, strata
from .synth import Scenario, baby_boom_scenario, synth_table

__version__ = "0.1.0"
