//! Estimation of competitive ratios, experiment grids and their output.

mod estimate;
mod exact;
mod experiment;
mod presets;
pub mod seeds;
mod svg;
mod table;

pub use estimate::{estimate_ratio, summarize, Estimate, EstimatePoint, Estimator, InstanceSource, TrialOutcome};
pub use exact::{binomial, exact_expected_objective, factorial, required_outcomes, ExactValue, DEFAULT_CAP};
pub use experiment::{
    exact_estimate, run_experiment, write_rows_csv, BGrid, EstimateRow, ExperimentSpec, NoiseGrid, CSV_HEADER,
};
pub use presets::{preset, Preset, PRESETS};
pub use svg::{render_svg, rows_to_series, Series, XAxis};
pub use table::{bounds_report, write_report_csv, BoundEntry, BoundsTable, BoundsTableSpec};
