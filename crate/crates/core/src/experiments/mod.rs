//! Construction sweeps over the number of holes, decay-rate fits and
//! CSV/JSON output.

mod config;
mod emit;
mod fit;
mod sweep;

pub use config::{OutputPaths, SweepConfig};
pub use emit::{emit_results, from_csv, from_json, load_results, to_csv, to_json, Format, SweepResults, CSV_COLUMNS};
pub use fit::{fit_rate, FitReport, ModelFit, RateModel};
pub use sweep::{run_one, run_sweep, RecordDetails, SweepRecord};
