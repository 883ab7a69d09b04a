//! Monte Carlo sweeps, CSV output and the property-verification suites.

mod csv;
mod sweep;
mod verify;

pub use csv::{emit_csv, format_g9, parse_csv, write_csv, CSV_HEADER};
pub use sweep::{run_sweep, SweepConfig, SweepReport, SweepRow};
pub use verify::{
    dv_first_columns_closed_form, min_det_unscaled, run_verification, theorem1_measure, Check,
    Relation, Suite, VerificationReport, SUITE_MODELS,
};
