//! Background-field scans, transition detection, the finite-size fit and
//! report output.

mod fit;
mod output;
mod scan;
pub mod svg;
mod table;
mod transition;

pub use fit::{fit_l0c_model, model_l0c, FitResult, MassShift, TransitionPoint, TRANSITION_SLOPE};
pub use output::{
    dimension_csv, fit_report, points_csv, scan_csv, table1_csv, write_atomic, SCAN_COLUMNS, SCHEMA_VERSION,
};
pub use scan::{linspace, scan_exact, scan_skqd, GridSpec, ScanMethod, ScanPoint, ScanResult};
pub use table::{
    format_sci, format_table1, table1_entry, table1_grid, table1_report, table1_row, Table1Config, Table1Row,
};
pub use transition::{
    detect_crossing, detect_l0c, exact_l0c, refine_l0c, skqd_l0c, Transition, CROSSING_LEVEL,
    DEFAULT_REFINE_ROUNDS,
};
