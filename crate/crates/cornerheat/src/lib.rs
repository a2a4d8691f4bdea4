//! Convergence studies for energy-corrected P1 heat-equation solvers on
//! polygons with re-entrant corners, and the `cornerheat` command line.
//!
//! Each study takes a [`StudyConfig`], runs a refinement sequence with the
//! solvers of [`cornerheat_core`] and returns a report that can be written
//! as CSV/JSON and checked against its acceptance bands.

pub mod checks;
pub mod config;
pub mod eoc;
pub mod error;
pub mod io;
pub mod record;
pub mod studies;

pub use checks::{all_passed, Check};
pub use config::{FileConfig, GammaChoice, StudyConfig, StudyKind};
pub use eoc::{compute_eoc, fitted_rate, richardson};
pub use error::{HarnessError, Result};
pub use record::{ConvergenceRecord, LevelRecord, CSV_HEADER};
pub use studies::{run_study, StudyReport};
