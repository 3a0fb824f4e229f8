//! Energy-aware scheduling of DAG workflows on a simulated cloud under hard
//! deadline and reliability constraints.
//!
//! * [`workflow`] and [`platform`] hold the data model and the closed-form
//!   energy and reliability kernel.
//! * [`scheduler`] builds static schedules (BCP, LEF, LDD, ASMFR).
//! * [`dynamic`] executes a schedule with sampled run times and reschedules
//!   pending tasks on every completion.
//! * [`oracle`] finds the minimum-energy schedule of small instances by
//!   exhaustive search.
//! * [`bench`] runs parameter sweeps and writes CSV reports.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod dax;
pub mod dynamic;
pub mod fixtures;
pub mod generate;
pub mod oracle;
pub mod platform;
pub mod schedule;
pub mod scheduler;
pub mod workflow;

pub use platform::{ExecContext, Platform, VmType};
pub use schedule::{Algorithm, Backup, Schedule, ScheduleEntry};
pub use workflow::Workflow;
