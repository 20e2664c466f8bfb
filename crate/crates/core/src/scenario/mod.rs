//! Named parameter scans producing [`ScanTable`]s.

mod runners;
mod spec;
mod table;

pub use runners::{run_cpt_scan, run_eit_scan, run_fwm_scan, run_scenario, run_stirap_delay_scan, run_threshold_map};
pub use spec::{
    PulseSettings, ScenarioName, ScenarioSpec, SolverSettings, Spacing, Sweep, SweepParameter, EIT_DRIVE_LEVEL,
};
pub use table::{Column, Manifest, Reference, ScanTable, Tolerances};
