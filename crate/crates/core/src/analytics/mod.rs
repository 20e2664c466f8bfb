//! Closed-form coherence results and the observables built on them.

mod coherence;
mod dark_state;
mod fwm;
mod susceptibility;
mod threshold;

pub use coherence::{probe_coherence, probe_coherence_rotating_frame, ComplexLinewidths, Populations};
pub use dark_state::{dark_bright_decomposition, dark_bright_with_phases, lambda_interaction, DarkBright};
pub use fwm::{fwm_figure_of_merit, fwm_steady_state, FwmPoint};
pub use susceptibility::{
    chi_from_coherence, group_index, susceptibility, ProbeSetup, Susceptibility, SusceptibilityMode, GAIN_TOL,
    LINEAR_RESPONSE_LIMIT,
};
pub use threshold::{cpt_threshold, threshold_margin, CptThreshold};
