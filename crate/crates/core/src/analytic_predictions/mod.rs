//! Closed forms and random-state averages that the simulations are
//! compared against.

mod bgue;
mod black_hole;
mod cfi_sat;
mod closed_forms;
mod fidelity;
mod haar;

pub use bgue::{bgue_curves, bgue_f, bgue_point, BguePoint, BgueSpec};
pub use black_hole::{bh_radiation_qfi, BlackHoleSpec, RadiationQfi, RadiationState};
pub use cfi_sat::{cfi_saturation, CfiSaturation};
pub use closed_forms::{
    draw_outcomes, outcome_density, outcome_ks_test, sample_outcome_probabilities, trace_distance_full,
    trace_distance_monte_carlo, trace_distance_sub, trace_distance_sub_limit, KsOutcome, MonteCarloEstimate,
};
pub use fidelity::{
    codeword_fidelity, codeword_fidelity_ensemble, conjugate_codeword, predicted_codeword_fidelity, CodewordFidelity,
    EnsembleFidelity,
};
pub use haar::{
    finite_temperature_fa, haar_saturation_fa, haar_saturation_with_integral, headline_saturation,
    schmidt_integral_mp, HaarModelSpec, HaarSaturation, OperatorTraces, SpectrumMode,
};
