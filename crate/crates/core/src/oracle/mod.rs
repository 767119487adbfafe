//! Independent references for the master-equation path: the exact
//! single-excitation amplitude, a two-photon time-bin collision model, and
//! temporal-mode analysis of its output field.

mod modes;
mod single;
mod timebin;

pub use modes::{
    inner, output_mode_decomposition, pair_population, project_reduced_state, ModeDecomposition, MAX_FACTOR_RANK,
};
pub use single::{
    decaying_exponential_amplitude, single_excitation_solve, single_excitation_solve_with, SingleExcitationSolution,
    SINGLE_EXCITATION_INTERVALS,
};
pub use timebin::{bin_vector, timebin_solve, FewPhotonState, LossBranch};

use crate::num::{Complex, Real};
use crate::pulses::PulseShape;

/// `pulse` sampled as a mode on the bins of `state`, normalized under the Δt-weighted inner product.
pub fn pulse_mode<T: Real>(pulse: &PulseShape<T>, state: &FewPhotonState<T>) -> Vec<Complex<T>> {
    let s = T::one() / state.dt().sqrt();
    bin_vector(pulse, state.bin_count()).into_iter().map(|z| z * s).collect()
}
