//! Model systems and their eigenfunction families.

mod families;
mod laguerre;
mod model;
mod scaling;
mod spectrum;
mod wavefunction;

pub use families::{
    dho_f, dho_g, oscillator_wigner, oscillator_wigner_ladder, toy_resonant, toy_resonant_ladder, LadderSet, Sign,
    MAX_INDEX_1D, MAX_INDEX_2D,
};
pub use laguerre::{laguerre, laguerre_coeffs};
pub use model::{hamiltonian, koopman_apply, lift_dynamics, ModelId};
pub use scaling::{conjugation_by_v, light_cone_pullback};
pub use spectrum::{eigenfunction, spectrum, Quanta, SpectrumEntry};
pub use wavefunction::{wigner_pair_transform, PairNormalization, WaveFunction};
