//! Gaussian phase-space toolkit for continuous-variable remote state
//! preparation and teleportation with twin-beam (two-mode squeezed vacuum)
//! resources.
//!
//! Quadratures follow `x = (a + a†)/2`, `y = i(a† − a)/2`, so the vacuum has
//! variance 1/4 in each quadrature. Phase-space vectors are ordered
//! `(x₁, y₁, x₂, y₂, …)`.
//!
//! * [`gaussian`]: Gaussian Wigner functions and their algebra.
//! * [`measurement`]: homodyne and double-homodyne conditioning.
//! * [`channels`]: the symmetric lossy/thermal channel, solved exactly.
//! * [`protocols`]: remote squeezing and teleportation figures of merit.
//! * [`fock`]: truncated number-basis brute force used as an oracle.

pub mod channels;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod measurement;
pub mod protocols;
pub mod rng;

pub use channels::{effective_kappa_contribution, evolve, LossChannel};
pub use error::{Error, Result};
pub use gaussian::{
    coherent, decompose_single_mode, displace, marginal, overlap, photon_number,
    photon_number_to_squeezing, rotate, squeeze, thermal, transpose_wigner, twb, vacuum,
    wigner_eval, GaussianOperator, SqueezedThermalDecomposition, VACUUM_VARIANCE,
};
pub use measurement::{
    condition_homodyne, double_homodyne_condition, homodyne_density, homodyne_povm_wigner,
    sample_homodyne, ConditionalOutcome, DoubleHomodyneSetting, HomodyneSetting,
};
pub use num_complex::Complex64;
pub use protocols::{
    eta_threshold, fidelity_coherent, remote_prep, teleport_gaussian, teleport_monte_carlo,
    EtaThreshold, MonteCarloEstimate, RemotePrepResult, TeleportConfig,
};
