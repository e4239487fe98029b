//! Symmetric damping towards a thermal bath, applied to every mode.
//!
//! The Fokker–Planck equation of the two-mode master equation with equal
//! rates Γ and `M` bath photons is solved by a Gaussian Green function, so a
//! Gaussian input stays Gaussian: means shrink by `e^{−Γt/2}` and
//! covariances map to `e^{−Γt} V + D² I` with `D² = (2M+1)(1 − e^{−Γt})/4`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};
use crate::gaussian::{GaussianOperator, VACUUM_VARIANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossChannel {
    gamma_t: f64,
    thermal: f64,
}

impl LossChannel {
    /// `gamma_t` is the dimensionless damping `Γt`, `thermal` the bath photon number `M`.
    pub fn new(gamma_t: f64, thermal: f64) -> Result<Self> {
        if !(gamma_t >= 0.0 && !gamma_t.is_nan()) {
            return invalid_arg(format!("damping Γt must be >= 0, got {gamma_t}"));
        }
        if !(thermal.is_finite() && thermal >= 0.0) {
            return invalid_arg(format!("thermal photon number must be finite and >= 0, got {thermal}"));
        }
        Ok(LossChannel { gamma_t, thermal })
    }

    pub fn identity() -> Self {
        LossChannel { gamma_t: 0.0, thermal: 0.0 }
    }

    pub fn gamma_t(&self) -> f64 {
        self.gamma_t
    }

    pub fn thermal(&self) -> f64 {
        self.thermal
    }

    /// Drift coefficient `γ = 1/(2M+1)` of the Fokker–Planck equation.
    pub fn drift(&self) -> f64 {
        1.0 / (2.0 * self.thermal + 1.0)
    }

    /// Rescaled time `τ = Γt/γ`; note `e^{−γτ} = e^{−Γt}`.
    pub fn rescaled_time(&self) -> f64 {
        self.gamma_t / self.drift()
    }

    /// `e^{−Γt}`.
    pub fn transmissivity(&self) -> f64 {
        (-self.gamma_t).exp()
    }

    /// Added variance per quadrature, `(1 − e^{−γτ}) / (4γ)`.
    pub fn diffusion(&self) -> f64 {
        (2.0 * self.thermal + 1.0) * VACUUM_VARIANCE * (-(-self.gamma_t).exp_m1())
    }

    /// Two channels with the same bath compose by adding damping.
    pub fn then(&self, other: &LossChannel) -> Option<LossChannel> {
        (self.thermal == other.thermal).then_some(LossChannel {
            gamma_t: self.gamma_t + other.gamma_t,
            thermal: self.thermal,
        })
    }
}

pub fn evolve(state: &GaussianOperator, channel: &LossChannel) -> Result<GaussianOperator> {
    state.ensure_physical()?;
    let t = channel.transmissivity();
    let dim = state.cov().nrows();
    let mean = state.mean() * t.sqrt();
    let cov = state.cov() * t + DMatrix::identity(dim, dim) * channel.diffusion();
    GaussianOperator::new(mean, cov, state.weight())
}

/// `e^{−Γt−2r} + (2M+1)(1 − e^{−Γt})`: four times the evolved twin-beam
/// variance `σ²₋`, i.e. the channel's share of the teleportation noise.
pub fn effective_kappa_contribution(r: f64, channel: &LossChannel) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return invalid_arg(format!("twin-beam gain must be finite and >= 0, got {r}"));
    }
    Ok((-channel.gamma_t - 2.0 * r).exp() + 4.0 * channel.diffusion())
}
