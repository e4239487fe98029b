//! End-to-end protocols: remote squeezed-state preparation by conditional
//! homodyne on a twin beam, and teleportation through a lossy twin beam with
//! imperfect double-homodyne detection.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channels::{evolve, LossChannel};
use crate::error::{invalid_arg, Error, Result};
use crate::gaussian::{
    decompose_single_mode, photon_number, twb, GaussianOperator, VACUUM_VARIANCE,
};
use crate::measurement::{
    condition_homodyne, double_homodyne_kernel, DoubleHomodyneSetting, HomodyneSetting,
};
use crate::rng::seeded_rng;

/// Conditional state of the receiver arm after homodyning the sender arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemotePrepResult {
    /// Displacement of the measured quadrature.
    pub a_x_eta: f64,
    /// Variance along the measured quadrature.
    pub sigma1_sq: f64,
    /// Variance along the conjugate quadrature.
    pub sigma2_sq: f64,
    pub n_th: f64,
    pub r_squeeze: f64,
    pub is_squeezed: bool,
    pub outcome_density: f64,
}

fn check_gain(r: f64) -> Result<()> {
    if !(r.is_finite() && r >= 0.0) {
        return invalid_arg(format!("twin-beam gain must be finite and >= 0, got {r}"));
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return invalid_arg(format!("quantum efficiency must lie in (0, 1], got {eta}"));
    }
    Ok(())
}

/// Closed-form conditional state for a twin beam of gain `r` whose first arm
/// is homodyned (x quadrature, efficiency `eta`) with outcome `x`.
pub fn remote_prep(r: f64, eta: f64, x: f64) -> Result<RemotePrepResult> {
    check_gain(r)?;
    check_eta(eta)?;
    if !x.is_finite() {
        return invalid_arg("homodyne outcome must be finite");
    }
    let n = photon_number(r)?;
    let lossy = 1.0 + n * (1.0 - eta);
    let gained = 1.0 + eta * n;
    let sigma1_sq = 0.25 * lossy / gained;
    let sigma2_sq = 0.25 * (1.0 + n);
    let outcome_var = 0.25 * (1.0 + n) + (1.0 - eta) / (4.0 * eta);
    Ok(RemotePrepResult {
        a_x_eta: eta * (n * (n + 2.0)).sqrt() / gained * x,
        sigma1_sq,
        sigma2_sq,
        n_th: 0.5 * (((1.0 + n) * lossy / gained).sqrt() - 1.0),
        r_squeeze: 0.25 * ((1.0 + n) * gained / lossy).ln(),
        is_squeezed: sigma1_sq < VACUUM_VARIANCE,
        outcome_density: (-x * x / (2.0 * outcome_var)).exp() / (TAU * outcome_var).sqrt(),
    })
}

/// The same quantities obtained by generic Gaussian conditioning of the
/// twin-beam covariance followed by a squeezed-thermal decomposition.
pub fn remote_prep_conditioned(r: f64, eta: f64, x: f64) -> Result<RemotePrepResult> {
    let setting = HomodyneSetting::new(0, 0.0, eta)?;
    let out = condition_homodyne(&twb(r)?, &setting, x)?;
    let decomposition = decompose_single_mode(&out.state)?;
    let cov = out.state.cov();
    Ok(RemotePrepResult {
        a_x_eta: out.state.mean()[0],
        sigma1_sq: cov[(0, 0)],
        sigma2_sq: cov[(1, 1)],
        n_th: decomposition.n_th,
        r_squeeze: decomposition.squeeze_r,
        is_squeezed: cov[(0, 0)] < VACUUM_VARIANCE,
        outcome_density: out.probability_density,
    })
}

/// Resources and imperfections of a teleportation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeleportConfig {
    r: f64,
    channel: LossChannel,
    eta: f64,
}

impl TeleportConfig {
    pub fn new(r: f64, gamma_t: f64, thermal: f64, eta: f64) -> Result<Self> {
        check_gain(r)?;
        check_eta(eta)?;
        Ok(TeleportConfig { r, channel: LossChannel::new(gamma_t, thermal)?, eta })
    }

    /// Lossless line, perfect detectors.
    pub fn ideal(r: f64) -> Result<Self> {
        Self::new(r, 0.0, 0.0, 1.0)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn gamma_t(&self) -> f64 {
        self.channel.gamma_t()
    }

    pub fn thermal(&self) -> f64 {
        self.channel.thermal()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn channel(&self) -> &LossChannel {
        &self.channel
    }

    /// Detector blur `Δ²_η = (1 − η)/η`.
    pub fn detector_blur(&self) -> f64 {
        (1.0 - self.eta) / self.eta
    }

    /// `κ² = e^{−Γt−2r} + (2M+1)(1 − e^{−Γt}) + (1 − η)/η`.
    pub fn kappa_sq(&self) -> f64 {
        let gamma_t = self.channel.gamma_t();
        let m = self.channel.thermal();
        (-gamma_t - 2.0 * self.r).exp() + (2.0 * m + 1.0) * (-(-gamma_t).exp_m1()) + self.detector_blur()
    }

    /// Twin beam after both arms have crossed the lossy line.
    pub fn resource(&self) -> Result<GaussianOperator> {
        evolve(&twb(self.r)?, &self.channel)
    }
}

/// `κ²` assembled from its parts: four times the evolved twin-beam variance
/// of `(x₁ − x₂)/√2` plus the detector blur.
pub fn kappa_sq_from_channel(cfg: &TeleportConfig) -> Result<f64> {
    let evolved = cfg.resource()?;
    let v = evolved.cov();
    let sigma_minus = 0.5 * (v[(0, 0)] + v[(2, 2)] - 2.0 * v[(0, 2)]);
    Ok(4.0 * sigma_minus + cfg.detector_blur())
}

fn check_single_mode_state(input: &GaussianOperator) -> Result<()> {
    if input.n_modes() != 1 {
        return invalid_arg(format!("teleportation input must be single-mode, got {} modes", input.n_modes()));
    }
    input.ensure_physical()
}

/// Teleported Gaussian state: the input blurred by an isotropic Gaussian
/// of variance `κ²/2` per quadrature, mean unchanged.
pub fn teleport_gaussian(input: &GaussianOperator, cfg: &TeleportConfig) -> Result<GaussianOperator> {
    check_single_mode_state(input)?;
    let cov = input.cov() + DMatrix::identity(2, 2) * (0.5 * cfg.kappa_sq());
    GaussianOperator::new(input.mean().clone(), cov, 1.0)
}

/// Teleported state computed from the measurement: double homodyne of the
/// input against the evolved resource, corrective displacement `D(−α)`,
/// then the exact average over the outcome distribution.
pub fn teleport_via_conditioning(input: &GaussianOperator, cfg: &TeleportConfig) -> Result<GaussianOperator> {
    check_single_mode_state(input)?;
    let setting = DoubleHomodyneSetting::new(input.clone(), cfg.eta)?;
    let kernel = double_homodyne_kernel(&cfg.resource()?, &setting)?;
    // out = prior + G(α − m) − α  with  α ~ N(m, S)
    let mean = kernel.prior_mean() - kernel.outcome_mean();
    let residual = kernel.gain() - DMatrix::identity(2, 2);
    let cov = kernel.conditional_cov() + &residual * kernel.outcome_cov() * residual.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianOperator::new(mean, cov, 1.0)
}

/// Teleportation fidelity for a coherent input; independent of its amplitude.
pub fn fidelity_coherent(cfg: &TeleportConfig) -> f64 {
    let gamma_t = cfg.gamma_t();
    let m = cfg.thermal();
    let eta = cfg.eta;
    1.0 / (1.0
        + (-2.0 * cfg.r - gamma_t).exp()
        + (1.0 - (-gamma_t).exp()) * (2.0 * m + 1.0)
        + (1.0 - eta) / eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EtaThreshold {
    /// Fidelity exceeds 1/2 for every efficiency above this value.
    Bound(f64),
    /// Even perfect detectors cannot beat 1/2 with this resource and line.
    Impossible,
}

impl EtaThreshold {
    pub fn bound(&self) -> Option<f64> {
        match *self {
            EtaThreshold::Bound(v) => Some(v),
            EtaThreshold::Impossible => None,
        }
    }

    pub fn is_impossible(&self) -> bool {
        matches!(self, EtaThreshold::Impossible)
    }
}

/// Minimum detector efficiency for fidelity above 1/2:
/// `η_min = 1/(2 − e^{−2r−Γt} − (1 − e^{−Γt})(2M+1))`, or
/// [`EtaThreshold::Impossible`] when that exceeds 1, which is exactly when
/// `e^{−2r} ≤ (2M+1) − 2M e^{Γt}` fails.
pub fn eta_threshold(r: f64, gamma_t: f64, thermal: f64) -> Result<EtaThreshold> {
    check_gain(r)?;
    let channel = LossChannel::new(gamma_t, thermal)?;
    // denominator − 1, regrouped so that M = 0 can never round below zero
    let margin = channel.transmissivity() * -(-2.0 * r).exp_m1()
        - 2.0 * thermal * -(-gamma_t).exp_m1();
    Ok(if margin >= 0.0 {
        EtaThreshold::Bound(1.0 / (1.0 + margin))
    } else {
        EtaThreshold::Impossible
    })
}

/// The squeezing bound `e^{−2r} ≤ (2M+1) − 2M e^{Γt}`.
pub fn squeezing_bound_holds(r: f64, gamma_t: f64, thermal: f64) -> bool {
    (-2.0 * r).exp() <= (2.0 * thermal + 1.0) - 2.0 * thermal * gamma_t.exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Samples double-homodyne outcomes `α`, applies `D(−α)` to each conditional
/// state and averages its fidelity with the coherent input `|z⟩`.
pub fn teleport_monte_carlo(
    z: Complex64,
    cfg: &TeleportConfig,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n_samples == 0 {
        return invalid_arg("Monte Carlo needs at least one sample");
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return invalid_arg("coherent amplitude must be finite");
    }
    let input = crate::gaussian::coherent(z);
    let setting = DoubleHomodyneSetting::new(input, cfg.eta)?;
    let kernel = double_homodyne_kernel(&cfg.resource()?, &setting)?;

    let to2 = |m: &DMatrix<f64>| Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let outcome_chol = to2(kernel.outcome_cov())
        .cholesky()
        .ok_or_else(|| Error::InvalidState("outcome covariance is not positive definite".into()))?;
    let sampler = outcome_chol.l();
    let outcome_mean = Vector2::new(kernel.outcome_mean()[0], kernel.outcome_mean()[1]);
    // Fidelity with |z⟩ is π N(μ − z; 0, V + I/4); V does not depend on α.
    let blurred = to2(kernel.conditional_cov()) + Matrix2::identity() * VACUUM_VARIANCE;
    let blurred_inv = blurred
        .try_inverse()
        .ok_or_else(|| Error::InvalidState("conditional covariance is singular".into()))?;
    let prefactor = PI / (TAU * blurred.determinant().sqrt());
    let target = Vector2::new(z.re, z.im);

    let mut rng = seeded_rng(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let xi = Vector2::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        let alpha = outcome_mean + sampler * xi;
        let conditional: DVector<f64> = kernel.conditional_mean(alpha.as_slice())?;
        let corrected = Vector2::new(conditional[0], conditional[1]) - alpha;
        let d = corrected - target;
        let f = prefactor * (-0.5 * d.dot(&(blurred_inv * d))).exp();
        sum += f;
        sum_sq += f * f;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let std_error = if n_samples > 1 {
        ((sum_sq - n * mean * mean).max(0.0) / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(MonteCarloEstimate { mean, std_error, samples: n_samples })
}
