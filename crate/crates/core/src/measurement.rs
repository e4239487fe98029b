//! Homodyne and double-homodyne measurements on Gaussian states.
//!
//! Both measurements are linear-Gaussian observations of one mode: the
//! outcome is `o = H q_m + offset + e` with `e ~ N(0, R)`. Conditioning is
//! the Schur complement of the joint covariance, which stays exact when
//! `R = 0` (ideal homodyne) because only the measured quadrature's row and
//! column enter. The flat conjugate direction of a homodyne POVM is never
//! materialized on this path.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid_arg, Error, Result};
use crate::gaussian::{
    displace, log_normal_density, marginal, rotation, transpose_wigner, GaussianOperator,
};
use crate::rng::seeded_rng;

fn check_efficiency(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return invalid_arg(format!("quantum efficiency must lie in (0, 1], got {eta}"));
    }
    Ok(())
}

/// Homodyne detection of `x_φ = x cos φ + y sin φ` on one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneSetting {
    mode: usize,
    phase: f64,
    eta: f64,
}

impl HomodyneSetting {
    pub fn new(mode: usize, phase: f64, eta: f64) -> Result<Self> {
        check_efficiency(eta)?;
        if !phase.is_finite() {
            return invalid_arg("homodyne phase must be finite");
        }
        Ok(HomodyneSetting { mode, phase: phase.rem_euclid(TAU), eta })
    }

    /// Ideal x-quadrature measurement.
    pub fn ideal(mode: usize) -> Self {
        HomodyneSetting { mode, phase: 0.0, eta: 1.0 }
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `σ²_η = (1 − η) / (4η)`.
    pub fn noise_variance(&self) -> f64 {
        (1.0 - self.eta) / (4.0 * self.eta)
    }

    fn observation_row(&self) -> [f64; 2] {
        let (s, c) = self.phase.sin_cos();
        [c, s]
    }
}

/// Generalized double homodyne with POVM built from a reference state.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleHomodyneSetting {
    reference: GaussianOperator,
    eta: f64,
}

impl DoubleHomodyneSetting {
    pub fn new(reference: GaussianOperator, eta: f64) -> Result<Self> {
        check_efficiency(eta)?;
        if reference.n_modes() != 1 {
            return invalid_arg(format!(
                "double-homodyne reference must be single-mode, got {} modes",
                reference.n_modes()
            ));
        }
        reference.ensure_physical()?;
        Ok(DoubleHomodyneSetting { reference, eta })
    }

    pub fn reference(&self) -> &GaussianOperator {
        &self.reference
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `Δ²_η = (1 − η) / η`, the width of the isotropic blur of the POVM.
    pub fn blur(&self) -> f64 {
        (1.0 - self.eta) / self.eta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalOutcome {
    /// Outcome probability density (per unit x for homodyne, per unit
    /// `d Re α d Im α` for double homodyne).
    pub probability_density: f64,
    /// Normalized conditional state of the unmeasured modes.
    pub state: GaussianOperator,
}

/// Precomputed Gaussian update for one measured mode. The conditional
/// covariance and gain do not depend on the outcome, so repeated
/// conditioning (sampling, sweeps over outcomes) reuses them.
#[derive(Debug, Clone)]
pub struct ConditioningKernel {
    outcome_mean: DVector<f64>,
    outcome_cov: DMatrix<f64>,
    gain: DMatrix<f64>,
    rest_mean: DVector<f64>,
    rest_cov: DMatrix<f64>,
    weight: f64,
}

impl ConditioningKernel {
    fn build(
        state: &GaussianOperator,
        mode: usize,
        observation: &DMatrix<f64>,
        offset: &DVector<f64>,
        noise: &DMatrix<f64>,
    ) -> Result<Self> {
        let n = state.n_modes();
        if n < 2 {
            return invalid_arg("conditioning needs at least two modes");
        }
        if mode >= n {
            return invalid_arg(format!("mode {mode} out of range for {n} modes"));
        }
        state.ensure_physical()?;
        let dim = 2 * n;
        let measured = [2 * mode, 2 * mode + 1];
        let rest: Vec<usize> = (0..dim).filter(|i| !measured.contains(i)).collect();
        let mean = state.mean();
        let cov = state.cov();

        let mean_m = DVector::from_fn(2, |i, _| mean[measured[i]]);
        let cov_mm = DMatrix::from_fn(2, 2, |i, j| cov[(measured[i], measured[j])]);
        let cov_rm = DMatrix::from_fn(rest.len(), 2, |i, j| cov[(rest[i], measured[j])]);
        let cov_rr = DMatrix::from_fn(rest.len(), rest.len(), |i, j| cov[(rest[i], rest[j])]);
        let rest_mean = DVector::from_fn(rest.len(), |i, _| mean[rest[i]]);

        let outcome_mean = observation * mean_m + offset;
        let outcome_cov = observation * cov_mm * observation.transpose() + noise;
        let outcome_cov = (&outcome_cov + outcome_cov.transpose()) * 0.5;
        let cross = cov_rm * observation.transpose();
        let chol = outcome_cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidState("outcome covariance is singular".into()))?;
        let gain = chol.solve(&cross.transpose()).transpose();
        let rest_cov = cov_rr - &gain * cross.transpose();
        let rest_cov = (&rest_cov + rest_cov.transpose()) * 0.5;
        Ok(ConditioningKernel {
            outcome_mean,
            outcome_cov,
            gain,
            rest_mean,
            rest_cov,
            weight: state.weight(),
        })
    }

    pub fn outcome_mean(&self) -> &DVector<f64> {
        &self.outcome_mean
    }

    pub fn outcome_cov(&self) -> &DMatrix<f64> {
        &self.outcome_cov
    }

    /// Maps outcome deviations to shifts of the conditional mean.
    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    /// Mean of the unmeasured modes before conditioning.
    pub fn prior_mean(&self) -> &DVector<f64> {
        &self.rest_mean
    }

    pub fn conditional_cov(&self) -> &DMatrix<f64> {
        &self.rest_cov
    }

    pub fn density(&self, outcome: &[f64]) -> Result<f64> {
        let d = self.deviation(outcome)?;
        Ok(self.weight * log_normal_density(&d, &self.outcome_cov)?.exp())
    }

    pub fn conditional_mean(&self, outcome: &[f64]) -> Result<DVector<f64>> {
        let d = self.deviation(outcome)?;
        Ok(&self.rest_mean + &self.gain * d)
    }

    pub fn condition(&self, outcome: &[f64]) -> Result<ConditionalOutcome> {
        let mean = self.conditional_mean(outcome)?;
        let state = GaussianOperator::new(mean, self.rest_cov.clone(), 1.0)?;
        Ok(ConditionalOutcome { probability_density: self.density(outcome)?, state })
    }

    fn deviation(&self, outcome: &[f64]) -> Result<DVector<f64>> {
        if outcome.len() != self.outcome_mean.len() || outcome.iter().any(|v| !v.is_finite()) {
            return invalid_arg(format!(
                "outcome must be {} finite numbers",
                self.outcome_mean.len()
            ));
        }
        Ok(DVector::from_column_slice(outcome) - &self.outcome_mean)
    }
}

pub fn homodyne_kernel(state: &GaussianOperator, setting: &HomodyneSetting) -> Result<ConditioningKernel> {
    let h = DMatrix::from_row_slice(1, 2, &setting.observation_row());
    let noise = DMatrix::from_element(1, 1, setting.noise_variance());
    ConditioningKernel::build(state, setting.mode, &h, &DVector::zeros(1), &noise)
}

/// Conditions `state` on homodyne outcome `x` at `setting.mode`. Returns the
/// outcome density and the conditional state of the remaining modes.
pub fn condition_homodyne(
    state: &GaussianOperator,
    setting: &HomodyneSetting,
    x: f64,
) -> Result<ConditionalOutcome> {
    homodyne_kernel(state, setting)?.condition(&[x])
}

/// Outcome distribution of a homodyne measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneDensity {
    pub mean: f64,
    pub variance: f64,
    weight: f64,
}

impl HomodyneDensity {
    pub fn pdf(&self, x: f64) -> f64 {
        let d = x - self.mean;
        self.weight * (-0.5 * d * d / self.variance).exp() / (TAU * self.variance).sqrt()
    }
}

/// Marginal quadrature variance plus detector noise `σ²_η`.
pub fn homodyne_density(state: &GaussianOperator, setting: &HomodyneSetting) -> Result<HomodyneDensity> {
    let single = marginal(state, &[setting.mode])?;
    let [c, s] = setting.observation_row();
    let m = single.mean();
    let v = single.cov();
    let mean = c * m[0] + s * m[1];
    let variance = c * c * v[(0, 0)] + 2.0 * c * s * v[(0, 1)] + s * s * v[(1, 1)] + setting.noise_variance();
    Ok(HomodyneDensity { mean, variance, weight: state.weight() })
}

/// Draws one homodyne outcome from a ChaCha20 stream seeded by `seed`.
pub fn sample_homodyne(state: &GaussianOperator, setting: &HomodyneSetting, seed: u64) -> Result<f64> {
    Ok(sample_homodyne_many(state, setting, seed, 1)?[0])
}

pub fn sample_homodyne_many(
    state: &GaussianOperator,
    setting: &HomodyneSetting,
    seed: u64,
    count: usize,
) -> Result<Vec<f64>> {
    let density = homodyne_density(state, setting)?;
    let normal = Normal::new(density.mean, density.variance.sqrt())
        .map_err(|e| Error::InvalidState(e.to_string()))?;
    let mut rng = seeded_rng(seed);
    Ok((0..count).map(|_| normal.sample(&mut rng)).collect())
}

/// Single-mode Wigner function of the noisy homodyne POVM element for
/// outcome `x`. The conjugate quadrature is given variance `flat_variance`
/// and the weight is scaled by `√(2π flat_variance)/π` so that `overlap`
/// with a single-mode state tends to the outcome density as the variance
/// grows. Only for inspection; conditioning never uses this surrogate.
pub fn homodyne_povm_wigner(setting: &HomodyneSetting, x: f64, flat_variance: f64) -> Result<GaussianOperator> {
    if setting.eta >= 1.0 {
        return invalid_arg("the ideal homodyne POVM is a delta function and has no Gaussian form");
    }
    if !(flat_variance.is_finite() && flat_variance > 0.0) {
        return invalid_arg("flat-direction variance must be positive and finite");
    }
    let rot = rotation(setting.phase);
    let local = Matrix2::new(setting.noise_variance(), 0.0, 0.0, flat_variance);
    let cov2 = rot * local * rot.transpose();
    let mean = rot * nalgebra::Vector2::new(x, 0.0);
    let cov = DMatrix::from_fn(2, 2, |i, j| cov2[(i, j)]);
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianOperator::new(
        DVector::from_vec(vec![mean[0], mean[1]]),
        cov,
        (TAU * flat_variance).sqrt() / PI,
    )
}

/// Wigner function of the double-homodyne POVM element for outcome `alpha`:
/// the transpose of the displaced reference, `W_σ(x − Re α, −y − Im α)`,
/// blurred isotropically by `Δ²_η / 2` per quadrature. Normalized so that
/// `∫ W d²q = 1`; the POVM resolves the identity under `d²α / π`.
pub fn double_homodyne_povm_wigner(setting: &DoubleHomodyneSetting, alpha: Complex64) -> Result<GaussianOperator> {
    let element = transpose_wigner(&displace(&setting.reference, 0, alpha)?);
    let cov = element.cov() + DMatrix::identity(2, 2) * (0.5 * setting.blur());
    GaussianOperator::new(element.mean().clone(), cov, 1.0)
}

/// Outcome `α` of the double homodyne on mode 0 of a two-mode state, written
/// as an observation `α = P q₀ − s − e` with `P = diag(1, −1)`,
/// `s ~ reference` and `e` the detector blur.
pub fn double_homodyne_kernel(
    state: &GaussianOperator,
    setting: &DoubleHomodyneSetting,
) -> Result<ConditioningKernel> {
    if state.n_modes() != 2 {
        return invalid_arg(format!(
            "double homodyne acts on a two-mode state, got {} modes",
            state.n_modes()
        ));
    }
    let reflect = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
    let offset = -setting.reference.mean();
    let noise = setting.reference.cov() + DMatrix::identity(2, 2) * (0.5 * setting.blur());
    ConditioningKernel::build(state, 0, &reflect, &offset, &noise)
}

/// Conditions mode 1 of `state` on the double-homodyne outcome `alpha`
/// measured on mode 0. The returned state is before the corrective
/// displacement `D(−α)`.
pub fn double_homodyne_condition(
    state: &GaussianOperator,
    setting: &DoubleHomodyneSetting,
    alpha: Complex64,
) -> Result<ConditionalOutcome> {
    double_homodyne_kernel(state, setting)?.condition(&[alpha.re, alpha.im])
}
