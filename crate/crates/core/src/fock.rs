//! Brute-force reference in a truncated number basis.
//!
//! Nothing here touches the Gaussian engine except [`compare_remote_prep`],
//! which runs both and reports the discrepancies. Twin beams are built from
//! their number-basis expansion, homodyne projections use Hermite-function
//! wavefunctions, and detector noise is integrated with Gauss–Hermite
//! quadrature.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, invalid_state, Error, Result};
use crate::gaussian::twb;
use crate::measurement::{condition_homodyne, HomodyneSetting};
use crate::protocols::remote_prep;

/// Largest supported single-mode dimension `cutoff + 1`.
pub const MAX_DIMENSION: usize = 128;

/// Number-basis amplitudes of a one- or two-mode pure state truncated at
/// `cutoff` photons per mode. Two-mode amplitudes are stored row-major,
/// index `p * (cutoff + 1) + q` for `|p⟩|q⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    cutoff: usize,
    n_modes: usize,
    amps: Vec<Complex64>,
    leakage: f64,
}

impl FockVector {
    pub fn from_amplitudes(n_modes: usize, cutoff: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_cutoff(cutoff)?;
        if !(1..=2).contains(&n_modes) {
            return invalid_arg("Fock vectors hold one or two modes");
        }
        let expected = (cutoff + 1).pow(n_modes as u32);
        if amps.len() != expected {
            return invalid_arg(format!("expected {expected} amplitudes, got {}", amps.len()));
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !(norm_sqr > 0.0 && norm_sqr <= 1.0 + 1e-12) {
            return invalid_state(format!("squared norm {norm_sqr} outside (0, 1]"));
        }
        Ok(FockVector { cutoff, n_modes, amps, leakage: (1.0 - norm_sqr).max(0.0) })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability weight lost to truncation.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    fn amp(&self, p: usize, q: usize) -> Complex64 {
        self.amps[p * (self.cutoff + 1) + q]
    }
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff == 0 || cutoff + 1 > MAX_DIMENSION {
        return invalid_arg(format!(
            "cutoff must be between 1 and {}, got {cutoff}",
            MAX_DIMENSION - 1
        ));
    }
    Ok(())
}

/// `√(1−λ²) Σ_p λ^p |p⟩|p⟩` truncated at `cutoff`; leakage is `λ^{2(cutoff+1)}`.
pub fn twb_fock(lambda: f64, cutoff: usize) -> Result<FockVector> {
    if !(0.0..1.0).contains(&lambda) {
        return invalid_arg(format!("twin-beam parameter must lie in [0, 1), got {lambda}"));
    }
    check_cutoff(cutoff)?;
    let dim = cutoff + 1;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut amp = (1.0 - lambda * lambda).sqrt();
    for p in 0..dim {
        amps[p * dim + p] = Complex64::new(amp, 0.0);
        amp *= lambda;
    }
    Ok(FockVector {
        cutoff,
        n_modes: 2,
        amps,
        leakage: lambda.powi(2 * dim as i32),
    })
}

/// Quadrature wavefunctions `ψ_p(x) = ⟨p|x⟩` for `p = 0..=cutoff`, with
/// `x = (a + a†)/2`: `ψ_p(x) = (2/π)^{1/4} e^{−x²} H_p(√2 x)/√(2^p p!)`.
///
/// Uses the normalized three-term recurrence
/// `ψ_{p+1} = √(2/(p+1)) u ψ_p − √(p/(p+1)) ψ_{p−1}`, `u = √2 x`.
pub fn quadrature_wavefunction(x: f64, cutoff: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(cutoff + 1);
    let u = 2f64.sqrt() * x;
    psi.push((2.0 / PI).powf(0.25) * (-x * x).exp());
    if cutoff >= 1 {
        psi.push(2f64.sqrt() * u * psi[0]);
    }
    for p in 1..cutoff {
        let pf = p as f64;
        let next = (2.0 / (pf + 1.0)).sqrt() * u * psi[p] - (pf / (pf + 1.0)).sqrt() * psi[p - 1];
        psi.push(next);
    }
    psi
}

/// Gauss–Hermite rule for expectations under a standard normal:
/// `E[f(Z)] ≈ Σ wᵢ f(zᵢ)` with `Σ wᵢ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    /// Golub–Welsch: nodes are the eigenvalues of the Jacobi matrix of the
    /// probabilists' Hermite polynomials, weights the squared first
    /// eigenvector components.
    pub fn gauss_hermite(nodes: usize) -> Result<Self> {
        if nodes == 0 {
            return invalid_arg("quadrature needs at least one node");
        }
        let mut jacobi = DMatrix::zeros(nodes, nodes);
        for k in 1..nodes {
            let b = (k as f64).sqrt();
            jacobi[(k, k - 1)] = b;
            jacobi[(k - 1, k)] = b;
        }
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..nodes)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Ok(QuadratureGrid {
            points: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `E[f(mean + std·Z)]`.
    pub fn expectation(&self, mean: f64, std: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(mean + std * z))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockConditional {
    pub density: f64,
    /// Normalized density matrix of mode 2.
    pub rho: DMatrix<Complex64>,
}

/// Mode-2 amplitudes `⟨y|₁ ψ⟩` (unnormalized).
fn project_first_mode(state: &FockVector, y: f64) -> DVector<Complex64> {
    let dim = state.cutoff + 1;
    let psi = quadrature_wavefunction(y, state.cutoff);
    DVector::from_fn(dim, |q, _| {
        (0..dim).map(|p| state.amp(p, q) * psi[p]).sum::<Complex64>()
    })
}

/// Homodyne on mode 1 with outcome `x` and efficiency `eta`. For `eta = 1`
/// this is the projection `⟨x|₁`; otherwise the projections are mixed with
/// a Gaussian of variance `(1−η)/(4η)` around `x`.
pub fn condition_fock(state: &FockVector, x: f64, eta: f64, grid: &QuadratureGrid) -> Result<FockConditional> {
    if state.n_modes != 2 {
        return invalid_arg("conditioning needs a two-mode Fock vector");
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return invalid_arg(format!("quantum efficiency must lie in (0, 1], got {eta}"));
    }
    if !x.is_finite() {
        return invalid_arg("homodyne outcome must be finite");
    }
    let dim = state.cutoff + 1;
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    if eta == 1.0 {
        let phi = project_first_mode(state, x);
        rho += &phi * phi.adjoint();
    } else {
        if grid.is_empty() {
            return invalid_arg("empty quadrature grid");
        }
        let std = ((1.0 - eta) / (4.0 * eta)).sqrt();
        for (&z, &w) in grid.points.iter().zip(&grid.weights) {
            let phi = project_first_mode(state, x + std * z);
            rho += (&phi * phi.adjoint()) * Complex64::new(w, 0.0);
        }
    }
    let density = rho.trace().re;
    if density.is_nan() || density <= 1e-300 {
        return Err(Error::DegenerateOutcome(format!(
            "outcome x = {x} has vanishing probability density"
        )));
    }
    rho /= Complex64::new(density, 0.0);
    Ok(FockConditional { density, rho })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMoments {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
    pub purity: f64,
}

fn annihilation(dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn expect(rho: &DMatrix<Complex64>, op: &DMatrix<Complex64>) -> Complex64 {
    (rho * op).trace()
}

/// Quadrature moments in the `x = (a + a†)/2` convention. Second moments
/// use normal-ordered forms (`a a† = a†a + 1`) so the top Fock level is
/// not distorted by truncation.
pub fn moments_fock(rho: &DMatrix<Complex64>) -> Result<QuadratureMoments> {
    if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
        return invalid_arg("density matrix must be square and nonempty");
    }
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > 1e-8 || trace.im.abs() > 1e-8 {
        return invalid_state(format!("density matrix trace is {trace}, expected 1"));
    }
    let dim = rho.nrows();
    let a = annihilation(dim);
    let ad = a.adjoint();
    let a2 = &a * &a;
    let ad2 = &ad * &ad;
    let number = &ad * &a;
    let id = DMatrix::<Complex64>::identity(dim, dim);
    let i = Complex64::new(0.0, 1.0);
    let quarter = Complex64::new(0.25, 0.0);

    let mean_a = expect(rho, &a);
    let mean_x = mean_a.re;
    let mean_y = mean_a.im;
    let two = Complex64::new(2.0, 0.0);
    let x2 = (&a2 + &ad2 + &number * two + &id) * quarter;
    let y2 = (&number * two + &id - &a2 - &ad2) * quarter;
    let sym_xy = (&a2 - &ad2) * (quarter / i);
    let var_x = expect(rho, &x2).re - mean_x * mean_x;
    let var_y = expect(rho, &y2).re - mean_y * mean_y;
    let cov_xy = expect(rho, &sym_xy).re - mean_x * mean_y;
    let purity = (rho * rho).trace().re;
    Ok(QuadratureMoments { mean_x, mean_y, var_x, var_y, cov_xy, purity })
}

/// Diagonal thermal density matrix truncated at `cutoff` (not renormalized).
pub fn thermal_fock(n_th: f64, cutoff: usize) -> Result<DMatrix<Complex64>> {
    check_cutoff(cutoff)?;
    if !(n_th.is_finite() && n_th >= 0.0) {
        return invalid_arg("thermal photon number must be finite and >= 0");
    }
    let ratio = n_th / (1.0 + n_th);
    Ok(DMatrix::from_fn(cutoff + 1, cutoff + 1, |i, j| {
        if i == j {
            Complex64::new(ratio.powi(i as i32) / (1.0 + n_th), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Tolerances and discretization of an oracle comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub cutoff: usize,
    pub nodes: usize,
    /// Largest tolerated truncation leakage `λ^{2(cutoff+1)}`.
    pub leakage_bound: f64,
    pub moment_tol: f64,
    pub purity_tol: f64,
    pub density_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            cutoff: 40,
            nodes: 40,
            leakage_bound: 1e-6,
            moment_tol: 1e-5,
            purity_tol: 1e-4,
            density_tol: 1e-6,
        }
    }
}

impl OracleConfig {
    pub fn check_leakage(&self, lambda: f64) -> Result<f64> {
        let leakage = lambda.powi(2 * (self.cutoff as i32 + 1));
        if leakage > self.leakage_bound {
            return Err(Error::Leakage {
                lambda,
                cutoff: self.cutoff,
                leakage,
                bound: self.leakage_bound,
            });
        }
        Ok(leakage)
    }
}

/// Oracle-versus-Gaussian comparison for one `(λ, η, x)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub lambda: f64,
    pub eta: f64,
    pub x: f64,
    pub leakage: f64,
    pub oracle: QuadratureMoments,
    /// Largest absolute difference over the five quadrature moments.
    pub moment_discrepancy: f64,
    /// `|purity − 1/(2 n_th + 1)|` with `n_th` from the closed form.
    pub purity_discrepancy: f64,
    pub density_discrepancy: f64,
    pub passed: bool,
}

pub fn compare_remote_prep(lambda: f64, eta: f64, x: f64, cfg: &OracleConfig) -> Result<OracleComparison> {
    let leakage = cfg.check_leakage(lambda)?;
    let grid = QuadratureGrid::gauss_hermite(cfg.nodes)?;
    let fock = twb_fock(lambda, cfg.cutoff)?;
    let conditional = condition_fock(&fock, x, eta, &grid)?;
    let oracle = moments_fock(&conditional.rho)?;

    let r = lambda.atanh();
    let gaussian = condition_homodyne(&twb(r)?, &HomodyneSetting::new(0, 0.0, eta)?, x)?;
    let mean = gaussian.state.mean();
    let cov = gaussian.state.cov();
    let moment_discrepancy = [
        oracle.mean_x - mean[0],
        oracle.mean_y - mean[1],
        oracle.var_x - cov[(0, 0)],
        oracle.var_y - cov[(1, 1)],
        oracle.cov_xy - cov[(0, 1)],
    ]
    .iter()
    .fold(0.0f64, |acc, d| acc.max(d.abs()));
    let closed = remote_prep(r, eta, x)?;
    let purity_discrepancy = (oracle.purity - 1.0 / (2.0 * closed.n_th + 1.0)).abs();
    let density_discrepancy = (conditional.density - gaussian.probability_density).abs();
    let passed = moment_discrepancy <= cfg.moment_tol
        && purity_discrepancy <= cfg.purity_tol
        && density_discrepancy <= cfg.density_tol;
    Ok(OracleComparison {
        lambda,
        eta,
        x,
        leakage,
        oracle,
        moment_discrepancy,
        purity_discrepancy,
        density_discrepancy,
        passed,
    })
}

/// Runs [`compare_remote_prep`] over the Cartesian grid in parallel; results
/// come back in `lambda`-major, then `eta`, then `x` order.
pub fn oracle_grid(
    lambdas: &[f64],
    etas: &[f64],
    xs: &[f64],
    cfg: &OracleConfig,
) -> Vec<Result<OracleComparison>> {
    let points: Vec<(f64, f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| etas.iter().flat_map(move |&e| xs.iter().map(move |&x| (l, e, x))))
        .collect();
    points
        .par_iter()
        .map(|&(l, e, x)| compare_remote_prep(l, e, x, cfg))
        .collect()
}
