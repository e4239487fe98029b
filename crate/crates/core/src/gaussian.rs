//! Multimode Gaussian Wigner functions.
//!
//! A [`GaussianOperator`] is `weight · N(mean, cov)` over phase space. With
//! `weight = 1` and a physical covariance it is the Wigner function of a
//! Gaussian state; other weights describe unnormalized operators such as
//! blurred POVM elements.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, invalid_state, Error, Result};

/// Quadrature variance of the vacuum in the `x = (a + a†)/2` convention.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// Slack below 1/4 tolerated on symplectic eigenvalues before a covariance is
/// declared unphysical.
pub const PHYSICALITY_TOL: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GaussianRecord", try_from = "GaussianRecord")]
pub struct GaussianOperator {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    weight: f64,
}

/// Flat JSON layout: `cov` is stored row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GaussianRecord {
    n_modes: usize,
    mean: Vec<f64>,
    cov: Vec<f64>,
    weight: f64,
}

impl From<GaussianOperator> for GaussianRecord {
    fn from(op: GaussianOperator) -> Self {
        let dim = op.dim();
        let cov = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| op.cov[(i, j)])
            .collect();
        GaussianRecord {
            n_modes: op.n_modes(),
            mean: op.mean.iter().copied().collect(),
            cov,
            weight: op.weight,
        }
    }
}

impl TryFrom<GaussianRecord> for GaussianOperator {
    type Error = Error;

    fn try_from(rec: GaussianRecord) -> Result<Self> {
        let dim = 2 * rec.n_modes;
        if rec.mean.len() != dim || rec.cov.len() != dim * dim {
            return invalid_arg(format!(
                "record for {} modes needs mean of length {dim} and cov of length {}",
                rec.n_modes,
                dim * dim
            ));
        }
        GaussianOperator::new(
            DVector::from_vec(rec.mean),
            DMatrix::from_row_slice(dim, dim, &rec.cov),
            rec.weight,
        )
    }
}

impl GaussianOperator {
    /// Validates shape, symmetry, positive definiteness and weight. Physicality
    /// is not required here; see [`GaussianOperator::state`].
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, weight: f64) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return invalid_arg(format!("phase-space dimension must be even and nonzero, got {dim}"));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return invalid_arg(format!(
                "covariance is {}x{}, expected {dim}x{dim}",
                cov.nrows(),
                cov.ncols()
            ));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return invalid_arg(format!("weight must be positive and finite, got {weight}"));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return invalid_arg("mean and covariance must be finite");
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return invalid_arg(format!("covariance is not symmetric at ({i}, {j})"));
                }
            }
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        if cov.clone().cholesky().is_none() {
            return invalid_arg("covariance is not positive definite");
        }
        Ok(GaussianOperator { mean, cov, weight })
    }

    /// A normalized state; the covariance must satisfy the uncertainty principle.
    pub fn state(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let op = Self::new(mean, cov, 1.0)?;
        op.ensure_physical()?;
        Ok(op)
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Same shape with a different scalar weight.
    pub fn with_weight(&self, weight: f64) -> Result<Self> {
        Self::new(self.mean.clone(), self.cov.clone(), weight)
    }

    /// Symplectic eigenvalues in ascending order, one per mode.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        symplectic_eigenvalues(&self.cov)
    }

    pub fn is_physical(&self) -> bool {
        self.symplectic_eigenvalues()
            .iter()
            .all(|&nu| nu >= VACUUM_VARIANCE - PHYSICALITY_TOL)
    }

    pub fn ensure_physical(&self) -> Result<()> {
        let nus = self.symplectic_eigenvalues();
        match nus.iter().copied().find(|&nu| nu < VACUUM_VARIANCE - PHYSICALITY_TOL) {
            Some(nu) => invalid_state(format!(
                "symplectic eigenvalue {nu} is below the vacuum bound 1/4"
            )),
            None => Ok(()),
        }
    }

    /// `Tr[ρ²]` for a normalized state.
    pub fn purity(&self) -> f64 {
        let det = self.cov.determinant();
        1.0 / (4f64.powi(self.n_modes() as i32) * det.sqrt())
    }

    /// Applies `q ↦ T q` on one mode, with `T` a 2×2 matrix.
    fn map_mode(&self, mode: usize, t: &Matrix2<f64>) -> Self {
        let i = 2 * mode;
        let mut full = DMatrix::<f64>::identity(self.dim(), self.dim());
        full.view_mut((i, i), (2, 2)).copy_from(t);
        let mean = &full * &self.mean;
        let cov = &full * &self.cov * full.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        GaussianOperator { mean, cov, weight: self.weight }
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return invalid_arg(format!("mode {mode} out of range for {} modes", self.n_modes()));
        }
        Ok(())
    }
}

/// Symplectic spectrum from the eigenvalues of `(V^½ Ω V^½)ᵀ(V^½ Ω V^½)`,
/// which come in equal pairs `ν²`.
pub(crate) fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Vec<f64> {
    let dim = cov.nrows();
    if dim == 2 {
        return vec![cov.determinant().max(0.0).sqrt()];
    }
    let eig = SymmetricEigen::new(cov.clone());
    let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
    let omega = symplectic_form(dim / 2);
    let a = &root * omega * &root;
    let b = a.transpose() * &a;
    let b = (&b + b.transpose()) * 0.5;
    let mut squares: Vec<f64> = SymmetricEigen::new(b).eigenvalues.iter().copied().collect();
    squares.sort_by(f64::total_cmp);
    squares.chunks(2).map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt()).collect()
}

/// Block-diagonal `⊕ [[0, 1], [−1, 0]]` in `(x₁, y₁, …)` ordering.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Rotation of the phase-space plane of one mode by `angle`.
pub(crate) fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Symplectic squeeze matrix: the quadrature at angle `phase / 2` is scaled
/// by `e^{−r}` and its conjugate by `e^{r}`.
pub(crate) fn squeeze_matrix(r: f64, phase: f64) -> Matrix2<f64> {
    let rot = rotation(phase / 2.0);
    rot * Matrix2::new((-r).exp(), 0.0, 0.0, r.exp()) * rot.transpose()
}

pub fn vacuum(n_modes: usize) -> Result<GaussianOperator> {
    if n_modes == 0 {
        return invalid_arg("vacuum needs at least one mode");
    }
    let dim = 2 * n_modes;
    GaussianOperator::new(
        DVector::zeros(dim),
        DMatrix::identity(dim, dim) * VACUUM_VARIANCE,
        1.0,
    )
}

/// Coherent state `|z⟩`: a vacuum displaced to `(Re z, Im z)`.
pub fn coherent(z: Complex64) -> GaussianOperator {
    let mean = DVector::from_vec(vec![z.re, z.im]);
    GaussianOperator {
        mean,
        cov: DMatrix::identity(2, 2) * VACUUM_VARIANCE,
        weight: 1.0,
    }
}

/// Single-mode thermal state with mean photon number `n_th`.
pub fn thermal(n_th: f64) -> Result<GaussianOperator> {
    if !(n_th.is_finite() && n_th >= 0.0) {
        return invalid_arg(format!("thermal photon number must be >= 0, got {n_th}"));
    }
    let v = (2.0 * n_th + 1.0) * VACUUM_VARIANCE;
    GaussianOperator::new(DVector::zeros(2), DMatrix::identity(2, 2) * v, 1.0)
}

/// Twin-beam state with gain `r`.
///
/// `(x₁+x₂)/√2` and `(y₁−y₂)/√2` carry variance `e^{2r}/4`, while
/// `(x₁−x₂)/√2` and `(y₁+y₂)/√2` carry `e^{−2r}/4`. Each arm alone is
/// thermal with variance `cosh(2r)/4`.
pub fn twb(r: f64) -> Result<GaussianOperator> {
    if !(r.is_finite() && r >= 0.0) {
        return invalid_arg(format!("twin-beam gain must be finite and >= 0, got {r}"));
    }
    let plus = 0.25 * (2.0 * r).exp();
    let minus = 0.25 * (-2.0 * r).exp();
    let a = 0.5 * (plus + minus);
    let c = 0.5 * (plus - minus);
    #[rustfmt::skip]
    let cov = DMatrix::from_row_slice(4, 4, &[
        a,   0.0, c,   0.0,
        0.0, a,   0.0, -c,
        c,   0.0, a,   0.0,
        0.0, -c,  0.0, a,
    ]);
    GaussianOperator::new(DVector::zeros(4), cov, 1.0)
}

/// Total photon number `N = 2 sinh² r` of a twin beam.
pub fn photon_number(r: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return invalid_arg(format!("gain must be finite and >= 0, got {r}"));
    }
    Ok(2.0 * r.sinh().powi(2))
}

/// Inverse of [`photon_number`]: `r = asinh(√(N/2))`.
pub fn photon_number_to_squeezing(n: f64) -> Result<f64> {
    if !(n.is_finite() && n >= 0.0) {
        return invalid_arg(format!("photon number must be finite and >= 0, got {n}"));
    }
    Ok((n / 2.0).sqrt().asinh())
}

pub fn displace(op: &GaussianOperator, mode: usize, alpha: Complex64) -> Result<GaussianOperator> {
    op.check_mode(mode)?;
    let mut out = op.clone();
    out.mean[2 * mode] += alpha.re;
    out.mean[2 * mode + 1] += alpha.im;
    Ok(out)
}

pub fn squeeze(op: &GaussianOperator, mode: usize, r: f64, phase: f64) -> Result<GaussianOperator> {
    op.check_mode(mode)?;
    if !(r.is_finite() && phase.is_finite()) {
        return invalid_arg("squeeze parameters must be finite");
    }
    Ok(op.map_mode(mode, &squeeze_matrix(r, phase)))
}

/// Rotates the phase-space plane of `mode` by `angle`; after
/// `rotate(op, m, −φ)` the x quadrature of mode `m` is the old `x_φ`.
pub fn rotate(op: &GaussianOperator, mode: usize, angle: f64) -> Result<GaussianOperator> {
    op.check_mode(mode)?;
    if !angle.is_finite() {
        return invalid_arg("rotation angle must be finite");
    }
    Ok(op.map_mode(mode, &rotation(angle)))
}

/// `log` of the normal density `N(d; 0, cov)`.
pub(crate) fn log_normal_density(d: &DVector<f64>, cov: &DMatrix<f64>) -> Result<f64> {
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidState("covariance is not positive definite".into()))?;
    let solved = chol.solve(d);
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let k = d.len() as f64;
    Ok(-0.5 * (d.dot(&solved) + log_det + k * TAU.ln()))
}

pub fn wigner_eval(op: &GaussianOperator, point: &[f64]) -> Result<f64> {
    if point.len() != op.dim() {
        return invalid_arg(format!(
            "point has length {}, expected {}",
            point.len(),
            op.dim()
        ));
    }
    let d = DVector::from_column_slice(point) - &op.mean;
    Ok(op.weight * log_normal_density(&d, &op.cov)?.exp())
}

/// `π^n ∫ W_a W_b`, i.e. `Tr[a b]` for density operators.
pub fn overlap(a: &GaussianOperator, b: &GaussianOperator) -> Result<f64> {
    if a.n_modes() != b.n_modes() {
        return invalid_arg(format!(
            "overlap of {}-mode and {}-mode operators",
            a.n_modes(),
            b.n_modes()
        ));
    }
    let d = &a.mean - &b.mean;
    let sum = &a.cov + &b.cov;
    let density = log_normal_density(&d, &sum)?.exp();
    Ok(PI.powi(a.n_modes() as i32) * a.weight * b.weight * density)
}

/// Partial trace onto `keep_modes` (kept in the given order).
pub fn marginal(op: &GaussianOperator, keep_modes: &[usize]) -> Result<GaussianOperator> {
    if keep_modes.is_empty() {
        return invalid_arg("marginal needs at least one mode");
    }
    for (i, &m) in keep_modes.iter().enumerate() {
        op.check_mode(m)?;
        if keep_modes[..i].contains(&m) {
            return invalid_arg(format!("mode {m} listed twice"));
        }
    }
    let idx: Vec<usize> = keep_modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| op.mean[i]));
    let cov = DMatrix::from_fn(idx.len(), idx.len(), |i, j| op.cov[(idx[i], idx[j])]);
    Ok(GaussianOperator { mean, cov, weight: op.weight })
}

/// Wigner function of the transposed operator: `W(x, y) → W(x, −y)` on every mode.
pub fn transpose_wigner(op: &GaussianOperator) -> GaussianOperator {
    let sign = |i: usize| if i % 2 == 1 { -1.0 } else { 1.0 };
    let mean = DVector::from_fn(op.dim(), |i, _| sign(i) * op.mean[i]);
    let cov = DMatrix::from_fn(op.dim(), op.dim(), |i, j| sign(i) * sign(j) * op.cov[(i, j)]);
    GaussianOperator { mean, cov, weight: op.weight }
}

/// Single-mode state written as `D(α) S(r, phase) ν_th S† D†`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedThermalDecomposition {
    /// `(Re α, Im α)` in quadrature units.
    pub displacement: Complex64,
    pub squeeze_r: f64,
    /// In `[0, 2π)`; the squeezed quadrature sits at angle `phase / 2`.
    pub squeeze_phase: f64,
    pub n_th: f64,
}

impl SqueezedThermalDecomposition {
    pub fn reconstruct(&self) -> Result<GaussianOperator> {
        let nu = (2.0 * self.n_th + 1.0) * VACUUM_VARIANCE;
        let s = squeeze_matrix(self.squeeze_r, self.squeeze_phase);
        let cov2 = s * s.transpose() * nu;
        let cov = DMatrix::from_fn(2, 2, |i, j| cov2[(i, j)]);
        let cov = (&cov + cov.transpose()) * 0.5;
        let mean = DVector::from_vec(vec![self.displacement.re, self.displacement.im]);
        GaussianOperator::state(mean, cov)
    }

    /// Variance of the squeezed quadrature, `ν e^{−2r}`.
    pub fn squeezed_variance(&self) -> f64 {
        (2.0 * self.n_th + 1.0) * VACUUM_VARIANCE * (-2.0 * self.squeeze_r).exp()
    }
}

pub fn decompose_single_mode(op: &GaussianOperator) -> Result<SqueezedThermalDecomposition> {
    if op.n_modes() != 1 {
        return invalid_arg(format!("expected a single mode, got {}", op.n_modes()));
    }
    op.ensure_physical()?;
    let (a, b, d) = (op.cov[(0, 0)], op.cov[(0, 1)], op.cov[(1, 1)]);
    let nu = (a * d - b * b).sqrt();
    let n_th = ((4.0 * nu - 1.0) / 2.0).max(0.0);

    let half_trace = 0.5 * (a + d);
    let spread = (0.25 * (a - d).powi(2) + b * b).sqrt();
    let (lam_max, lam_min) = (half_trace + spread, half_trace - spread);
    // lam_min is computed as nu²/lam_max to avoid cancellation for strong squeezing.
    let lam_min = if lam_min < 1e-3 * lam_max { nu * nu / lam_max } else { lam_min };
    let squeeze_r = 0.25 * (lam_max / lam_min).ln();

    let squeeze_phase = if spread == 0.0 {
        0.0
    } else {
        let major = 0.5 * (2.0 * b).atan2(a - d);
        (2.0 * major + PI).rem_euclid(TAU)
    };
    Ok(SqueezedThermalDecomposition {
        displacement: Complex64::new(op.mean[0], op.mean[1]),
        squeeze_r,
        squeeze_phase,
        n_th,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn diag1(a: f64, b: f64) -> GaussianOperator {
        GaussianOperator::state(DVector::zeros(2), DMatrix::from_diagonal(&DVector::from_vec(vec![a, b])))
            .unwrap()
    }

    #[test]
    fn vacuum_shapes_and_peak() {
        let v1 = vacuum(1).unwrap();
        assert_eq!(v1.cov(), &(DMatrix::identity(2, 2) * 0.25));
        assert_eq!(v1.mean(), &DVector::zeros(2));
        let v2 = vacuum(2).unwrap();
        assert_eq!(v2.cov(), &(DMatrix::identity(4, 4) * 0.25));
        assert!(matches!(vacuum(0), Err(Error::InvalidArgument(_))));
        assert_abs_diff_eq!(wigner_eval(&v1, &[0.0, 0.0]).unwrap(), 2.0 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wigner_eval(&v1, &[0.0, 0.0]).unwrap(), 0.636_619_772_367_581_3, epsilon = 1e-15);
        assert_abs_diff_eq!(
            wigner_eval(&v1, &[1.0, 0.0]).unwrap(),
            2.0 / PI * (-2.0f64).exp(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn wigner_integrates_to_one() {
        let s = squeeze(&displace(&vacuum(1).unwrap(), 0, Complex64::new(0.3, -0.2)).unwrap(), 0, 0.4, 0.7)
            .unwrap();
        let h = 0.01;
        let mut total = 0.0;
        for i in -600..=600 {
            for j in -600..=600 {
                total += wigner_eval(&s, &[i as f64 * h, j as f64 * h]).unwrap();
            }
        }
        assert_abs_diff_eq!(total * h * h, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn wigner_dimension_mismatch() {
        let v = vacuum(2).unwrap();
        assert!(matches!(wigner_eval(&v, &[0.0, 0.0]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn twb_zero_is_vacuum() {
        let t = twb(0.0).unwrap();
        assert_eq!(t.cov(), vacuum(2).unwrap().cov());
        assert!(twb(-0.1).is_err());
        assert!(twb(f64::NAN).is_err());
    }

    #[test]
    fn twb_rotated_variances() {
        let r = (1.0 / 3f64.sqrt()).atanh();
        let t = twb(r).unwrap();
        let c = t.cov();
        let var = |u: [f64; 4]| -> f64 {
            let v = DVector::from_row_slice(&u) / 2f64.sqrt();
            v.dot(&(c * &v))
        };
        let plus = (2.0 + 3f64.sqrt()) / 4.0;
        let minus = (2.0 - 3f64.sqrt()) / 4.0;
        assert_abs_diff_eq!(var([1.0, 0.0, 1.0, 0.0]), plus, epsilon = 1e-12);
        assert_abs_diff_eq!(var([0.0, 1.0, 0.0, -1.0]), plus, epsilon = 1e-12);
        assert_abs_diff_eq!(var([1.0, 0.0, -1.0, 0.0]), minus, epsilon = 1e-12);
        assert_abs_diff_eq!(var([0.0, 1.0, 0.0, 1.0]), minus, epsilon = 1e-12);
        assert_abs_diff_eq!(plus, 0.933_012_701_892_219_3, epsilon = 1e-15);
        assert_abs_diff_eq!(minus, 0.066_987_298_107_780_68, epsilon = 1e-15);
        assert!(t.is_physical());
        assert_abs_diff_eq!(t.purity(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn twb_matches_explicit_wigner_formula() {
        let r = 0.8;
        let t = twb(r).unwrap();
        let sp = 0.25 * (2.0 * r).exp();
        let sm = 0.25 * (-2.0 * r).exp();
        let (x1, y1, x2, y2): (f64, f64, f64, f64) = (0.3, -0.4, 0.1, 0.9);
        let expected = (2.0 * PI * sp * 2.0 * PI * sm).recip()
            * (-(x1 + x2).powi(2) / (4.0 * sp)
                - (y1 + y2).powi(2) / (4.0 * sm)
                - (x1 - x2).powi(2) / (4.0 * sm)
                - (y1 - y2).powi(2) / (4.0 * sp))
                .exp();
        assert_abs_diff_eq!(wigner_eval(&t, &[x1, y1, x2, y2]).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn photon_number_values() {
        assert_eq!(photon_number(0.0).unwrap(), 0.0);
        let r = (1.0 / 3f64.sqrt()).atanh();
        assert_abs_diff_eq!(photon_number(r).unwrap(), 1.0, epsilon = 1e-14);
        for n in [0.1, 1.0, 10.0] {
            let back = photon_number(photon_number_to_squeezing(n).unwrap()).unwrap();
            assert_abs_diff_eq!(back, n, epsilon = 1e-12 * n.max(1.0));
        }
        assert!(photon_number(-1.0).is_err());
        assert!(photon_number_to_squeezing(-1.0).is_err());
    }

    #[test]
    fn twb_marginal_is_thermal() {
        for r in [0.0, 0.1, 0.5, 1.0, 2.0, 3.0] {
            let m = marginal(&twb(r).unwrap(), &[1]).unwrap();
            let n = photon_number(r).unwrap();
            assert_abs_diff_eq!(m.cov()[(0, 0)], (1.0 + n) / 4.0, epsilon = 1e-12 * (1.0 + n));
            assert_abs_diff_eq!(m.cov()[(1, 1)], (1.0 + n) / 4.0, epsilon = 1e-12 * (1.0 + n));
            assert_eq!(m.cov()[(0, 1)], 0.0);
        }
        let m = marginal(&twb((1.0 / 3f64.sqrt()).atanh()).unwrap(), &[0]).unwrap();
        assert_abs_diff_eq!(m.cov()[(0, 0)], 0.5, epsilon = 1e-14);
        assert_eq!(marginal(&vacuum(2).unwrap(), &[0]).unwrap(), vacuum(1).unwrap());
        assert!(marginal(&vacuum(2).unwrap(), &[]).is_err());
        assert!(marginal(&vacuum(2).unwrap(), &[2]).is_err());
        assert!(marginal(&vacuum(2).unwrap(), &[0, 0]).is_err());
    }

    #[test]
    fn displacement_rules() {
        let v = vacuum(1).unwrap();
        assert_eq!(displace(&v, 0, Complex64::new(0.0, 0.0)).unwrap(), v);
        let d = displace(&v, 0, Complex64::new(1.0, 2.0)).unwrap();
        assert_eq!(d.mean().as_slice(), &[1.0, 2.0]);
        assert_eq!(d.cov(), v.cov());
        let z = Complex64::new(0.37, -1.2);
        let back = displace(&displace(&v, 0, z).unwrap(), 0, -z).unwrap();
        assert_abs_diff_eq!((back.mean() - v.mean()).amax(), 0.0, epsilon = 1e-14);
        assert!(displace(&v, 1, z).is_err());
    }

    #[test]
    fn squeeze_rules() {
        let v = vacuum(1).unwrap();
        let r = 0.6;
        let s = squeeze(&v, 0, r, 0.0).unwrap();
        assert_abs_diff_eq!(s.cov()[(0, 0)], (-2.0 * r).exp() / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.cov()[(1, 1)], (2.0 * r).exp() / 4.0, epsilon = 1e-15);
        let back = squeeze(&s, 0, -r, 0.0).unwrap();
        assert_abs_diff_eq!((back.cov() - v.cov()).amax(), 0.0, epsilon = 1e-14);
        let s2 = squeeze(&v, 0, 0.5 * 2f64.ln(), 0.0).unwrap();
        assert_abs_diff_eq!(s2.cov()[(0, 0)], 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(s2.cov()[(1, 1)], 0.5, epsilon = 1e-15);
        assert!(squeeze(&v, 3, 0.1, 0.0).is_err());
        let shifted = squeeze(&coherent(Complex64::new(1.0, 1.0)), 0, r, 0.0).unwrap();
        assert_abs_diff_eq!(shifted.mean()[0], (-r).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(shifted.mean()[1], r.exp(), epsilon = 1e-15);
    }

    #[test]
    fn overlaps() {
        let v = vacuum(1).unwrap();
        assert_abs_diff_eq!(overlap(&v, &v).unwrap(), 1.0, epsilon = 1e-14);
        let z = Complex64::new(1.0, 0.0);
        let c = displace(&v, 0, z).unwrap();
        assert_abs_diff_eq!(overlap(&v, &c).unwrap(), (-1.0f64).exp(), epsilon = 1e-14);
        let z2 = Complex64::new(-0.4, 0.9);
        assert_abs_diff_eq!(
            overlap(&v, &coherent(z2)).unwrap(),
            (-z2.norm_sqr()).exp(),
            epsilon = 1e-14
        );
        for pure in [twb(0.7).unwrap(), squeeze(&v, 0, 1.1, 0.3).unwrap(), vacuum(3).unwrap()] {
            assert_abs_diff_eq!(overlap(&pure, &pure).unwrap(), 1.0, epsilon = 1e-10);
        }
        assert!(overlap(&v, &vacuum(2).unwrap()).is_err());
        // thermal purity 1/(2n+1)
        let th = thermal(1.0).unwrap();
        assert_abs_diff_eq!(overlap(&th, &th).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn transpose_rules() {
        let v = vacuum(1).unwrap();
        assert_eq!(transpose_wigner(&v), v);
        let s = squeeze(&coherent(Complex64::new(0.2, 0.5)), 0, 0.4, 1.0).unwrap();
        assert_eq!(transpose_wigner(&transpose_wigner(&s)), s);
        let t = transpose_wigner(&displace(&v, 0, Complex64::new(0.0, 1.0)).unwrap());
        assert_eq!(t.mean().as_slice(), &[0.0, -1.0]);
        let ts = transpose_wigner(&s);
        assert_eq!(ts.cov()[(0, 1)], -s.cov()[(0, 1)]);
        assert_eq!(ts.cov()[(0, 0)], s.cov()[(0, 0)]);
    }

    #[test]
    fn decompose_examples() {
        let d = decompose_single_mode(&diag1(0.125, 0.5)).unwrap();
        assert_abs_diff_eq!(d.n_th, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.squeeze_r, 0.5 * 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(d.squeeze_r, 0.346_573_590_279_972_6, epsilon = 1e-12);
        assert_abs_diff_eq!(d.squeeze_phase, 0.0, epsilon = 1e-12);

        let d = decompose_single_mode(&diag1(1.0 / 6.0, 0.5)).unwrap();
        // 2 n_th + 1 = 4 sqrt(1/12)
        assert_abs_diff_eq!(d.n_th, (4.0 * (1.0f64 / 12.0).sqrt() - 1.0) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.n_th, 0.077_350_269_189_625_76, epsilon = 1e-12);
        assert_abs_diff_eq!(d.squeeze_r, 0.25 * 3f64.ln(), epsilon = 1e-12);

        let d = decompose_single_mode(&diag1(0.75, 0.75)).unwrap();
        assert_abs_diff_eq!(d.n_th, 1.0, epsilon = 1e-12);
        assert_eq!(d.squeeze_r, 0.0);

        // squeezed along y has phase π
        let d = decompose_single_mode(&diag1(0.5, 0.125)).unwrap();
        assert_abs_diff_eq!(d.squeeze_phase, PI, epsilon = 1e-12);
    }

    #[test]
    fn decompose_rejects_bad_input() {
        let unphysical = GaussianOperator::new(
            DVector::zeros(2),
            DMatrix::from_diagonal(&DVector::from_vec(vec![0.1, 0.1])),
            1.0,
        )
        .unwrap();
        assert!(matches!(decompose_single_mode(&unphysical), Err(Error::InvalidState(_))));
        assert!(matches!(decompose_single_mode(&vacuum(2).unwrap()), Err(Error::InvalidArgument(_))));
        assert!(GaussianOperator::state(
            DVector::zeros(2),
            DMatrix::from_diagonal(&DVector::from_vec(vec![0.1, 0.1]))
        )
        .is_err());
    }

    #[test]
    fn constructor_validation() {
        let m = DVector::zeros(2);
        assert!(GaussianOperator::new(m.clone(), DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.3, 1.0]), 1.0).is_err());
        assert!(GaussianOperator::new(m.clone(), DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]), 1.0).is_err());
        assert!(GaussianOperator::new(m.clone(), DMatrix::identity(2, 2), 0.0).is_err());
        assert!(GaussianOperator::new(m.clone(), DMatrix::identity(3, 3), 1.0).is_err());
        assert!(GaussianOperator::new(DVector::zeros(3), DMatrix::identity(3, 3), 1.0).is_err());
        assert!(GaussianOperator::new(m, DMatrix::identity(2, 2), 2.5).is_ok());
    }

    #[test]
    fn symplectic_spectrum_of_product_and_twb() {
        let t = twb(1.3).unwrap();
        for nu in t.symplectic_eigenvalues() {
            assert_abs_diff_eq!(nu, 0.25, epsilon = 1e-10);
        }
        let v = vacuum(1).unwrap();
        let th = thermal(2.0).unwrap();
        let mut cov = DMatrix::zeros(4, 4);
        cov.view_mut((0, 0), (2, 2)).copy_from(v.cov());
        cov.view_mut((2, 2), (2, 2)).copy_from(th.cov());
        let nus = symplectic_eigenvalues(&cov);
        assert_abs_diff_eq!(nus[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(nus[1], 1.25, epsilon = 1e-12);
    }

    #[test]
    fn json_layout() {
        let s = squeeze(&coherent(Complex64::new(0.5, -1.0)), 0, 0.3, 0.8).unwrap();
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["n_modes"], 1);
        assert_eq!(json["mean"][1], s.mean()[1]);
        assert_eq!(json["cov"].as_array().unwrap().len(), 4);
        assert_eq!(json["cov"][1], json["cov"][2]);
        let back: GaussianOperator = serde_json::from_value(json).unwrap();
        assert_eq!(back, s);
        let bad = serde_json::json!({"n_modes": 1, "mean": [0.0], "cov": [1.0], "weight": 1.0});
        assert!(serde_json::from_value::<GaussianOperator>(bad).is_err());
    }

    fn arb_single_mode() -> impl Strategy<Value = SqueezedThermalDecomposition> {
        (-3.0..3.0f64, -3.0..3.0f64, 0.0..2.0f64, 0.0..TAU, 0.0..5.0f64).prop_map(|(x, y, r, phase, n_th)| {
            SqueezedThermalDecomposition {
                displacement: Complex64::new(x, y),
                squeeze_r: r,
                squeeze_phase: phase,
                n_th,
            }
        })
    }

    proptest! {
        #[test]
        fn decompose_reconstruct_roundtrip(d in arb_single_mode()) {
            let op = d.reconstruct().unwrap();
            let again = decompose_single_mode(&op).unwrap().reconstruct().unwrap();
            let scale = op.cov().amax();
            prop_assert!((op.cov() - again.cov()).amax() <= 1e-10 * scale);
            prop_assert!((op.mean() - again.mean()).amax() <= 1e-12);
            let dd = decompose_single_mode(&op).unwrap();
            prop_assert!((dd.n_th - d.n_th).abs() <= 1e-10 * (1.0 + d.n_th));
            prop_assert!((dd.squeeze_r - d.squeeze_r).abs() <= 1e-9);
        }

        #[test]
        fn symplectic_ops_stay_physical(
            ops in proptest::collection::vec((0usize..2, -0.7..0.7f64, 0.0..TAU, -2.0..2.0f64, -2.0..2.0f64), 1..6),
            r in 0.0..1.5f64,
        ) {
            let mut s = twb(r).unwrap();
            for (mode, sq, phase, dx, dy) in ops {
                s = squeeze(&s, mode, sq, phase).unwrap();
                s = displace(&s, mode, Complex64::new(dx, dy)).unwrap();
                s = rotate(&s, 1 - mode, phase).unwrap();
            }
            prop_assert!(s.is_physical());
            prop_assert!(s.cov().clone().cholesky().is_some());
            prop_assert!((s.purity() - 1.0).abs() < 1e-6);
        }

        #[test]
        fn overlap_is_symmetric(a in arb_single_mode(), b in arb_single_mode()) {
            let (a, b) = (a.reconstruct().unwrap(), b.reconstruct().unwrap());
            let ab = overlap(&a, &b).unwrap();
            let ba = overlap(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1e-300));
            prop_assert!(ab <= 1.0 + 1e-12);
        }

        #[test]
        fn twb_marginal_variance(r in 0.0..4.0f64) {
            let m = marginal(&twb(r).unwrap(), &[0]).unwrap();
            let expected = (1.0 + 2.0 * r.sinh().powi(2)) / 4.0;
            prop_assert!((m.cov()[(0, 0)] - expected).abs() <= 1e-12 * expected);
        }
    }
}
