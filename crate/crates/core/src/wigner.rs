//! Brute-force Wigner-grid quadrature.
//!
//! This module only sees a [`CovarianceMatrix`] and pointwise Gaussian
//! evaluation. It never consults the closed-form impurity, so agreement with
//! [`crate::tmss::impurity_closed_form`] is an independent check.
//!
//! The 4D integrals run over a uniform cell-centred grid, streamed as nested
//! sums without materializing the tensor. The innermost axis is evaluated
//! with an exact multiplicative recurrence for the Gaussian along a line
//! (two multiplications per point instead of an `exp`), started at the
//! line's peak so values only shrink and underflow harmlessly.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix4};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase_space::CovarianceMatrix;
use crate::summation::pairwise_sum;
use crate::tmss::{theta_tmss_covariance, TmssParams};

/// Largest squeezing at which the oracle is considered resolvable.
pub const ORACLE_MAX_R: f64 = 1.0;
/// Tolerance on `∫W = 1` before any quadrature result is trusted.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Evaluatable zero-mean Gaussian Wigner function.
#[derive(Debug, Clone)]
pub struct WignerGaussian {
    inv_cov: DMatrix<f64>,
    norm: f64,
    dim: usize,
}

impl WignerGaussian {
    pub fn new(state: &CovarianceMatrix) -> Result<Self> {
        let det = state.determinant();
        if !(det > 0.0) {
            return Err(Error::InvalidState(det));
        }
        let inv_cov = state
            .matrix()
            .clone()
            .try_inverse()
            .ok_or(Error::InvalidState(det))?;
        let n = state.n_modes() as i32;
        Ok(Self {
            inv_cov,
            norm: 1.0 / ((2.0 * PI).powi(n) * det.sqrt()),
            dim: state.dim(),
        })
    }

    pub fn inv_cov(&self) -> &DMatrix<f64> {
        &self.inv_cov
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `W(z) = norm · exp(−½ zᵀσ⁻¹z)`.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        let mut q = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                q += point[i] * self.inv_cov[(i, j)] * point[j];
            }
        }
        Ok(self.norm * (-0.5 * q).exp())
    }
}

/// Pointwise Wigner function of a Gaussian state.
pub fn wigner_eval(state: &CovarianceMatrix, point: &[f64]) -> Result<f64> {
    WignerGaussian::new(state)?.eval(point)
}

/// Uniform grid specification: `points` per axis over `±sigmas·std`, with
/// each axis standard deviation read from the covariance diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    points: usize,
    sigmas: f64,
}

impl QuadratureGrid {
    pub const MIN_POINTS: usize = 32;
    pub const MIN_SIGMAS: f64 = 6.0;

    pub fn new(points: usize, sigmas: f64) -> Result<Self> {
        if points < Self::MIN_POINTS {
            return Err(Error::InvalidParameter {
                name: "grid points",
                value: points as f64,
                reason: "need at least 32 points per axis",
            });
        }
        if !(sigmas >= Self::MIN_SIGMAS && sigmas.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "grid sigmas",
                value: sigmas,
                reason: "half-extent must cover at least 6 standard deviations",
            });
        }
        Ok(Self { points, sigmas })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn sigmas(&self) -> f64 {
        self.sigmas
    }

    /// Cell centres and cell width for an axis with standard deviation `std`.
    pub fn axis(&self, std: f64) -> (Vec<f64>, f64) {
        let half = self.sigmas * std;
        let h = 2.0 * half / self.points as f64;
        let nodes = (0..self.points)
            .map(|i| -half + (i as f64 + 0.5) * h)
            .collect();
        (nodes, h)
    }
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            points: 160,
            sigmas: 8.0,
        }
    }
}

/// Everything one pass over a two-mode grid produces.
#[derive(Debug, Clone, PartialEq)]
pub struct GridIntegrals {
    /// `∫W`.
    pub normalization: f64,
    /// `∫ M(x₁, p₁)² dx₁ dp₁` with `M` the marginal of mode 1.
    pub marginal_square: f64,
    /// `∫ z_i z_j W`.
    pub second_moments: Matrix4<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
struct RowSums {
    norm: f64,
    marginal_sq: f64,
    // upper triangle of the moment matrix, row-major
    moments: [f64; 10],
}

impl std::ops::Add for RowSums {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.norm += rhs.norm;
        self.marginal_sq += rhs.marginal_sq;
        for (a, b) in self.moments.iter_mut().zip(rhs.moments) {
            *a += b;
        }
        self
    }
}

const MOMENT_INDEX: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

/// Sums of `g_l`, `g_l·t_l`, `g_l·t_l²` where `g_l = exp(c + b t_l − ½ a t_l²)`
/// on the nodes `t_l = t0 + l h`.
///
/// The exponent is concave in `l`, so the recurrence starts at the nearest
/// node to the peak and walks outwards; every step multiplies by a ratio
/// that itself evolves by the constant factor `exp(−a h²)`.
fn gaussian_line_sums(c: f64, b: f64, a: f64, t0: f64, h: f64, n: usize) -> [f64; 3] {
    let exponent = |t: f64| c + b * t - 0.5 * a * t * t;
    let peak = b / a;
    let l_star = (((peak - t0) / h).round().max(0.0) as usize).min(n - 1);
    let t_star = t0 + l_star as f64 * h;
    let g_star = exponent(t_star).exp();
    let step = (-a * h * h).exp();

    let mut s = [g_star, g_star * t_star, g_star * t_star * t_star];

    // Forward: g_{l+1}/g_l = exp(b h − a h² (l − l*) − a h t* − ½ a h²).
    let mut g = g_star;
    let mut ratio = ((b - a * t_star) * h - 0.5 * a * h * h).exp();
    for l in l_star + 1..n {
        g *= ratio;
        ratio *= step;
        if g == 0.0 {
            break;
        }
        let t = t0 + l as f64 * h;
        s[0] += g;
        s[1] += g * t;
        s[2] += g * t * t;
    }
    // Backward.
    let mut g = g_star;
    let mut ratio = (-(b - a * t_star) * h - 0.5 * a * h * h).exp();
    for l in (0..l_star).rev() {
        g *= ratio;
        ratio *= step;
        if g == 0.0 {
            break;
        }
        let t = t0 + l as f64 * h;
        s[0] += g;
        s[1] += g * t;
        s[2] += g * t * t;
    }
    s
}

/// One streamed pass over the 4D grid of a two-mode state.
///
/// Parallel over the outermost axis; row partials are combined by a
/// pairwise tree in grid order, so the result does not depend on the
/// thread count.
pub fn integrate_two_mode(
    state: &CovarianceMatrix,
    grid: &QuadratureGrid,
) -> Result<GridIntegrals> {
    if state.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: state.dim(),
        });
    }
    let w = WignerGaussian::new(state)?;
    let a = w.inv_cov();
    let axes: Vec<(Vec<f64>, f64)> = (0..4).map(|k| grid.axis(state.get(k, k).sqrt())).collect();
    let (x1s, hx1) = &axes[0];
    let (p1s, hp1) = &axes[1];
    let (x2s, hx2) = &axes[2];
    let (p2s, hp2) = &axes[3];
    let n = grid.points();
    let inner_area = hx2 * hp2;
    let outer_area = hx1 * hp1;
    let ln_norm = w.norm().ln();

    let rows: Vec<RowSums> = x1s
        .par_iter()
        .map(|&x1| {
            let mut row = RowSums::default();
            for &p1 in p1s {
                // Exponent pieces not involving p₂.
                let q_a = a[(0, 0)] * x1 * x1 + 2.0 * a[(0, 1)] * x1 * p1 + a[(1, 1)] * p1 * p1;
                let lin_x2 = a[(0, 2)] * x1 + a[(1, 2)] * p1;
                let lin_p2 = a[(0, 3)] * x1 + a[(1, 3)] * p1;
                // Weighted inner sums over (x₂, p₂): 1, x₂, p₂, x₂², x₂p₂, p₂².
                let mut m = [0.0_f64; 6];
                for &x2 in x2s {
                    let c = ln_norm - 0.5 * (q_a + 2.0 * lin_x2 * x2 + a[(2, 2)] * x2 * x2);
                    let b = -(lin_p2 + a[(2, 3)] * x2);
                    let [s0, s1, s2] = gaussian_line_sums(c, b, a[(3, 3)], p2s[0], *hp2, n);
                    m[0] += s0;
                    m[1] += s0 * x2;
                    m[2] += s1;
                    m[3] += s0 * x2 * x2;
                    m[4] += s1 * x2;
                    m[5] += s2;
                }
                let marginal = m[0] * inner_area;
                let cell = outer_area * inner_area;
                row.norm += m[0] * cell;
                row.marginal_sq += marginal * marginal * outer_area;
                let mo = &mut row.moments;
                mo[0] += x1 * x1 * m[0] * cell;
                mo[1] += x1 * p1 * m[0] * cell;
                mo[2] += x1 * m[1] * cell;
                mo[3] += x1 * m[2] * cell;
                mo[4] += p1 * p1 * m[0] * cell;
                mo[5] += p1 * m[1] * cell;
                mo[6] += p1 * m[2] * cell;
                mo[7] += m[3] * cell;
                mo[8] += m[4] * cell;
                mo[9] += m[5] * cell;
            }
            row
        })
        .collect();
    let total = pairwise_sum(&rows);

    let mut moments = Matrix4::zeros();
    for (k, &(i, j)) in MOMENT_INDEX.iter().enumerate() {
        moments[(i, j)] = total.moments[k];
        moments[(j, i)] = total.moments[k];
    }
    Ok(GridIntegrals {
        normalization: total.norm,
        marginal_square: total.marginal_sq,
        second_moments: moments,
    })
}

fn check_oracle_range(params: &TmssParams) -> Result<()> {
    if params.r() > ORACLE_MAX_R {
        return Err(Error::InvalidParameter {
            name: "r",
            value: params.r(),
            reason: "quadrature oracle is limited to r <= 1",
        });
    }
    Ok(())
}

fn check_normalization(integrals: &GridIntegrals) -> Result<()> {
    if (integrals.normalization - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::UnderResolved(integrals.normalization));
    }
    Ok(())
}

/// `1 − prefactor·∫M²` for the mode-1 marginal `M` of a two-mode state.
///
/// The physical prefactor is `π` (single-mode `tr ρ² = π ∫W²` with vacuum
/// variance 1/4); other values exist only to exercise regression checks.
pub fn marginal_impurity_by_quadrature(
    state: &CovarianceMatrix,
    grid: &QuadratureGrid,
    prefactor: f64,
) -> Result<f64> {
    let integrals = integrate_two_mode(state, grid)?;
    check_normalization(&integrals)?;
    Ok(1.0 - prefactor * integrals.marginal_square)
}

/// Impurity of the θ-TMSS from grid quadrature of its Wigner function.
pub fn quadrature_impurity(params: TmssParams, grid: &QuadratureGrid) -> Result<f64> {
    check_oracle_range(&params)?;
    let state = theta_tmss_covariance(params)?;
    marginal_impurity_by_quadrature(&state, grid, PI)
}

/// Grid moments compared entrywise with the constructed covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCheck {
    pub measured: Matrix4<f64>,
    pub expected: Matrix4<f64>,
    /// Relative error, or absolute error where the expected entry is zero.
    pub errors: Matrix4<f64>,
}

impl MomentCheck {
    /// Entries with `|expected|` below this are compared absolutely.
    pub const ZERO_ENTRY: f64 = 1e-12;
    pub const RELATIVE_TOL: f64 = 1e-4;
    pub const ABSOLUTE_TOL: f64 = 1e-8;

    pub fn max_error(&self) -> f64 {
        self.errors.amax()
    }

    /// Largest error normalized by its own tolerance; `≤ 1` means pass.
    pub fn worst_ratio(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let tol = if self.expected[(i, j)].abs() < Self::ZERO_ENTRY {
                    Self::ABSOLUTE_TOL
                } else {
                    Self::RELATIVE_TOL
                };
                worst = worst.max(self.errors[(i, j)] / tol);
            }
        }
        worst
    }

    pub fn passes(&self) -> bool {
        self.worst_ratio() <= 1.0
    }
}

/// Second moments of `W` on the grid against the constructed covariance.
pub fn moment_check(params: TmssParams, grid: &QuadratureGrid) -> Result<MomentCheck> {
    check_oracle_range(&params)?;
    let state = theta_tmss_covariance(params)?;
    moment_check_state(&state, grid)
}

pub fn moment_check_state(state: &CovarianceMatrix, grid: &QuadratureGrid) -> Result<MomentCheck> {
    let integrals = integrate_two_mode(state, grid)?;
    check_normalization(&integrals)?;
    Ok(compare_moments(state, &integrals))
}

/// Impurity (with the given purity prefactor) and moment check from a
/// single grid pass.
pub fn impurity_and_moments(
    state: &CovarianceMatrix,
    grid: &QuadratureGrid,
    prefactor: f64,
) -> Result<(f64, MomentCheck)> {
    let integrals = integrate_two_mode(state, grid)?;
    check_normalization(&integrals)?;
    Ok((
        1.0 - prefactor * integrals.marginal_square,
        compare_moments(state, &integrals),
    ))
}

fn compare_moments(state: &CovarianceMatrix, integrals: &GridIntegrals) -> MomentCheck {
    let measured = integrals.second_moments;
    let mut expected = Matrix4::zeros();
    let mut errors = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let e = state.get(i, j);
            expected[(i, j)] = e;
            let diff = (measured[(i, j)] - e).abs();
            errors[(i, j)] = if e.abs() < MomentCheck::ZERO_ENTRY {
                diff
            } else {
                diff / e.abs()
            };
        }
    }
    MomentCheck {
        measured,
        expected,
        errors,
    }
}
