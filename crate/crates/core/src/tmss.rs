//! The θ-parametrized two-mode squeezed state family.
//!
//! The TMSS with squeezing `r` has, in EPR coordinates, variances
//! `Var η = Var ν = e^{2r}/4` and `Var ξ = Var μ = e^{-2r}/4`. The
//! θ-parametrized member is obtained by rotating the collective `(η, μ)`
//! plane (see [`crate::vb_rotation`]). Its entanglement is quantified by the
//! impurity (linear entropy) of the reduced single-mode state,
//!
//! ```text
//! 𝓔(r, θ) = 1 − 2 / √(3 + cosh 4r + 2 cos 2θ · sinh² 2r)
//! ```
//!
//! which is a product state (`𝓔 = 0`) at θ = π/2, 3π/2 for every `r`.

use std::f64::consts::{FRAC_PI_2, LN_2};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::phase_space::{
    apply_transform, epr_basis_change, mode_rotation, purity, reduce, CovarianceMatrix,
    VACUUM_VARIANCE,
};

/// Largest squeezing accepted.
pub const MAX_SQUEEZING: f64 = 400.0;

/// `|cos θ|` below which θ is treated as exactly π/2 or 3π/2. This is the
/// resolution of a double-precision angle near 3π/2.
const PRODUCT_POINT_TOL: f64 = 1e-15;

/// Squeezing `r` and rotation angle `θ` labelling one member of the family.
///
/// Any finite angle is accepted; everything depends on θ only through
/// `cos² θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmssParams {
    r: f64,
    theta: f64,
}

impl TmssParams {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(0.0..=MAX_SQUEEZING).contains(&r) {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r,
                reason: "squeezing must lie in [0, 400]",
            });
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
                reason: "angle must be finite",
            });
        }
        Ok(Self { r, theta })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Impurity together with `log(1 − 𝓔)`, which stays finite for any `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpurityValue {
    pub value: f64,
    pub log_one_minus: f64,
}

impl ImpurityValue {
    fn from_log_one_minus(log_one_minus: f64) -> Self {
        Self {
            // `+ 0.0` turns −0 into +0 at the product point.
            value: -log_one_minus.exp_m1() + 0.0,
            log_one_minus,
        }
    }

    /// `log₁₀(1 − 𝓔)`.
    pub fn log10_one_minus(&self) -> f64 {
        self.log_one_minus / std::f64::consts::LN_10
    }
}

/// TMSS covariance in EPR ordering `(ξ, ν, η, μ)`.
fn tmss_epr_covariance(r: f64) -> CovarianceMatrix {
    let stretched = VACUUM_VARIANCE * (2.0 * r).exp();
    let squeezed = VACUUM_VARIANCE * (-2.0 * r).exp();
    CovarianceMatrix::from_trusted(DMatrix::from_diagonal(&DVector::from_column_slice(&[
        squeezed, stretched, stretched, squeezed,
    ])))
}

/// TMSS covariance in lab ordering `(x₁, p₁, x₂, p₂)`.
pub fn tmss_covariance(r: f64) -> Result<CovarianceMatrix> {
    let params = TmssParams::new(r, 0.0)?;
    let to_lab = epr_basis_change().as_transform().inverse();
    apply_transform(&tmss_epr_covariance(params.r), &to_lab)
}

/// Covariance of the θ-parametrized TMSS.
///
/// The Wigner function of this state is `W_θ(z) = W_0(V z)` with
/// `V = vb_rotation(θ)`, so the covariance is `V⁻¹ σ_TMSS V⁻ᵀ`. The rotation
/// is applied in the EPR frame, where `σ_TMSS` is diagonal; rotating the lab
/// matrix directly would cancel entries of size `e^{2r}`.
pub fn theta_tmss_covariance(params: TmssParams) -> Result<CovarianceMatrix> {
    let epr = tmss_epr_covariance(params.r);
    // (η, μ) is the second EPR mode; V⁻¹ rotates it by −θ.
    let rotated = apply_transform(&epr, &mode_rotation(-params.theta, 1, 2)?)?;
    let to_lab = epr_basis_change().as_transform().inverse();
    apply_transform(&rotated, &to_lab)
}

/// `ln sinh t` for `t > 0`, without overflow.
fn ln_sinh(t: f64) -> f64 {
    t + (-(-2.0 * t).exp_m1()).ln() - LN_2
}

/// `ln(1 + e^a)`.
fn softplus(a: f64) -> f64 {
    if a > 0.0 {
        a + (-a).exp().ln_1p()
    } else {
        a.exp().ln_1p()
    }
}

/// `log(1 − 𝓔)` given `c = cos² θ`.
///
/// Uses `3 + cosh 4r + 2 cos 2θ sinh² 2r = 4 (1 + cos²θ · sinh² 2r)`, so
/// `log(1 − 𝓔) = −½ ln(1 + cos²θ sinh² 2r)`, evaluated through
/// `ln(cos²θ) + 2 ln sinh 2r` to stay finite for large `r`.
fn log_one_minus_from_cos2(r: f64, cos2: f64) -> f64 {
    if r == 0.0 || cos2 == 0.0 {
        return 0.0;
    }
    let ln_x = cos2.ln() + 2.0 * ln_sinh(2.0 * r);
    -0.5 * softplus(ln_x)
}

fn cos_squared(theta: f64) -> f64 {
    let c = theta.cos();
    if c.abs() < PRODUCT_POINT_TOL {
        0.0
    } else {
        c * c
    }
}

/// Closed-form impurity `𝓔(r, θ)`.
pub fn impurity_closed_form(params: TmssParams) -> ImpurityValue {
    ImpurityValue::from_log_one_minus(log_one_minus_from_cos2(params.r, cos_squared(params.theta)))
}

/// Impurity at angle `π/2 − offset`, computed from `sin² offset` so that
/// tiny offsets keep full relative precision.
pub fn impurity_at_offset(r: f64, offset: f64) -> ImpurityValue {
    let s = offset.sin();
    ImpurityValue::from_log_one_minus(log_one_minus_from_cos2(r, s * s))
}

/// `1 − purity` of the reduced state, via congruence and block extraction.
pub fn impurity_from_covariance(params: TmssParams) -> Result<f64> {
    let sigma = theta_tmss_covariance(params)?;
    Ok(1.0 - purity(&reduce(&sigma, 0)?)?)
}

/// Angular distance `|θ* − π/2|` at which `𝓔(r, θ*) = level`, θ* on
/// `[0, π/2]`.
///
/// `𝓔` is increasing in the offset from π/2 on this interval, so the root is
/// found by bisection on the offset, iterated to machine resolution.
pub fn transition_width(r: f64, level: f64) -> Result<f64> {
    if !(r > 0.0 && r <= MAX_SQUEEZING) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            reason: "transition width needs 0 < r <= 400",
        });
    }
    let sup = impurity_at_offset(r, FRAC_PI_2).value;
    if !(level > 0.0 && level < sup) {
        return Err(Error::NotBracketed { r, level, sup });
    }
    let (mut lo, mut hi) = (0.0_f64, FRAC_PI_2);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if impurity_at_offset(r, mid).value < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
