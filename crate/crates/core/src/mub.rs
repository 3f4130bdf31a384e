//! Rotated-quadrature bases and their overlaps.
//!
//! `|y, θ⟩` is the eigenstate of `cos θ·x + sin θ·p` with eigenvalue `y`,
//! obtained from the position eigenstate by the phase-space rotation
//! `U†(θ) = e^{iθ a†a}`. Its position representation is
//!
//! ```text
//! K(x; y, θ) = (2π |sin θ|)^{-1/2} · exp(−i [(y² + x²) cos θ − 2 y x] / (2 sin θ))
//! ```
//!
//! Overlaps between two bases are improper (Fresnel) integrals. They are
//! computed with a Gaussian damping `e^{−εx²}` over a decreasing schedule of
//! `ε`, and the complex logarithm of the results is extrapolated to `ε = 0`
//! with a quadratic through the three smallest `ε`.
//!
//! The kernel above omits the phase `e^{i(π/4 − θ/2)}` (for `0 < θ < π`)
//! that the exact matrix element `⟨x|U†(θ)|y⟩` carries. Moduli do not care;
//! [`fourier_check`] restores it and reports the offset the bare kernels
//! produce.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

/// `|sin θ|` at or below which the kernel is a delta function.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Smallest `|sin(θ₁ − θ₂)|` for which two bases are compared.
pub const MIN_ANGLE_SEPARATION: f64 = 1e-3;
/// Successive extrapolated estimates must agree to this.
pub const CAUCHY_TOL: f64 = 1e-3;

/// Position-representation kernel `⟨x|y, θ⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MubKernel {
    y: f64,
    theta: f64,
    sin: f64,
    cos: f64,
}

impl MubKernel {
    pub fn new(y: f64, theta: f64) -> Result<Self> {
        if !y.is_finite() || !theta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "kernel label",
                value: if y.is_finite() { theta } else { y },
                reason: "must be finite",
            });
        }
        let (sin, cos) = theta.sin_cos();
        if sin.abs() <= DEGENERACY_TOL {
            return Err(Error::DegenerateKernel(theta));
        }
        Ok(Self { y, theta, sin, cos })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `|K| = (2π |sin θ|)^{-1/2}`, independent of `x`.
    pub fn modulus(&self) -> f64 {
        (TAU * self.sin.abs()).sqrt().recip()
    }

    pub fn phase(&self, x: f64) -> f64 {
        -((self.y * self.y + x * x) * self.cos - 2.0 * self.y * x) / (2.0 * self.sin)
    }

    /// `dφ/dx`.
    pub fn phase_rate(&self, x: f64) -> f64 {
        -(x * self.cos - self.y) / self.sin
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        Complex64::from_polar(self.modulus(), self.phase(x))
    }

    /// Phase that turns this kernel into `⟨x|U†(θ)|y⟩`.
    pub fn convention_phase(&self) -> f64 {
        convention_phase(self.theta)
    }
}

pub fn kernel_eval(k: &MubKernel, x: f64) -> Complex64 {
    k.eval(x)
}

/// `arg ⟨x|U†(θ)|y⟩ − arg K(x; y, θ)`: `π/4 − θ/2` on `(0, π)` and
/// `3π/4 − θ/2` on `(π, 2π)`, with θ taken mod 2π. Zero at the delta
/// points θ = 0, π where `U†` is the identity or the parity.
pub fn convention_phase(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t.sin().abs() <= DEGENERACY_TOL {
        0.0
    } else if t < PI {
        FRAC_PI_4 - 0.5 * t
    } else {
        3.0 * FRAC_PI_4 - 0.5 * t
    }
}

/// Basis state `|y, θ⟩`, either a regular kernel or a position eigenstate.
#[derive(Debug, Clone, Copy, PartialEq)]
enum BasisState {
    Kernel(MubKernel),
    /// `δ(x − x₀)`, reached at θ = 0 (`x₀ = y`) and θ = π (`x₀ = −y`).
    Position(f64),
}

impl BasisState {
    fn new(y: f64, theta: f64) -> Result<Self> {
        match MubKernel::new(y, theta) {
            Ok(k) => Ok(Self::Kernel(k)),
            Err(Error::DegenerateKernel(_)) => Ok(Self::Position(y * theta.cos().signum())),
            Err(e) => Err(e),
        }
    }
}

/// Damping schedule for the regularized overlap integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct RegulatorSchedule {
    epsilons: Vec<f64>,
    extent_factor: f64,
    points_per_oscillation: f64,
}

impl Default for RegulatorSchedule {
    fn default() -> Self {
        Self {
            epsilons: vec![0.2, 0.1, 0.05, 0.025, 0.0125],
            extent_factor: 8.0,
            points_per_oscillation: 8.0,
        }
    }
}

impl RegulatorSchedule {
    /// `epsilons` strictly decreasing and positive (at least four, so two
    /// successive quadratic extrapolations exist); half-width
    /// `L(ε) = extent_factor/√ε` with `extent_factor ≥ 6`; at least 8 samples
    /// per oscillation.
    pub fn new(
        epsilons: Vec<f64>,
        extent_factor: f64,
        points_per_oscillation: f64,
    ) -> Result<Self> {
        if epsilons.len() < 4 {
            return Err(Error::InvalidParameter {
                name: "schedule length",
                value: epsilons.len() as f64,
                reason: "need at least four damping strengths",
            });
        }
        if epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite()))
            || epsilons.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: f64::NAN,
                reason: "damping strengths must be positive and strictly decreasing",
            });
        }
        if !(extent_factor >= 6.0) {
            return Err(Error::InvalidParameter {
                name: "extent factor",
                value: extent_factor,
                reason: "L(eps) must be at least 6/sqrt(eps)",
            });
        }
        if !(points_per_oscillation >= 8.0) {
            return Err(Error::InvalidParameter {
                name: "points per oscillation",
                value: points_per_oscillation,
                reason: "need at least 8 samples per oscillation",
            });
        }
        Ok(Self {
            epsilons,
            extent_factor,
            points_per_oscillation,
        })
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn extent(&self, eps: f64) -> f64 {
        self.extent_factor / eps.sqrt()
    }

    /// Number of trapezoid intervals on `[−L, L]` given the largest phase
    /// rate on that interval.
    pub fn intervals(&self, eps: f64, max_rate: f64) -> usize {
        let l = self.extent(eps);
        // The envelope itself varies on the scale 1/√ε.
        let rate = max_rate.max(eps.sqrt());
        let h = TAU / (self.points_per_oscillation * rate);
        ((2.0 * l / h).ceil() as usize).max(64)
    }
}

/// Regularized integrals and their `ε → 0` extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    pub value: Complex64,
    /// Estimate from the previous three damping strengths.
    pub previous: Complex64,
    /// `(ε, I(ε))` for each schedule entry; empty for exact delta overlaps.
    pub samples: Vec<(f64, Complex64)>,
}

impl Extrapolation {
    fn exact(value: Complex64) -> Self {
        Self {
            value,
            previous: value,
            samples: Vec::new(),
        }
    }

    pub fn spread(&self) -> f64 {
        (self.value - self.previous).norm()
    }
}

/// Quadratic through three points, evaluated at 0 (Neville).
fn neville_at_zero(pts: &[(f64, Complex64)]) -> Complex64 {
    let (x0, y0) = pts[0];
    let (x1, y1) = pts[1];
    let (x2, y2) = pts[2];
    let p01 = (y0 * x1 - y1 * x0) / (x1 - x0);
    let p12 = (y1 * x2 - y2 * x1) / (x2 - x1);
    (p01 * x2 - p12 * x0) / (x2 - x0)
}

/// Extrapolates `log I(ε)` (phase unwrapped along the schedule) to `ε = 0`.
fn extrapolate(samples: Vec<(f64, Complex64)>) -> Result<Extrapolation> {
    let mut logs: Vec<(f64, Complex64)> = Vec::with_capacity(samples.len());
    let mut prev_arg: Option<f64> = None;
    for &(eps, z) in &samples {
        let mut arg = z.arg();
        if let Some(p) = prev_arg {
            arg += TAU * ((p - arg) / TAU).round();
        }
        prev_arg = Some(arg);
        logs.push((eps, Complex64::new(z.norm().ln(), arg)));
    }
    let n = logs.len();
    let value = neville_at_zero(&logs[n - 3..]).exp();
    let previous = neville_at_zero(&logs[n - 4..n - 1]).exp();
    let spread = (value - previous).norm();
    if !(spread <= CAUCHY_TOL) {
        return Err(Error::ExtrapolationFailed(spread));
    }
    Ok(Extrapolation {
        value,
        previous,
        samples,
    })
}

/// `∫ conj(K_bra) K_ket e^{−εx²} dx` by the trapezoid rule.
fn damped_integral(
    bra: &MubKernel,
    ket: &MubKernel,
    eps: f64,
    sched: &RegulatorSchedule,
) -> Complex64 {
    let l = sched.extent(eps);
    let rate = (ket.cos / ket.sin - bra.cos / bra.sin).abs() * l
        + (ket.y / ket.sin - bra.y / bra.sin).abs();
    let n = sched.intervals(eps, rate);
    let h = 2.0 * l / n as f64;
    let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
    for i in 0..=n {
        let x = -l + i as f64 * h;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        let v = bra.eval(x).conj() * ket.eval(x) * (w * (-eps * x * x).exp());
        re.add(v.re);
        im.add(v.im);
    }
    Complex64::new(re.value(), im.value()) * h
}

fn regularized_overlap(
    bra: &MubKernel,
    ket: &MubKernel,
    sched: &RegulatorSchedule,
) -> Result<Extrapolation> {
    let samples = sched
        .epsilons()
        .iter()
        .map(|&eps| (eps, damped_integral(bra, ket, eps, sched)))
        .collect();
    extrapolate(samples)
}

fn check_separation(t1: f64, t2: f64) -> Result<()> {
    let s = (t1 - t2).sin().abs();
    if !(s > MIN_ANGLE_SEPARATION) {
        return Err(Error::InvalidParameter {
            name: "angle separation",
            value: s,
            reason: "|sin(t1 - t2)| must exceed 1e-3",
        });
    }
    Ok(())
}

/// `⟨y₂, t₂ | y₁, t₁⟩` with the bare kernels, `ε → 0` extrapolated.
///
/// Position eigenstates (t = 0 or π) are handled exactly by evaluating the
/// other kernel at the delta's support.
pub fn overlap(
    y1: f64,
    t1: f64,
    y2: f64,
    t2: f64,
    sched: &RegulatorSchedule,
) -> Result<Extrapolation> {
    check_separation(t1, t2)?;
    let ket = BasisState::new(y1, t1)?;
    let bra = BasisState::new(y2, t2)?;
    match (bra, ket) {
        (BasisState::Kernel(b), BasisState::Kernel(k)) => regularized_overlap(&b, &k, sched),
        (BasisState::Position(x0), BasisState::Kernel(k)) => Ok(Extrapolation::exact(k.eval(x0))),
        (BasisState::Kernel(b), BasisState::Position(x0)) => {
            Ok(Extrapolation::exact(b.eval(x0).conj()))
        }
        // Excluded by the separation check.
        (BasisState::Position(_), BasisState::Position(_)) => unreachable!("identical delta bases"),
    }
}

/// `|⟨y₂, t₂ | y₁, t₁⟩|`; should equal `1/√(2π |sin(t₁ − t₂)|)`.
pub fn overlap_modulus(
    y1: f64,
    t1: f64,
    y2: f64,
    t2: f64,
    sched: &RegulatorSchedule,
) -> Result<f64> {
    overlap(y1, t1, y2, t2, sched).map(|e| e.value.norm())
}

/// Predicted overlap modulus between bases at angles `t1`, `t2`.
pub fn predicted_overlap_modulus(t1: f64, t2: f64) -> f64 {
    (TAU * (t1 - t2).sin().abs()).sqrt().recip()
}

/// Result of [`fourier_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCheck {
    pub y: f64,
    pub k: f64,
    pub theta: f64,
    /// `⟨y, θ | k, θ⟩` with the `U†(θ)` phase convention.
    pub value: Complex64,
    /// Same overlap with the bare kernels.
    pub raw: Extrapolation,
}

impl FourierCheck {
    pub fn expected(&self) -> Complex64 {
        Complex64::from_polar(TAU.sqrt().recip(), self.k * self.y)
    }

    pub fn modulus_error(&self) -> f64 {
        (self.value.norm() - TAU.sqrt().recip()).abs()
    }

    /// `arg(value) − k y`, wrapped to `(−π, π]`.
    pub fn phase_error(&self) -> f64 {
        wrap_angle(self.value.arg() - self.k * self.y)
    }

    /// Global phase the bare kernels leave on top of `k y`.
    pub fn raw_phase_offset(&self) -> f64 {
        wrap_angle(self.raw.value.arg() - self.k * self.y)
    }
}

/// Wraps to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// `⟨y, θ | k, θ⟩`, where `|k, θ⟩ = U†(θ)|p = k⟩` is the basis at θ + π/2;
/// should equal `e^{iky}/√(2π)`.
pub fn fourier_check(
    y: f64,
    k: f64,
    theta: f64,
    sched: &RegulatorSchedule,
) -> Result<FourierCheck> {
    let conjugate = theta + 0.5 * PI;
    let raw = overlap(k, conjugate, y, theta, sched)?;
    let correction =
        Complex64::from_polar(1.0, convention_phase(conjugate) - convention_phase(theta));
    Ok(FourierCheck {
        y,
        k,
        theta,
        value: raw.value * correction,
        raw,
    })
}
