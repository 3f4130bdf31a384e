//! Covariance-matrix representation of zero-mean n-mode Gaussian states.
//!
//! Quadratures are dimensionless with vacuum variance [`VACUUM_VARIANCE`]
//! and ordered `(x₁, p₁, x₂, p₂, …)`. The symplectic form is the
//! block-diagonal `Ω = ⊕ [[0, 1], [-1, 0]]`.
//!
//! Phase-space rotations generated by number operators (`e^{-iθ a†a}` on one
//! mode, or on a collective mode built from the EPR quadratures) are never
//! materialized as operators; only their linear action on quadratures is
//! represented, through [`SymplecticTransform`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Variance of either quadrature in the vacuum state.
pub const VACUUM_VARIANCE: f64 = 0.25;

const SYMMETRY_TOL: f64 = 1e-12;
const SYMPLECTIC_TOL: f64 = 1e-10;
/// Slack on the uncertainty bound, absorbing round-off from congruence chains.
pub const UNCERTAINTY_TOL: f64 = 1e-9;
const EIGEN_IMAG_TOL: f64 = 1e-10;

/// Standard symplectic form for `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

fn check_even_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let dim = m.nrows();
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::OddDimension(dim));
    }
    Ok(dim)
}

/// Second-moment matrix of a zero-mean Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validates symmetry, positivity and the uncertainty bound.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        check_even_square(&matrix)?;
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        let det = matrix.determinant();
        if !(det > 0.0) {
            return Err(Error::InvalidState(det));
        }
        let state = Self { matrix };
        let nu = symplectic_eigenvalues(&state)?;
        if nu[0] < VACUUM_VARIANCE - UNCERTAINTY_TOL {
            return Err(Error::UncertaintyViolation(nu[0]));
        }
        Ok(state)
    }

    /// `n_modes`-mode vacuum, `(1/4)·I`.
    pub fn vacuum(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        Self {
            matrix: DMatrix::identity(dim, dim) * VACUUM_VARIANCE,
        }
    }

    /// Caller guarantees the matrix is a valid covariance.
    pub(crate) fn from_trusted(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.dim() / 2
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// Linear map on phase space preserving the symplectic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
}

impl SymplecticTransform {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let dim = check_even_square(&matrix)?;
        let omega = symplectic_form(dim / 2);
        let dev = (&matrix * &omega * matrix.transpose() - &omega).amax();
        if dev > SYMPLECTIC_TOL {
            return Err(Error::NotSymplectic(dev));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// `‖S Ω Sᵀ − Ω‖_max`.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.n_modes());
        (&self.matrix * &omega * self.matrix.transpose() - omega).amax()
    }

    /// `self · other`, i.e. `other` acts first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.matrix.nrows() != other.matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                found: other.matrix.nrows(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// `S⁻¹ = Ω Sᵀ Ωᵀ`.
    pub fn inverse(&self) -> Self {
        let omega = symplectic_form(self.n_modes());
        Self {
            matrix: &omega * self.matrix.transpose() * omega.transpose(),
        }
    }

    pub fn apply(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                found: point.len(),
            });
        }
        let v = &self.matrix * DVector::from_column_slice(point);
        Ok(v.iter().copied().collect())
    }
}

fn rotation_block(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s, c]]
}

/// Rotation by `theta` in the `(x, p)` plane of one mode, identity elsewhere.
///
/// The first row of the block is `(cos θ, sin θ)`, so the rotated position
/// quadrature is `Λ(θ) = cos θ·x + sin θ·p`.
pub fn mode_rotation(theta: f64, mode_index: usize, n_modes: usize) -> Result<SymplecticTransform> {
    if mode_index >= n_modes {
        return Err(Error::ModeOutOfRange {
            index: mode_index,
            n_modes,
        });
    }
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let block = rotation_block(theta);
    let o = 2 * mode_index;
    for (i, row) in block.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[(o + i, o + j)] = v;
        }
    }
    Ok(SymplecticTransform { matrix: m })
}

/// Single-mode squeezer `diag(e^{-r}, e^{r})` on one mode.
pub fn squeezer(r: f64, mode_index: usize, n_modes: usize) -> Result<SymplecticTransform> {
    if mode_index >= n_modes {
        return Err(Error::ModeOutOfRange {
            index: mode_index,
            n_modes,
        });
    }
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    m[(2 * mode_index, 2 * mode_index)] = (-r).exp();
    m[(2 * mode_index + 1, 2 * mode_index + 1)] = r.exp();
    Ok(SymplecticTransform { matrix: m })
}

/// Orthogonal symplectic change of frame from `(x₁, p₁, x₂, p₂)` to the EPR
/// quadratures `(ξ, ν, η, μ)`:
///
/// ```text
/// ξ = (x₁ − x₂)/√2   ν = (p₁ − p₂)/√2
/// η = (x₁ + x₂)/√2   μ = (p₁ + p₂)/√2
/// ```
///
/// Both `(ξ, ν)` and `(η, μ)` are conjugate pairs, so Ω keeps its
/// block-diagonal form in either frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EprBasisChange {
    matrix: DMatrix<f64>,
}

impl EprBasisChange {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lab point to EPR coordinates.
    pub fn to_epr(&self, lab: &[f64; 4]) -> [f64; 4] {
        let v = &self.matrix * DVector::from_column_slice(lab);
        [v[0], v[1], v[2], v[3]]
    }

    /// EPR point back to lab coordinates.
    pub fn to_lab(&self, epr: &[f64; 4]) -> [f64; 4] {
        let v = self.matrix.transpose() * DVector::from_column_slice(epr);
        [v[0], v[1], v[2], v[3]]
    }

    pub fn as_transform(&self) -> SymplecticTransform {
        SymplecticTransform {
            matrix: self.matrix.clone(),
        }
    }
}

pub fn epr_basis_change() -> EprBasisChange {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let matrix = DMatrix::from_row_slice(4, 4, &[
        h, 0.0, -h, 0.0,
        0.0, h, 0.0, -h,
        h, 0.0, h, 0.0,
        0.0, h, 0.0, h,
    ]);
    EprBasisChange { matrix }
}

/// Rotation of the collective `(η, μ)` plane by `theta`, leaving `(ξ, ν)`
/// fixed, expressed in lab coordinates.
///
/// In EPR coordinates the map is `η → cos θ·η + sin θ·μ`,
/// `μ → cos θ·μ − sin θ·η`.
pub fn vb_rotation(theta: f64) -> SymplecticTransform {
    let epr = epr_basis_change();
    // (η, μ) is the second EPR mode.
    let rot = mode_rotation(theta, 1, 2).expect("mode 1 of 2 is in range");
    let matrix = epr.matrix.transpose() * rot.matrix * &epr.matrix;
    SymplecticTransform { matrix }
}

/// Congruence `σ → S σ Sᵀ`.
pub fn apply_transform(
    sigma: &CovarianceMatrix,
    s: &SymplecticTransform,
) -> Result<CovarianceMatrix> {
    if sigma.dim() != s.matrix.nrows() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: s.matrix.nrows(),
        });
    }
    let m = &s.matrix * &sigma.matrix * s.matrix.transpose();
    // Round-off leaves the product asymmetric at the ulp level.
    let sym = (&m + m.transpose()) * 0.5;
    Ok(CovarianceMatrix::from_trusted(sym))
}

/// Marginal covariance of one mode (partial trace over the others).
pub fn reduce(sigma: &CovarianceMatrix, keep_mode: usize) -> Result<CovarianceMatrix> {
    let n = sigma.n_modes();
    if keep_mode >= n {
        return Err(Error::ModeOutOfRange {
            index: keep_mode,
            n_modes: n,
        });
    }
    let o = 2 * keep_mode;
    let block = sigma.matrix.view((o, o), (2, 2)).into_owned();
    Ok(CovarianceMatrix::from_trusted(block))
}

/// `tr ρ² = (1/4)ⁿ / √det σ`.
pub fn purity(sigma: &CovarianceMatrix) -> Result<f64> {
    let det = sigma.determinant();
    if !(det > 0.0) {
        return Err(Error::InvalidState(det));
    }
    Ok(VACUUM_VARIANCE.powi(sigma.n_modes() as i32) / det.sqrt())
}

/// Symplectic spectrum, ascending, one value per mode.
///
/// Computed from the eigenvalues of `Ωσ`, which come in pairs `±iν`; the
/// moduli are sorted and each pair averaged.
pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = sigma.n_modes();
    let omega = symplectic_form(n);
    let m = omega * &sigma.matrix;
    let scale = sigma.matrix.amax().max(f64::MIN_POSITIVE);
    let schur =
        nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000).ok_or(Error::EigenSolve)?;
    let eig = schur.complex_eigenvalues();
    let mut moduli: Vec<f64> = Vec::with_capacity(2 * n);
    for z in eig.iter() {
        // Eigenvalues of iΩσ are i·λ; a non-negligible real part of λ means
        // the pairing structure broke down.
        if z.re.abs() > EIGEN_IMAG_TOL * scale.max(1.0) {
            return Err(Error::EigenSolve);
        }
        moduli.push(z.im.abs());
    }
    moduli.sort_by(|a, b| a.total_cmp(b));
    Ok(moduli.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn rotation_at_zero_is_identity() {
        let s = mode_rotation(0.0, 0, 1).unwrap();
        assert_eq!(s.matrix(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn rotation_quarter_turn_maps_position_to_momentum() {
        let s = mode_rotation(FRAC_PI_2, 0, 1).unwrap();
        // Λ(π/2)·(x, p) = p
        let out = s.apply(&[0.3, -1.7]).unwrap();
        assert_close(out[0], -1.7, 1e-15);
    }

    #[test]
    fn rotation_on_second_mode_is_block_diagonal() {
        let s = mode_rotation(FRAC_PI_4, 1, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, h, h,
            0.0, 0.0, -h, h,
        ]);
        assert!((s.matrix() - expected).amax() < 1e-15);
        // S Ω Sᵀ by explicit triple loop.
        let omega = symplectic_form(2);
        let mut max_dev: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = 0.0;
                for k in 0..4 {
                    for l in 0..4 {
                        acc += s.matrix()[(i, k)] * omega[(k, l)] * s.matrix()[(j, l)];
                    }
                }
                max_dev = max_dev.max((acc - omega[(i, j)]).abs());
            }
        }
        assert!(max_dev <= 1e-10);
    }

    #[test]
    fn rotation_rejects_bad_mode() {
        assert_eq!(
            mode_rotation(0.1, 2, 2),
            Err(Error::ModeOutOfRange {
                index: 2,
                n_modes: 2
            })
        );
    }

    #[test]
    fn epr_change_on_symmetric_and_antisymmetric_points() {
        let e = epr_basis_change();
        let sym = e.to_epr(&[1.0, 0.0, 1.0, 0.0]);
        assert_close(sym[0], 0.0, 1e-15);
        assert_close(sym[1], 0.0, 1e-15);
        assert_close(sym[2], SQRT_2, 1e-15);
        assert_close(sym[3], 0.0, 1e-15);
        let anti = e.to_epr(&[1.0, 0.0, -1.0, 0.0]);
        assert_close(anti[0], SQRT_2, 1e-15);
        assert_close(anti[2], 0.0, 1e-15);
        let back = e.to_lab(&anti);
        assert_close(back[0], 1.0, 1e-15);
        assert_close(back[2], -1.0, 1e-15);
    }

    #[test]
    fn epr_change_is_orthogonal_and_symplectic() {
        let e = epr_basis_change();
        let m = e.matrix();
        assert!((m * m.transpose() - DMatrix::<f64>::identity(4, 4)).amax() < 1e-15);
        assert!(e.as_transform().symplectic_defect() < 1e-15);
    }

    #[test]
    fn vb_rotation_identity_and_quarter_turn() {
        assert!((vb_rotation(0.0).matrix() - DMatrix::<f64>::identity(4, 4)).amax() < 1e-15);

        let e = epr_basis_change();
        let s = vb_rotation(FRAC_PI_2);
        let apply_epr = |epr: [f64; 4]| {
            let lab = e.to_lab(&epr);
            let out = s.apply(&lab).unwrap();
            e.to_epr(&[out[0], out[1], out[2], out[3]])
        };
        // (ξ, ν, η, μ) basis points.
        let xi = apply_epr([1.0, 0.0, 0.0, 0.0]);
        let nu = apply_epr([0.0, 1.0, 0.0, 0.0]);
        let eta = apply_epr([0.0, 0.0, 1.0, 0.0]);
        let mu = apply_epr([0.0, 0.0, 0.0, 1.0]);
        for (got, want) in [
            (xi, [1.0, 0.0, 0.0, 0.0]),
            (nu, [0.0, 1.0, 0.0, 0.0]),
            // η-coordinate of the image is cos θ·η + sin θ·μ: the image of
            // the η axis has μ-component −1, the μ axis lands on η.
            (eta, [0.0, 0.0, 0.0, -1.0]),
            (mu, [0.0, 0.0, 1.0, 0.0]),
        ] {
            for k in 0..4 {
                assert_close(got[k], want[k], 1e-15);
            }
        }
    }

    #[test]
    fn vb_rotation_is_a_one_parameter_group() {
        let a = vb_rotation(0.3);
        let b = vb_rotation(0.4);
        let ab = a.compose(&b).unwrap();
        assert!((ab.matrix() - vb_rotation(0.7).matrix()).amax() < 1e-15);
        assert!(vb_rotation(1.234).symplectic_defect() < 1e-10);
    }

    #[test]
    fn inverse_undoes_transform() {
        let s = squeezer(0.8, 0, 2)
            .unwrap()
            .compose(&vb_rotation(0.9))
            .unwrap();
        let id = s.compose(&s.inverse()).unwrap();
        assert!((id.matrix() - DMatrix::<f64>::identity(4, 4)).amax() < 1e-12);
    }

    #[test]
    fn vacuum_is_rotation_invariant() {
        let vac = CovarianceMatrix::vacuum(2);
        let out = apply_transform(&vac, &vb_rotation(0.77)).unwrap();
        assert!((out.matrix() - vac.matrix()).amax() < 1e-15);
    }

    #[test]
    fn apply_transform_rejects_dimension_mismatch() {
        let vac = CovarianceMatrix::vacuum(1);
        assert!(matches!(
            apply_transform(&vac, &vb_rotation(0.1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reduce_extracts_diagonal_block() {
        let vac = CovarianceMatrix::vacuum(2);
        let r = reduce(&vac, 0).unwrap();
        assert_eq!(r.matrix(), &(DMatrix::identity(2, 2) * 0.25));
        assert!(matches!(reduce(&vac, 2), Err(Error::ModeOutOfRange { .. })));

        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            1.0, 0.1, 0.2, 0.3,
            0.1, 2.0, 0.4, 0.5,
            0.2, 0.4, 3.0, 0.6,
            0.3, 0.5, 0.6, 4.0,
        ]);
        let sigma = CovarianceMatrix::new(m.clone()).unwrap();
        let b = reduce(&sigma, 1).unwrap();
        assert_eq!(b.get(0, 0), m[(2, 2)]);
        assert_eq!(b.get(0, 1), m[(2, 3)]);
        assert_eq!(b.get(1, 1), m[(3, 3)]);
    }

    #[test]
    fn vacuum_purity_is_one() {
        for n in 1..=3 {
            assert_close(purity(&CovarianceMatrix::vacuum(n)).unwrap(), 1.0, 1e-15);
        }
    }

    #[test]
    fn vacuum_symplectic_spectrum() {
        let nu = symplectic_eigenvalues(&CovarianceMatrix::vacuum(2)).unwrap();
        assert_eq!(nu.len(), 2);
        for v in nu {
            assert_close(v, 0.25, 1e-14);
        }
    }

    #[test]
    fn diagonal_single_mode_spectrum_is_sqrt_det() {
        let a = 2.0_f64.cosh() / 4.0;
        let sigma =
            CovarianceMatrix::new(DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, a])).unwrap();
        let nu = symplectic_eigenvalues(&sigma).unwrap();
        assert_close(nu[0], sigma.determinant().sqrt(), 1e-14);
        assert_close(nu[0], 0.940_548_922_770_908_1, 1e-12);
    }

    #[test]
    fn constructor_rejects_invalid_matrices() {
        assert!(matches!(
            CovarianceMatrix::new(DMatrix::identity(3, 3)),
            Err(Error::OddDimension(3))
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(
            CovarianceMatrix::new(asym),
            Err(Error::NotSymmetric(_))
        ));
        let sub_vacuum = DMatrix::identity(2, 2) * 0.1;
        assert!(matches!(
            CovarianceMatrix::new(sub_vacuum),
            Err(Error::UncertaintyViolation(_))
        ));
        let negative = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            CovarianceMatrix::new(negative),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn symplectic_constructor_rejects_non_symplectic() {
        let m = DMatrix::identity(2, 2) * 2.0;
        assert!(matches!(
            SymplecticTransform::new(m),
            Err(Error::NotSymplectic(_))
        ));
        assert!(SymplecticTransform::new(vb_rotation(0.4).matrix().clone()).is_ok());
    }
}
