//! Cones of complex scalars, vectors and matrices whose imaginary part is
//! dominated by the real part.
//!
//! With `z = x + iy` and aperture `δ ∈ (0, 1)`:
//!
//! | cone        | condition                                   |
//! |-------------|---------------------------------------------|
//! | scalar      | `|y| < δ x`                                 |
//! | vector      | `‖y‖₂ < δ ‖x‖₂`                             |
//! | matrix      | `‖y‖ < δ ‖x‖` in the configured norm        |
//! | symmetric   | `zᵀ = z` and both `δx ± y` positive definite |
//!
//! All inequalities are strict. Each predicate has a companion `*_margin`
//! function reporting the signed slack (positive inside) and an `*_aperture`
//! function returning the infimum of the apertures for which the argument is a
//! member.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, CMat, MatrixNorm, C64};
use crate::rng;

/// Relative asymmetry accepted by the symmetric-cone routines.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub delta: f64,
    #[serde(default)]
    pub matrix_norm: MatrixNorm,
}

impl ConeParams {
    pub fn new(delta: f64) -> Result<Self> {
        Self::with_norm(delta, MatrixNorm::Operator2)
    }

    pub fn with_norm(delta: f64, matrix_norm: MatrixNorm) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!(
                "cone aperture {delta} outside (0, 1)"
            )));
        }
        Ok(Self { delta, matrix_norm })
    }

    /// Same norm, different aperture.
    pub fn rescaled(&self, delta: f64) -> Result<Self> {
        Self::with_norm(delta, self.matrix_norm)
    }
}

fn finite(z: C64) -> Result<C64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite)
    }
}

pub fn right_cone_margin(z: C64, delta: f64) -> Result<f64> {
    let z = finite(z)?;
    Ok(delta * z.re - z.im.abs())
}

pub fn in_right_cone(z: C64, params: &ConeParams) -> Result<bool> {
    Ok(right_cone_margin(z, params.delta)? > 0.0)
}

/// `|Im z| / Re z`, or infinity when `Re z ≤ 0`.
pub fn right_cone_aperture(z: C64) -> f64 {
    if z.re > 0.0 {
        z.im.abs() / z.re
    } else {
        f64::INFINITY
    }
}

fn split_vector(z: &DVector<C64>) -> Result<(f64, f64)> {
    if !z.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let x = z.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
    let y = z.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
    Ok((x, y))
}

pub fn vector_cone_margin(z: &DVector<C64>, delta: f64) -> Result<f64> {
    let (x, y) = split_vector(z)?;
    Ok(delta * x - y)
}

pub fn in_vector_cone(z: &DVector<C64>, params: &ConeParams) -> Result<bool> {
    Ok(vector_cone_margin(z, params.delta)? > 0.0)
}

pub fn vector_cone_aperture(z: &DVector<C64>) -> Result<f64> {
    let (x, y) = split_vector(z)?;
    Ok(if x > 0.0 { y / x } else { f64::INFINITY })
}

fn matrix_parts(a: &CMat, norm: MatrixNorm) -> Result<(f64, f64)> {
    matrix::ensure_square(a)?;
    matrix::ensure_finite(a)?;
    Ok((
        matrix::real_norm(&matrix::re(a), norm),
        matrix::real_norm(&matrix::im(a), norm),
    ))
}

pub fn matrix_cone_margin(a: &CMat, params: &ConeParams) -> Result<f64> {
    let (x, y) = matrix_parts(a, params.matrix_norm)?;
    Ok(params.delta * x - y)
}

pub fn in_matrix_cone(a: &CMat, params: &ConeParams) -> Result<bool> {
    Ok(matrix_cone_margin(a, params)? > 0.0)
}

/// `‖Im A‖ / ‖Re A‖` in the given norm.
pub fn matrix_cone_aperture(a: &CMat, norm: MatrixNorm) -> Result<f64> {
    let (x, y) = matrix_parts(a, norm)?;
    Ok(if x > 0.0 { y / x } else { f64::INFINITY })
}

fn ensure_symmetric(b: &CMat) -> Result<()> {
    matrix::ensure_square(b)?;
    matrix::ensure_finite(b)?;
    let asymmetry = matrix::relative_asymmetry(b);
    if asymmetry > SYMMETRY_TOL {
        return Err(Error::Asymmetric { asymmetry });
    }
    Ok(())
}

/// Smallest eigenvalues of `δ Re B − Im B` and `δ Re B + Im B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMargin {
    pub minus: f64,
    pub plus: f64,
}

impl SymmetricMargin {
    pub fn min(&self) -> f64 {
        self.minus.min(self.plus)
    }
}

pub fn symmetric_cone_margin(b: &CMat, delta: f64) -> Result<SymmetricMargin> {
    ensure_symmetric(b)?;
    let x = matrix::symmetrize_real(&matrix::re(b)).scale(delta);
    let y = matrix::symmetrize_real(&matrix::im(b));
    Ok(SymmetricMargin {
        minus: matrix::min_sym_eigenvalue(&(&x - &y)),
        plus: matrix::min_sym_eigenvalue(&(&x + &y)),
    })
}

pub fn in_symmetric_cone(b: &CMat, params: &ConeParams) -> Result<bool> {
    Ok(symmetric_cone_margin(b, params.delta)?.min() > 0.0)
}

/// Spectral radius of `X^{-1/2} Y X^{-1/2}` for `B = X + iY`, or infinity when
/// `X` is not positive definite.
pub fn symmetric_cone_aperture(b: &CMat) -> Result<f64> {
    ensure_symmetric(b)?;
    let x = matrix::symmetrize_real(&matrix::re(b));
    let y = matrix::symmetrize_real(&matrix::im(b));
    let (vals, vecs) = matrix::sym_eigen(&x);
    if vals.first().is_some_and(|&v| v <= 0.0) {
        return Ok(f64::INFINITY);
    }
    let inv_sqrt: Vec<f64> = vals.iter().map(|v| v.sqrt().recip()).collect();
    let w = &vecs * matrix::diag_real(&inv_sqrt);
    let k = w.transpose() * y * &w;
    let (kv, _) = matrix::sym_eigen(&k);
    Ok(kv.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// Which search produced a [`ConeWitness`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessSource {
    /// Eigenvector of `δ Re B − Im B`.
    MinusEigenvector,
    /// Eigenvector of `δ Re B + Im B`.
    PlusEigenvector,
    RandomSearch,
}

/// A real vector whose quadratic form `⟨Bx, x⟩` leaves the scalar cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeWitness {
    pub x: Vec<f64>,
    pub value: C64,
    pub source: WitnessSource,
}

/// Bilinear quadratic form `⟨Bx, x⟩ = Σ B_ij x_i x_j` for real `x`.
pub fn quadratic_form(b: &CMat, x: &DVector<f64>) -> C64 {
    let xc = x.map(|v| C64::new(v, 0.0));
    (xc.transpose() * b * &xc)[(0, 0)]
}

/// Search for a real `x` with `⟨Bx, x⟩` outside the scalar cone.
///
/// The eigenvectors of `δ Re B ∓ Im B` are tried first; a non-positive
/// eigenvalue there is an exact witness. Otherwise `trials` Gaussian vectors
/// drawn from `seed` are tested.
pub fn quadratic_form_witness(
    b: &CMat,
    params: &ConeParams,
    trials: usize,
    seed: u64,
) -> Result<Option<ConeWitness>> {
    ensure_symmetric(b)?;
    let n = b.nrows();
    let x = matrix::symmetrize_real(&matrix::re(b)).scale(params.delta);
    let y = matrix::symmetrize_real(&matrix::im(b));

    let branches = [
        (&x - &y, WitnessSource::MinusEigenvector),
        (&x + &y, WitnessSource::PlusEigenvector),
    ];
    let mut worst: Option<(f64, DVector<f64>, WitnessSource)> = None;
    for (m, source) in branches {
        let (vals, vecs) = matrix::sym_eigen(&m);
        if let Some(&lowest) = vals.first() {
            if lowest <= 0.0 && worst.as_ref().is_none_or(|w| lowest < w.0) {
                worst = Some((lowest, vecs.column(0).into_owned(), source));
            }
        }
    }
    if let Some((_, v, source)) = worst {
        let value = quadratic_form(b, &v);
        return Ok(Some(ConeWitness {
            x: v.iter().copied().collect(),
            value,
            source,
        }));
    }

    let mut rng = rng::substream(seed, 0);
    for _ in 0..trials {
        let v = rng::gaussian_vector(&mut rng, n);
        let value = quadratic_form(b, &v);
        if !in_right_cone(value, params)? {
            return Ok(Some(ConeWitness {
                x: v.iter().copied().collect(),
                value,
                source: WitnessSource::RandomSearch,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{complexify, diag_complex, identity};

    fn p(delta: f64) -> ConeParams {
        ConeParams::new(delta).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn scalar_cone_examples() {
        assert!(in_right_cone(c(1.0, 0.0), &p(0.1)).unwrap());
        assert!(!in_right_cone(c(1.0, 0.2), &p(0.1)).unwrap());
        assert!(!in_right_cone(c(-1.0, 0.0), &p(0.1)).unwrap());
        assert!(matches!(
            in_right_cone(c(f64::NAN, 0.0), &p(0.1)),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn vector_cone_examples() {
        let v = |xs: &[C64]| DVector::from_column_slice(xs);
        assert!(in_vector_cone(&v(&[c(1.0, 0.0), c(0.0, 0.0)]), &p(0.1)).unwrap());
        assert!(!in_vector_cone(&v(&[c(0.0, 1.0), c(0.0, 0.0)]), &p(0.5)).unwrap());
        assert!(in_vector_cone(&v(&[c(1.0, 0.05), c(1.0, 0.0)]), &p(0.1)).unwrap());
    }

    #[test]
    fn matrix_cone_examples() {
        let i3 = identity(3);
        assert!(in_matrix_cone(&i3, &p(0.1)).unwrap());
        assert!(!in_matrix_cone(&i3.map(|z| z * c(0.0, 1.0)), &p(0.9)).unwrap());
        let mut a = identity(3);
        a[(0, 0)] += c(0.0, 0.05);
        assert!(in_matrix_cone(&a, &p(0.1)).unwrap());
        let rect = CMat::zeros(2, 3);
        assert!(matches!(
            in_matrix_cone(&rect, &p(0.1)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn frobenius_option_changes_the_norm() {
        let a = diag_complex(&[c(1.0, 0.0), c(0.0, 0.06), c(0.0, 0.06), c(0.0, 0.06)]);
        let op = ConeParams::new(0.1).unwrap();
        let fro = ConeParams::with_norm(0.1, MatrixNorm::Frobenius).unwrap();
        assert!(in_matrix_cone(&a, &op).unwrap());
        assert!(!in_matrix_cone(&a, &fro).unwrap());
    }

    #[test]
    fn symmetric_cone_examples() {
        assert!(in_symmetric_cone(&identity(2), &p(0.1)).unwrap());
        let b = diag_complex(&[c(1.0, 0.05), c(1.0, -0.05)]);
        let m = symmetric_cone_margin(&b, 0.1).unwrap();
        assert!((m.minus - 0.05).abs() < 1e-15 && (m.plus - 0.05).abs() < 1e-15);
        assert!(in_symmetric_cone(&b, &p(0.1)).unwrap());
        let b = diag_complex(&[c(1.0, 0.2), c(1.0, 0.2)]);
        assert!(!in_symmetric_cone(&b, &p(0.1)).unwrap());
        let mut asym = identity(2);
        asym[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(
            in_symmetric_cone(&asym, &p(0.1)),
            Err(Error::Asymmetric { .. })
        ));
    }

    #[test]
    fn aperture_matches_membership_threshold() {
        let b = diag_complex(&[c(2.0, 0.1), c(1.0, -0.08)]);
        let ap = symmetric_cone_aperture(&b).unwrap();
        assert!((ap - 0.08).abs() < 1e-14);
        assert!(in_symmetric_cone(&b, &p(0.0801)).unwrap());
        assert!(!in_symmetric_cone(&b, &p(0.0799)).unwrap());
    }

    #[test]
    fn witness_for_scaled_identity() {
        let b = identity(3).map(|z| z * c(1.0, 0.2));
        let w = quadratic_form_witness(&b, &p(0.1), 10, 0).unwrap().unwrap();
        assert_eq!(w.source, WitnessSource::MinusEigenvector);
        let norm: f64 = w.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!((w.value - c(1.0, 0.2)).norm() < 1e-12);
        assert!(!in_right_cone(w.value, &p(0.1)).unwrap());
    }

    #[test]
    fn witness_absent_for_members() {
        let b = complexify(&matrix::diag_real(&[1.0, 2.0, 3.0]));
        assert!(quadratic_form_witness(&b, &p(0.1), 1000, 7)
            .unwrap()
            .is_none());
    }
}
