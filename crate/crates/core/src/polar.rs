//! Real and complex polar decompositions.
//!
//! For complex `h` with `hhᵀ` spectrum in the open right half-plane,
//! `h = SQ` with `S = √(hhᵀ)` complex symmetric (principal root) and
//! `Q = S⁻¹h` complex orthogonal (`QQᵀ = I`). `φ(h) = S` and `ψ(h) = Q`; both
//! are holomorphic in `h`, and on real matrices with positive determinant they
//! reduce to the classical `P · U` factorization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liegroups::{self, GroupSpec};
use crate::matrix::{self, CMat, MatrixNorm, RMat, C64};
use crate::rng;
use crate::sqrtm;

/// Invariant tolerance on both polar residuals.
pub const POLAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RealPolarFactors {
    /// Symmetric positive definite factor.
    pub p: RMat,
    /// Special orthogonal factor.
    pub u: RMat,
}

/// `g = P·U` for real `g` with `det g > 0`.
pub fn real_polar(g: &RMat) -> Result<RealPolarFactors> {
    let n = matrix::ensure_square(g)?;
    matrix::ensure_finite_real(g)?;
    let det = g.determinant();
    if !(det > 0.0) {
        return Err(Error::Domain(format!(
            "real polar decomposition needs det > 0, got {det:.3e}"
        )));
    }
    let svd = g.clone().svd(true, true);
    let (Some(w), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::Degenerate(
            "SVD did not return singular vectors".into(),
        ));
    };
    if svd.singular_values.iter().any(|&s| s <= 0.0) {
        return Err(Error::Degenerate("singular matrix".into()));
    }
    let u = &w * v_t;
    let sigma = RMat::from_diagonal(&svd.singular_values);
    let p = matrix::symmetrize_real(&(&w * sigma * w.transpose()));
    debug_assert_eq!(u.nrows(), n);
    Ok(RealPolarFactors { p, u })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarFactors {
    /// `φ(h)`, complex symmetric.
    pub s: CMat,
    /// `ψ(h)`, complex orthogonal.
    pub q: CMat,
    /// `‖SQ − h‖₂ / ‖h‖₂`.
    pub residual_sq: f64,
    /// `‖QQᵀ − I‖₂`.
    pub residual_orth: f64,
    /// `‖S − Sᵀ‖_F / ‖S‖_F`.
    pub asymmetry: f64,
}

impl PolarFactors {
    pub fn within_tolerance(&self, tol: f64) -> bool {
        self.residual_sq <= tol && self.residual_orth <= tol && self.asymmetry <= tol
    }
}

fn orthogonality_residual(q: &CMat) -> f64 {
    let n = q.nrows();
    matrix::opnorm(&(q * q.transpose() - CMat::identity(n, n)))
}

fn reconstruction_residual(s: &CMat, q: &CMat, h: &CMat) -> f64 {
    matrix::opnorm(&(s * q - h)) / matrix::opnorm(h)
}

/// Complex polar decomposition `h = SQ`.
pub fn complex_polar(h: &CMat) -> Result<PolarFactors> {
    complex_polar_with_tol(h, sqrtm::DEFAULT_TOL)
}

/// As [`complex_polar`], with the square-root residual tolerance given explicitly.
pub fn complex_polar_with_tol(h: &CMat, tol: f64) -> Result<PolarFactors> {
    matrix::ensure_square(h)?;
    matrix::ensure_finite(h)?;
    let b = h * h.transpose();
    let s = sqrtm::principal_sqrt(&b, tol)?.s;
    let q = s
        .clone()
        .lu()
        .solve(h)
        .ok_or_else(|| Error::Degenerate("square root factor is singular".into()))?;

    let mut residual_orth = orthogonality_residual(&q);
    let mut residual_sq = reconstruction_residual(&s, &q, h);
    let mut q_best = q;

    // One Newton step X ← (X + X^{-T})/2 towards the orthogonal factor.
    if let Some(inv) = q_best.clone().try_inverse() {
        let refined = (&q_best + inv.transpose()).scale(0.5);
        let orth = orthogonality_residual(&refined);
        let rec = reconstruction_residual(&s, &refined, h);
        if orth.max(rec) < residual_orth.max(residual_sq) {
            q_best = refined;
            residual_orth = orth;
            residual_sq = rec;
        }
    }

    Ok(PolarFactors {
        asymmetry: matrix::relative_asymmetry(&s),
        s,
        q: q_best,
        residual_sq,
        residual_orth,
    })
}

/// `ψ(h)`, the complex orthogonal polar factor.
pub fn psi(h: &CMat) -> Result<CMat> {
    Ok(complex_polar(h)?.q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthProjection {
    /// `S⁻¹ Re Q` with `S = √(Re Q Re Qᵀ)`.
    pub u: RMat,
    /// `‖Q − U‖` in the requested norm.
    pub dist: f64,
    /// `‖Re Q‖₂`.
    pub real_norm: f64,
    /// `‖Im Q‖₂`.
    pub imag_norm: f64,
}

impl OrthProjection {
    /// `‖Re Q‖² − ‖Im Q‖² − 1`, zero for every complex orthogonal `Q`.
    pub fn norm_identity_defect(&self) -> f64 {
        self.real_norm.powi(2) - self.imag_norm.powi(2) - 1.0
    }

    /// `‖Im Q‖ / ‖Re Q‖`.
    pub fn aperture(&self) -> f64 {
        self.imag_norm / self.real_norm
    }
}

/// Real special orthogonal matrix close to a complex orthogonal `q`, built as
/// the orthogonal polar factor of `Re q`.
pub fn nearest_special_orthogonal(q: &CMat, norm: MatrixNorm) -> Result<OrthProjection> {
    matrix::ensure_square(q)?;
    matrix::ensure_finite(q)?;
    let orth = orthogonality_residual(q);
    if orth > 1e-8 {
        return Err(Error::Domain(format!(
            "matrix is not complex orthogonal (‖QQᵀ − I‖ = {orth:.3e})"
        )));
    }
    let q0 = matrix::re(q);
    let q1 = matrix::im(q);
    let det = q0.determinant();
    if !(det > 0.0) {
        return Err(Error::Degenerate(format!(
            "real part has det {det:.3e}; no special orthogonal factor"
        )));
    }
    let u = real_polar(&q0)?.u;
    let dist = matrix::complex_norm(&(q - matrix::complexify(&u)), norm);
    Ok(OrthProjection {
        u,
        dist,
        real_norm: matrix::real_norm(&q0, MatrixNorm::Operator2),
        imag_norm: matrix::real_norm(&q1, MatrixNorm::Operator2),
    })
}

/// Distance statistics of `ψ(E_δ)` to `SO(n, ℝ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthStats {
    pub delta: f64,
    pub trials: usize,
    pub max_dist: f64,
    pub mean_dist: f64,
    /// `max_dist / δ`.
    pub c_hat: f64,
}

/// Sample the tube around `spec`, map through `ψ` and measure the distance to
/// the real special orthogonal group.
pub fn image_orth_distance(
    spec: &GroupSpec,
    delta: f64,
    radius: f64,
    trials: usize,
    seed: u64,
) -> Result<OrthStats> {
    if !(delta > 0.0 && delta <= 0.05) {
        return Err(Error::Config(format!("aperture {delta} outside (0, 0.05]")));
    }
    let dists: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let sample =
                liegroups::sample_tube(spec, delta, radius, rng::child_seed(seed, i as u64))?;
            let q = complex_polar(&sample.h)?.q;
            Ok(nearest_special_orthogonal(&q, MatrixNorm::Operator2)?.dist)
        })
        .collect::<Result<_>>()?;
    let max_dist = dists.iter().fold(0.0_f64, |m, &d| m.max(d));
    let mean_dist = if trials == 0 {
        0.0
    } else {
        dists.iter().sum::<f64>() / trials as f64
    };
    Ok(OrthStats {
        delta,
        trials,
        max_dist,
        mean_dist,
        c_hat: max_dist / delta,
    })
}

/// Cauchy–Riemann defect of `ψ` at `h` along the real direction `e`:
/// `‖(ψ(h + iεE) − ψ(h)) − i(ψ(h + εE) − ψ(h))‖₂`, which is `O(ε²)` exactly
/// when `ψ` is complex differentiable at `h`.
pub fn holomorphy_residual(h: &CMat, e: &RMat, eps: f64) -> Result<f64> {
    let base = psi(h)?;
    let ec = matrix::complexify(e);
    let along_i = psi(&(h + ec.map(|z| z * C64::new(0.0, eps))))?;
    let along_r = psi(&(h + ec.scale(eps)))?;
    let defect = (&along_i - &base) - (&along_r - &base).map(|z| z * C64::i());
    Ok(matrix::opnorm(&defect))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{complexify, diag_real, rotation2};

    #[test]
    fn real_polar_examples() {
        let f = real_polar(&RMat::identity(3, 3)).unwrap();
        assert!((&f.p - RMat::identity(3, 3)).norm() < 1e-14);
        assert!((&f.u - RMat::identity(3, 3)).norm() < 1e-14);

        let f = real_polar(&diag_real(&[2.0, 3.0])).unwrap();
        assert!((&f.p - diag_real(&[2.0, 3.0])).norm() < 1e-14);
        assert!((&f.u - RMat::identity(2, 2)).norm() < 1e-14);

        let g = diag_real(&[2.0, 3.0]) * rotation2(0.3);
        let f = real_polar(&g).unwrap();
        assert!((&f.p - diag_real(&[2.0, 3.0])).norm() < 1e-13);
        assert!((&f.u - rotation2(0.3)).norm() < 1e-13);
        assert!((f.u.determinant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn real_polar_rejects_orientation_reversal() {
        assert!(matches!(
            real_polar(&diag_real(&[1.0, -1.0])),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            real_polar(&diag_real(&[1.0, 0.0])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn complex_polar_of_real_inputs() {
        let r = complexify(&rotation2(1.1));
        let f = complex_polar(&r).unwrap();
        assert!((&f.s - CMat::identity(2, 2)).norm() < 1e-13);
        assert!((&f.q - &r).norm() < 1e-13);

        let d = complexify(&diag_real(&[2.0, 3.0]));
        let f = complex_polar(&d).unwrap();
        assert!((&f.s - &d).norm() < 1e-13);
        assert!((&f.q - CMat::identity(2, 2)).norm() < 1e-13);
        assert!(f.within_tolerance(POLAR_TOL));
    }

    #[test]
    fn complex_polar_names_offending_eigenvalue() {
        // h = diag(i, 1): hhᵀ = diag(−1, 1).
        let h = matrix::diag_complex(&[C64::new(0.0, 1.0), C64::new(1.0, 0.0)]);
        match complex_polar(&h) {
            Err(Error::BranchCut { eigenvalue }) => {
                assert!((eigenvalue - C64::new(-1.0, 0.0)).norm() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nearest_orthogonal_of_real_rotation() {
        let q = complexify(&rotation2(0.7));
        let proj = nearest_special_orthogonal(&q, MatrixNorm::Operator2).unwrap();
        assert!(proj.dist < 1e-14);
        assert!((&proj.u - rotation2(0.7)).norm() < 1e-14);
    }

    #[test]
    fn nearest_orthogonal_of_imaginary_angle_rotation() {
        // R(it) = [[cosh t, −i sinh t], [i sinh t, cosh t]].
        let t = 0.05_f64;
        let (ch, sh) = (t.cosh(), t.sinh());
        let q = CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(ch, 0.0),
                C64::new(0.0, -sh),
                C64::new(0.0, sh),
                C64::new(ch, 0.0),
            ],
        );
        let proj = nearest_special_orthogonal(&q, MatrixNorm::Operator2).unwrap();
        assert!((&proj.u - RMat::identity(2, 2)).norm() < 1e-14);
        let expected = matrix::opnorm(&(&q - CMat::identity(2, 2)));
        assert!((proj.dist - expected).abs() < 1e-14);
        // ‖Re Q‖ = cosh t, ‖Im Q‖ = sinh t, cosh² − sinh² = 1.
        assert!((proj.real_norm - ch).abs() < 1e-14);
        assert!((proj.imag_norm - sh).abs() < 1e-14);
        assert!(proj.norm_identity_defect().abs() < 1e-12);
    }

    #[test]
    fn nearest_orthogonal_rejects_non_orthogonal() {
        let q = complexify(&diag_real(&[2.0, 0.5]));
        assert!(matches!(
            nearest_special_orthogonal(&q, MatrixNorm::Operator2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn psi_is_complex_differentiable() {
        let h = CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(1.2, 0.01),
                C64::new(0.3, -0.02),
                C64::new(-0.1, 0.0),
                C64::new(0.9, 0.015),
            ],
        );
        let e = RMat::from_row_slice(2, 2, &[0.3, -0.7, 0.5, 0.1]);
        let r1 = holomorphy_residual(&h, &e, 1e-3).unwrap();
        let r2 = holomorphy_residual(&h, &e, 5e-4).unwrap();
        // Second order: halving ε divides the defect by about four.
        let ratio = r1 / r2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}
