//! Eigenvalues of small dense complex matrices and the principal square root.
//!
//! The principal square root is defined for matrices whose spectrum lies in
//! the open right half-plane, using the branch of `√λ` that is positive on the
//! positive reals. It is computed with a determinant-scaled Denman–Beavers
//! iteration, which converges on exactly that domain.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cones::{self, ConeParams};
use crate::error::{Error, Result};
use crate::matrix::{self, CMat, RMat, C64};

/// Largest dimension accepted by [`eigenvalues`].
pub const MAX_EIGEN_DIM: usize = 16;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 100;

/// Relative tolerance for `S = U(I + iK)ΛUᵀ`.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Eigenvalues with multiplicity, in no particular order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
}

impl Spectrum {
    /// The eigenvalue with the smallest real part.
    pub fn leftmost(&self) -> Option<C64> {
        self.eigenvalues
            .iter()
            .copied()
            .min_by(|a, b| a.re.total_cmp(&b.re))
    }

    pub fn in_open_right_half_plane(&self) -> bool {
        self.eigenvalues.iter().all(|l| l.re > 0.0)
    }
}

pub fn eigenvalues(a: &CMat) -> Result<Spectrum> {
    let n = matrix::ensure_square(a)?;
    matrix::ensure_finite(a)?;
    if n > MAX_EIGEN_DIM {
        return Err(Error::UnsupportedSize {
            n,
            limit: MAX_EIGEN_DIM,
        });
    }
    let eigenvalues = match n {
        0 => Vec::new(),
        1 => vec![a[(0, 0)]],
        2 => {
            let half_trace = (a[(0, 0)] + a[(1, 1)]) * 0.5;
            let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
            let disc = (half_trace * half_trace - det).sqrt();
            vec![half_trace + disc, half_trace - disc]
        }
        _ => {
            let schur = a
                .clone()
                .try_schur(f64::EPSILON, 10_000 * n)
                .ok_or(Error::NoConvergence { residual: f64::NAN })?;
            let (_, t) = schur.unpack();
            (0..n).map(|i| t[(i, i)]).collect()
        }
    };
    Ok(Spectrum { eigenvalues })
}

/// Outcome of [`principal_sqrt`].
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalSqrt {
    pub s: CMat,
    /// `‖S² − B‖₂ / ‖B‖₂`.
    pub residual: f64,
    pub iterations: usize,
}

fn relative_residual(s: &CMat, b: &CMat) -> f64 {
    let scale = matrix::opnorm(b);
    if scale == 0.0 {
        return matrix::opnorm(&(s * s));
    }
    matrix::opnorm(&(s * s - b)) / scale
}

/// Principal square root of `b`, accurate to `tol` relative residual.
pub fn principal_sqrt(b: &CMat, tol: f64) -> Result<PrincipalSqrt> {
    let n = matrix::ensure_square(b)?;
    matrix::ensure_finite(b)?;
    let spectrum = eigenvalues(b)?;
    if let Some(lambda) = spectrum.leftmost() {
        if lambda.re <= 0.0 {
            return Err(Error::BranchCut { eigenvalue: lambda });
        }
    }
    if n == 0 {
        return Ok(PrincipalSqrt {
            s: b.clone(),
            residual: 0.0,
            iterations: 0,
        });
    }
    let symmetric = matrix::relative_asymmetry(b) <= cones::SYMMETRY_TOL;
    let tidy = |m: CMat| if symmetric { matrix::symmetrize(&m) } else { m };

    let (mut s, iterations) = denman_beavers(b, tol, &tidy)?;
    let mut residual = relative_residual(&s, b);

    // Newton polish from a converged iterate; a few steps are stable.
    for _ in 0..3 {
        if residual <= tol {
            break;
        }
        let Some(inv) = s.clone().try_inverse() else {
            break;
        };
        let candidate = tidy((&s + inv * b).scale(0.5));
        let r = relative_residual(&candidate, b);
        if r >= residual {
            break;
        }
        s = candidate;
        residual = r;
    }

    if residual > tol && n <= 4 {
        if let Some(candidate) = eigen_sqrt(b, &spectrum) {
            let candidate = tidy(candidate);
            let r = relative_residual(&candidate, b);
            if r < residual {
                s = candidate;
                residual = r;
            }
        }
    }

    if residual > tol {
        return Err(Error::NoConvergence { residual });
    }
    Ok(PrincipalSqrt {
        s,
        residual,
        iterations,
    })
}

fn denman_beavers(b: &CMat, tol: f64, tidy: &impl Fn(CMat) -> CMat) -> Result<(CMat, usize)> {
    let n = b.nrows();
    let mut y = b.clone();
    let mut z = CMat::identity(n, n);
    let mut scaling = true;
    for k in 1..=MAX_ITERATIONS {
        let y_inv = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular Denman–Beavers iterate".into()))?;
        let z_inv = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular Denman–Beavers iterate".into()))?;
        let mu = if scaling {
            let d = (y.determinant() * z.determinant()).norm();
            if d.is_finite() && d > 0.0 {
                d.powf(-0.5 / n as f64)
            } else {
                1.0
            }
        } else {
            1.0
        };
        let y_next = tidy((y.scale(mu) + z_inv.scale(1.0 / mu)).scale(0.5));
        let z_next = tidy((z.scale(mu) + y_inv.scale(1.0 / mu)).scale(0.5));
        let step = (&y_next - &y).norm() / y_next.norm();
        y = y_next;
        z = z_next;
        if !step.is_finite() {
            return Err(Error::NoConvergence { residual: f64::NAN });
        }
        if step < 1e-2 {
            scaling = false;
        }
        if step <= tol {
            return Ok((y, k));
        }
    }
    Ok((y, MAX_ITERATIONS))
}

/// `V diag(√λ) V⁻¹` with eigenvectors taken as null vectors of `B − λI`.
fn eigen_sqrt(b: &CMat, spectrum: &Spectrum) -> Option<CMat> {
    let n = b.nrows();
    let mut v = CMat::zeros(n, n);
    for (j, &lambda) in spectrum.eigenvalues.iter().enumerate() {
        let shifted = b - CMat::from_diagonal_element(n, n, lambda);
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t?;
        let (idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))?;
        let row = v_t.row(idx).adjoint();
        v.set_column(j, &row);
    }
    let v_inv = v.clone().try_inverse()?;
    let roots: Vec<C64> = spectrum.eigenvalues.iter().map(|l| l.sqrt()).collect();
    Some(&v * matrix::diag_complex(&roots) * v_inv)
}

/// Cone aperture guaranteed for the eigenvalues of a member of the symmetric
/// cone of aperture `delta` in dimension `n`: with `δ₁ = 2nδ`, the sector
/// spanned by the disc `|z − 1| < δ₁` has half-opening `δ₁ / √(1 − δ₁²)`.
/// `None` when `δ₁ ≥ 1`.
pub fn eigenvalue_cone_epsilon(n: usize, delta: f64) -> Option<f64> {
    let d1 = 2.0 * n as f64 * delta;
    (d1 < 1.0).then(|| d1 / (1.0 - d1 * d1).sqrt())
}

/// A failed structural assertion on a square root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StructureViolation {
    RealPartNotPositive { min_eigenvalue: f64 },
    OutsideCone { epsilon: f64, margin: f64 },
    CorrectionTooLarge { max_entry: f64, bound: f64 },
    Reconstruction { relative_error: f64 },
    NotSymmetric { asymmetry: f64 },
}

/// Square root of a symmetric-cone member together with its structure
/// `S = U(I + iK)ΛUᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtReport {
    pub s: CMat,
    pub residual: f64,
    /// Eigenvectors of `Re S`, `det U = +1`.
    pub u: RMat,
    /// Eigenvalues of `Re S`, ascending.
    pub lambda: Vec<f64>,
    /// `Im(UᵀSU) Λ⁻¹`.
    pub k: RMat,
    pub max_k: f64,
    /// The cone `M_ε⁺` tested for `S`, `ε = 2nδ`.
    pub cone_epsilon: f64,
    pub cone_margin: f64,
    pub violations: Vec<StructureViolation>,
}

impl SqrtReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compute `√B` and check the structure expected for `B` in the symmetric cone
/// of aperture `params.delta`: `Re S ≻ 0`, `S ∈ M_{2nδ}⁺`, `max |K_ij| ≤ 2δ`.
/// Failed checks are reported in [`SqrtReport::violations`].
pub fn verify_sqrt_structure(b: &CMat, params: &ConeParams, tol: f64) -> Result<SqrtReport> {
    if !cones::in_symmetric_cone(b, params)? {
        return Err(Error::Domain(format!(
            "matrix is not in the symmetric cone of aperture {}",
            params.delta
        )));
    }
    describe_sqrt(b, params.delta, tol)
}

/// The checks of [`verify_sqrt_structure`] at aperture `delta`, without
/// requiring `B` to lie in the symmetric cone of that aperture.
pub fn describe_sqrt(b: &CMat, delta: f64, tol: f64) -> Result<SqrtReport> {
    let n = matrix::ensure_square(b)?;
    if !(delta > 0.0) {
        return Err(Error::Config(format!(
            "aperture must be positive, got {delta}"
        )));
    }
    let root = principal_sqrt(b, tol)?;
    let s = root.s;
    let mut violations = Vec::new();

    let asymmetry = matrix::relative_asymmetry(&s);
    if asymmetry > 1e-10 {
        violations.push(StructureViolation::NotSymmetric { asymmetry });
    }

    let (lambda, mut u) = matrix::sym_eigen(&matrix::symmetrize_real(&matrix::re(&s)));
    if u.determinant() < 0.0 {
        let mut col = u.column_mut(n - 1);
        col *= -1.0;
    }
    let min_eigenvalue = lambda.first().copied().unwrap_or(f64::INFINITY);
    if min_eigenvalue <= 0.0 {
        violations.push(StructureViolation::RealPartNotPositive { min_eigenvalue });
    }

    let rotated_im = u.transpose() * matrix::im(&s) * &u;
    let mut k = rotated_im.clone();
    for (j, l) in lambda.iter().enumerate() {
        let mut col = k.column_mut(j);
        col /= *l;
    }
    let max_k = k.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let k_bound = 2.0 * delta;
    if !(max_k <= k_bound) {
        violations.push(StructureViolation::CorrectionTooLarge {
            max_entry: max_k,
            bound: k_bound,
        });
    }

    let uc = matrix::complexify(&u);
    let ik = matrix::from_parts(&RMat::identity(n, n), &k);
    let lam = matrix::complexify(&matrix::diag_real(&lambda));
    let rebuilt = &uc * ik * lam * uc.transpose();
    let relative_error = matrix::opnorm(&(&rebuilt - &s)) / matrix::opnorm(&s);
    if !(relative_error <= RECONSTRUCTION_TOL) {
        violations.push(StructureViolation::Reconstruction { relative_error });
    }

    let cone_epsilon = 2.0 * n as f64 * delta;
    let cone_margin = cones::symmetric_cone_margin(&s, cone_epsilon)?.min();
    if !(cone_margin > 0.0) {
        violations.push(StructureViolation::OutsideCone {
            epsilon: cone_epsilon,
            margin: cone_margin,
        });
    }

    Ok(SqrtReport {
        s,
        residual: root.residual,
        u,
        lambda,
        k,
        max_k,
        cone_epsilon,
        cone_margin,
        violations,
    })
}

/// `|det(A − λI)|` evaluated by LU, used to certify eigenvalues.
pub fn characteristic_value(a: &CMat, lambda: C64) -> f64 {
    let n = a.nrows();
    let shifted = a - CMat::from_diagonal(&DVector::from_element(n, lambda));
    shifted.determinant().norm()
}
