//! Dense real and complex matrix helpers shared by every module.
//!
//! Complex matrices are stored as `DMatrix<Complex<f64>>`. The transpose used
//! throughout is the plain (bilinear) transpose, never the conjugate one: complex
//! symmetric and complex orthogonal matrices are defined with respect to it.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;

/// Matrix norm used for cone apertures and distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixNorm {
    /// Largest singular value.
    #[default]
    Operator2,
    Frobenius,
}

pub fn re(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn im(m: &CMat) -> RMat {
    m.map(|z| z.im)
}

pub fn from_parts(re: &RMat, im: &RMat) -> CMat {
    re.zip_map(im, C64::new)
}

pub fn complexify(m: &RMat) -> CMat {
    m.map(|a| C64::new(a, 0.0))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn real_norm(m: &RMat, norm: MatrixNorm) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    match norm {
        MatrixNorm::Operator2 => m.clone().singular_values().max(),
        MatrixNorm::Frobenius => m.norm(),
    }
}

pub fn complex_norm(m: &CMat, norm: MatrixNorm) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    match norm {
        MatrixNorm::Operator2 => m.clone().singular_values().max(),
        MatrixNorm::Frobenius => m.norm(),
    }
}

/// Spectral norm, the default for every residual in the crate.
pub fn opnorm(m: &CMat) -> f64 {
    complex_norm(m, MatrixNorm::Operator2)
}

pub fn ensure_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn ensure_finite_real(m: &RMat) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn ensure_square<T>(m: &DMatrix<T>) -> Result<usize>
where
    T: nalgebra::Scalar,
{
    if m.nrows() == m.ncols() {
        Ok(m.nrows())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// `‖M − Mᵀ‖_F / ‖M‖_F`, zero for the zero matrix.
pub fn relative_asymmetry(m: &CMat) -> f64 {
    let scale = m.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (m - m.transpose()).norm() / scale
}

pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.transpose()).scale(0.5)
}

pub fn symmetrize_real(m: &RMat) -> RMat {
    (m + m.transpose()).scale(0.5)
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn sym_eigen(m: &RMat) -> (Vec<f64>, RMat) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(symmetrize_real(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = RMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_sym_eigenvalue(m: &RMat) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    sym_eigen(m).0[0]
}

pub fn is_positive_definite(m: &RMat) -> bool {
    min_sym_eigenvalue(m) > 0.0
}

/// Plane rotation by `theta` in the (0, 1) coordinate plane.
pub fn rotation2(theta: f64) -> RMat {
    let (s, c) = theta.sin_cos();
    RMat::from_row_slice(2, 2, &[c, -s, s, c])
}

pub fn diag_real(values: &[f64]) -> RMat {
    RMat::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

pub fn diag_complex(values: &[C64]) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

/// Serde adapter writing a real matrix as a list of rows.
pub mod serde_rows {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::RMat;

    pub fn serialize<S: Serializer>(m: &RMat, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<RMat, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        Ok(RMat::from_fn(rows.len(), cols, |r, c| rows[r][c]))
    }
}
