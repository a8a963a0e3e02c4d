use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::covering::IntMatrix;
use crate::error::{Error, Result};
use crate::matrix::{self, CMat, RMat, C64};
use crate::{polar, sqrtm};

/// One matrix entry: `[re, im]`, or a bare integer in integer files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntry {
    Integer(i64),
    Complex([f64; 2]),
}

/// Row-major matrix exchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<MatrixEntry>,
}

impl MatrixFile {
    pub fn from_complex(m: &CMat) -> Self {
        let entries = (0..m.nrows())
            .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| MatrixEntry::Complex([m[(r, c)].re, m[(r, c)].im]))
            .collect();
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn from_real(m: &RMat) -> Self {
        Self::from_complex(&matrix::complexify(m))
    }

    pub fn from_integer(m: &IntMatrix) -> Self {
        let entries = (0..m.nrows())
            .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| MatrixEntry::Integer(m[(r, c)]))
            .collect();
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    fn check_shape(&self) -> Result<()> {
        let expected = self.rows.checked_mul(self.cols).ok_or(Error::Overflow)?;
        if self.entries.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} matrix with {} entries",
                self.rows,
                self.cols,
                self.entries.len()
            )));
        }
        Ok(())
    }

    pub fn to_complex(&self) -> Result<CMat> {
        self.check_shape()?;
        let values: Vec<C64> = self
            .entries
            .iter()
            .map(|e| match *e {
                MatrixEntry::Integer(k) => C64::new(k as f64, 0.0),
                MatrixEntry::Complex([re, im]) => C64::new(re, im),
            })
            .collect();
        let m = CMat::from_row_slice(self.rows, self.cols, &values);
        matrix::ensure_finite(&m)?;
        Ok(m)
    }

    /// The real part, failing if any imaginary part is nonzero.
    pub fn to_real(&self) -> Result<RMat> {
        let m = self.to_complex()?;
        if m.iter().any(|z| z.im != 0.0) {
            return Err(Error::Domain("matrix has nonzero imaginary entries".into()));
        }
        Ok(matrix::re(&m))
    }

    pub fn to_integer(&self) -> Result<IntMatrix> {
        self.check_shape()?;
        let values = self
            .entries
            .iter()
            .map(|e| match *e {
                MatrixEntry::Integer(k) => Ok(k),
                MatrixEntry::Complex(_) => Err(Error::Domain("integer matrix expected".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix::from_row_slice(self.rows, self.cols, &values))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = serde_json::from_str::<Self>(&std::fs::read_to_string(path)?)?;
        file.check_shape()?;
        Ok(file)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecomposeMode {
    ComplexPolar,
    RealPolar,
    Sqrt,
}

impl DecomposeMode {
    pub const ALL: [Self; 3] = [Self::ComplexPolar, Self::RealPolar, Self::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Self::ComplexPolar => "complex-polar",
            Self::RealPolar => "real-polar",
            Self::Sqrt => "sqrt",
        }
    }
}

impl fmt::Display for DecomposeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecomposeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode {s:?}")))
    }
}

/// Named factors of a decomposition and its residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub mode: DecomposeMode,
    pub factors: BTreeMap<String, MatrixFile>,
    pub residuals: BTreeMap<String, f64>,
}

/// Factor `input` according to `mode`.
///
/// `complex-polar` yields `S`, `Q`; `real-polar` yields `P`, `U`; `sqrt` yields `S`.
pub fn decompose(input: &MatrixFile, mode: DecomposeMode) -> Result<Decomposition> {
    let mut factors = BTreeMap::new();
    let mut residuals = BTreeMap::new();
    match mode {
        DecomposeMode::ComplexPolar => {
            let h = input.to_complex()?;
            let f = polar::complex_polar(&h)?;
            residuals.insert("reconstruction".into(), f.residual_sq);
            residuals.insert("orthogonality".into(), f.residual_orth);
            residuals.insert("asymmetry".into(), f.asymmetry);
            factors.insert("S".into(), MatrixFile::from_complex(&f.s));
            factors.insert("Q".into(), MatrixFile::from_complex(&f.q));
        }
        DecomposeMode::RealPolar => {
            let g = input.to_real()?;
            let f = polar::real_polar(&g)?;
            let n = g.nrows();
            let scale = g.norm().max(f64::MIN_POSITIVE);
            residuals.insert("reconstruction".into(), (&f.p * &f.u - &g).norm() / scale);
            residuals.insert(
                "orthogonality".into(),
                (&f.u * f.u.transpose() - RMat::identity(n, n)).norm(),
            );
            residuals.insert("asymmetry".into(), (&f.p - f.p.transpose()).norm());
            factors.insert("P".into(), MatrixFile::from_real(&f.p));
            factors.insert("U".into(), MatrixFile::from_real(&f.u));
        }
        DecomposeMode::Sqrt => {
            let b = input.to_complex()?;
            let root = sqrtm::principal_sqrt(&b, sqrtm::DEFAULT_TOL)?;
            residuals.insert("square".into(), root.residual);
            factors.insert("S".into(), MatrixFile::from_complex(&root.s));
        }
    }
    Ok(Decomposition {
        mode,
        factors,
        residuals,
    })
}
