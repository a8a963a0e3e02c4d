use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liegroups::GroupSpec;
use crate::matrix::MatrixNorm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Cones,
    Sqrt,
    Polar,
    Action,
    Cover,
    All,
}

impl Suite {
    pub const ALL: [Self; 6] = [
        Self::Cones,
        Self::Sqrt,
        Self::Polar,
        Self::Action,
        Self::Cover,
        Self::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Cones => "cones",
            Self::Sqrt => "sqrt",
            Self::Polar => "polar",
            Self::Action => "action",
            Self::Cover => "cover",
            Self::All => "all",
        }
    }

    /// Index of the suite's random stream; fixed so that `all` reproduces the
    /// individual suites.
    pub(crate) fn stream(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

/// Parameters of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub suite: Suite,
    pub group: GroupSpec,
    pub deltas: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Residual tolerance for square roots and polar factors, relative to the input norm.
    pub tol: f64,
    /// Radius of the algebra ball the group samples are drawn from.
    pub radius: f64,
    pub matrix_norm: MatrixNorm,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub const DEFAULT_TOL: f64 = 1e-10;
    pub const DEFAULT_RADIUS: f64 = 1.0;
    pub const MAX_DELTA: f64 = 0.1;

    pub fn new(suite: Suite, group: GroupSpec, deltas: Vec<f64>, trials: usize, seed: u64) -> Self {
        Self {
            suite,
            group,
            deltas,
            trials,
            seed,
            tol: Self::DEFAULT_TOL,
            radius: Self::DEFAULT_RADIUS,
            matrix_norm: MatrixNorm::Operator2,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.deltas.is_empty() {
            return Err(Error::Config("the aperture grid is empty".into()));
        }
        if let Some(d) = self
            .deltas
            .iter()
            .find(|&&d| !(d > 0.0 && d <= Self::MAX_DELTA))
        {
            return Err(Error::Config(format!(
                "aperture {d} outside (0, {}]",
                Self::MAX_DELTA
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance {} must be positive",
                self.tol
            )));
        }
        if !(self.radius >= 0.0 && self.radius <= 2.0) {
            return Err(Error::Config(format!(
                "radius {} outside [0, 2]",
                self.radius
            )));
        }
        Ok(())
    }
}
