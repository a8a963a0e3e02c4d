//! The universal cover of `SL(2, ℝ)` as pairs `(g, x)` with `e^{ix}` equal to
//! the phase of the orthogonal polar factor `ψ(g) = R(θ)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::lift::{chi, lift_path, CirclePath};
use crate::error::{Error, Result};
use crate::matrix::{self, RMat, C64};
use crate::polar;

/// Tolerance on the cover compatibility condition and on `det g = 1`.
pub const COVER_TOL: f64 = 1e-9;

const INVALID_TOL: f64 = 1e-6;
const INITIAL_STEPS: usize = 256;
const MAX_STEPS: usize = 1 << 20;

/// Principal angle `θ ∈ (−π, π]` of `ψ(g) = R(θ)` for `g ∈ GL(2, ℝ)⁺`.
pub fn psi_angle(g: &RMat) -> Result<f64> {
    if g.shape() != (2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "expected 2×2, got {:?}",
            g.shape()
        )));
    }
    let u = polar::real_polar(g)?.u;
    let theta = u[(1, 0)].atan2(u[(0, 0)]);
    Ok(if theta <= -PI { theta + TAU } else { theta })
}

fn psi_phase(g: &RMat) -> Result<C64> {
    psi_angle(g).map(chi)
}

/// `γ_g(t) = exp(t·log P)·R(t·θ̄)` where `g = P·R(θ̄)`.
pub fn canonical_path(g: &RMat, t: f64) -> Result<RMat> {
    Ok(PolarPath::new(g)?.at(t))
}

/// `t ↦ P^t·R(tθ̄)` with `P^t` evaluated from one eigendecomposition of `P`.
struct PolarPath {
    values: Vec<f64>,
    vectors: RMat,
    theta: f64,
}

impl PolarPath {
    fn new(g: &RMat) -> Result<Self> {
        let theta = psi_angle(g)?;
        let (values, vectors) = matrix::sym_eigen(&polar::real_polar(g)?.p);
        Ok(Self {
            values,
            vectors,
            theta,
        })
    }

    fn at(&self, t: f64) -> RMat {
        let powered: Vec<f64> = self.values.iter().map(|l| l.powf(t)).collect();
        &self.vectors
            * matrix::diag_real(&powered)
            * self.vectors.transpose()
            * matrix::rotation2(t * self.theta)
    }
}

/// `t ↦ R(2πkt)`, sampled at `samples` points of `[0, 1]`.
pub fn rotation_loop(k: i64, samples: usize) -> Vec<RMat> {
    sample_unit_interval(samples, |t| matrix::rotation2(TAU * k as f64 * t))
}

/// `t ↦ a·R(2πkt)·a⁻¹`.
pub fn conjugated_rotation_loop(a: &RMat, k: i64, samples: usize) -> Result<Vec<RMat>> {
    let a_inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("conjugating matrix is singular".into()))?;
    Ok(sample_unit_interval(samples, |t| {
        a * matrix::rotation2(TAU * k as f64 * t) * &a_inv
    }))
}

/// `t ↦ exp(t(1−t)X)`.
pub fn contractible_loop(x: &RMat, samples: usize) -> Vec<RMat> {
    sample_unit_interval(samples, |t| (x * (t * (1.0 - t))).exp())
}

fn sample_unit_interval(samples: usize, f: impl Fn(f64) -> RMat) -> Vec<RMat> {
    let last = samples.saturating_sub(1).max(1) as f64;
    (0..samples).map(|k| f(k as f64 / last)).collect()
}

/// Winding of `phase(ψ(g(t)))` along a sampled loop in `SL(2, ℝ)`.
///
/// With `closed`, the step from the last sample back to the first is included;
/// otherwise the loop is expected to end where it starts.
pub fn winding_number(loop_: &[RMat], closed: bool) -> Result<i64> {
    if loop_.is_empty() {
        return Ok(0);
    }
    let phases = loop_
        .iter()
        .map(|g| psi_phase(g).map(|z| vec![z]))
        .collect::<Result<Vec<_>>>()?;
    let path = CirclePath::new(phases, closed)?;
    if closed {
        return Ok(path.winding()?[0]);
    }
    let start = psi_angle(&loop_[0])?;
    let lift = lift_path(&path, &[start])?;
    let turns = (lift.last().expect("non-empty")[0] - start) / TAU;
    if (turns - turns.round()).abs() > INVALID_TOL {
        return Err(Error::Domain(format!(
            "path is not a loop: {turns:.6} turns"
        )));
    }
    Ok(turns.round() as i64)
}

/// A point `(g, x)` of the universal cover of `SL(2, ℝ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverElement {
    #[serde(with = "matrix::serde_rows")]
    pub g: RMat,
    pub x: f64,
}

impl CoverElement {
    pub fn new(g: RMat, x: f64) -> Result<Self> {
        if g.shape() != (2, 2) {
            return Err(Error::DimensionMismatch(format!(
                "expected 2×2, got {:?}",
                g.shape()
            )));
        }
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        let det = g.determinant();
        if (det - 1.0).abs() > COVER_TOL {
            return Err(Error::Domain(format!("det g = {det} is not 1")));
        }
        let defect = (chi(x) - psi_phase(&g)?).norm();
        if defect > COVER_TOL {
            return Err(Error::Domain(format!(
                "e^(ix) misses the phase of ψ(g) by {defect:.3e}"
            )));
        }
        Ok(Self { g, x })
    }

    pub fn identity() -> Self {
        Self {
            g: RMat::identity(2, 2),
            x: 0.0,
        }
    }

    /// The endpoint of the canonical path's lift from the identity.
    pub fn canonical(g: RMat) -> Result<Self> {
        let x = psi_angle(&g)?;
        Self::new(g, x)
    }

    /// The deck transformation `(g, x) ↦ (g, x + 2πk)`.
    pub fn deck_shift(&self, k: i64) -> Self {
        Self {
            g: self.g.clone(),
            x: self.x + TAU * k as f64,
        }
    }

    /// Sheet index relative to the canonical lift.
    pub fn sheet(&self) -> Result<i64> {
        let offset = (self.x - psi_angle(&self.g)?) / TAU;
        let k = offset.round();
        if (offset - k).abs() * TAU > INVALID_TOL {
            return Err(Error::InvalidElement {
                offset: (offset - k) * TAU,
            });
        }
        Ok(k as i64)
    }
}

/// Group law of the universal cover, computed by lifting
/// `t ↦ phase(ψ(a.g·γ_b(t)))` from `a.x` and shifting by the sheet of `b`.
pub fn cover_multiply(a: &CoverElement, b: &CoverElement) -> Result<CoverElement> {
    let k = b.sheet()?;
    let path = PolarPath::new(&b.g)?;
    let mut steps = INITIAL_STEPS;
    let mut previous: Option<f64> = None;
    while steps <= MAX_STEPS {
        let samples: Vec<RMat> = (0..=steps)
            .map(|i| &a.g * path.at(i as f64 / steps as f64))
            .collect();
        let end = match lift_endpoint(&samples, a.x) {
            Ok(end) => Some(end),
            Err(Error::Resolution { .. }) => None,
            Err(e) => return Err(e),
        };
        if let (Some(p), Some(e)) = (previous, end) {
            if (p - e).abs() <= COVER_TOL {
                return Ok(CoverElement {
                    g: &a.g * &b.g,
                    x: e + TAU * k as f64,
                });
            }
        }
        previous = end;
        steps *= 2;
    }
    Err(Error::Resolution {
        step: MAX_STEPS,
        jump: f64::NAN,
    })
}

fn lift_endpoint(samples: &[RMat], start: f64) -> Result<f64> {
    let phases = samples
        .iter()
        .map(|g| psi_phase(g).map(|z| vec![z]))
        .collect::<Result<Vec<_>>>()?;
    let path = CirclePath::new(phases, false)?;
    Ok(lift_path(&path, &[start])?.last().expect("non-empty")[0])
}
