use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::matrix::C64;

/// Distance between distinct preimages of a point under `χ(x) = e^{ix}`.
pub const PREIMAGE_SEPARATION: f64 = TAU;

const UNIT_TOL: f64 = 1e-9;

/// `χ(x) = e^{ix}`.
pub fn chi(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

/// Signed angle from `from` to `to`, in `(−π, π]`.
pub fn angle_step(from: C64, to: C64) -> f64 {
    (to * from.conj()).arg()
}

/// A sampled path on the torus `𝕋ⁿ`; each sample holds `n` unit complex numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct CirclePath {
    samples: Vec<Vec<C64>>,
    closed: bool,
}

impl CirclePath {
    pub fn new(samples: Vec<Vec<C64>>, closed: bool) -> Result<Self> {
        let dim = samples.first().map_or(0, Vec::len);
        for s in &samples {
            if s.len() != dim {
                return Err(Error::DimensionMismatch(
                    "torus samples differ in dimension".into(),
                ));
            }
            if s.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            if let Some(z) = s.iter().find(|z| (z.norm() - 1.0).abs() > UNIT_TOL) {
                return Err(Error::Domain(format!(
                    "sample {z} is not on the unit circle"
                )));
            }
        }
        Ok(Self { samples, closed })
    }

    /// Path through `χⁿ` of the given angle samples.
    pub fn from_angles(angles: &[Vec<f64>], closed: bool) -> Result<Self> {
        Self::new(
            angles
                .iter()
                .map(|a| a.iter().map(|&x| chi(x)).collect())
                .collect(),
            closed,
        )
    }

    pub fn samples(&self) -> &[Vec<C64>] {
        &self.samples
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    /// Integer winding per coordinate of a closed path, including the step from
    /// the last sample back to the first.
    pub fn winding(&self) -> Result<Vec<i64>> {
        if !self.closed {
            return Err(Error::Domain("winding number needs a closed path".into()));
        }
        let start = self
            .samples
            .first()
            .map(|s| s.iter().map(|z| z.arg()).collect::<Vec<_>>());
        let Some(start) = start else {
            return Ok(Vec::new());
        };
        let lift = lift_path(self, &start)?;
        let last = lift.last().expect("non-empty");
        let first = &self.samples[0];
        let back = &self.samples[self.samples.len() - 1];
        let mut out = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let step = angle_step(back[j], first[j]);
            if step.abs() >= FRAC_PI_2 {
                return Err(Error::Resolution {
                    step: self.samples.len() - 1,
                    jump: step.abs(),
                });
            }
            let total = last[j] + step - start[j];
            out.push((total / TAU).round() as i64);
        }
        Ok(out)
    }
}

/// Continuous lift of `path` through `χⁿ`, starting at `start`.
///
/// Every consecutive pair of samples must be less than `π/2` apart in each
/// coordinate; the lifted steps are then the principal angle differences.
pub fn lift_path(path: &CirclePath, start: &[f64]) -> Result<Vec<Vec<f64>>> {
    let Some(first) = path.samples.first() else {
        return Ok(Vec::new());
    };
    if start.len() != first.len() {
        return Err(Error::DimensionMismatch(format!(
            "start has {} coordinates, path has {}",
            start.len(),
            first.len()
        )));
    }
    if let Some(j) = (0..start.len()).find(|&j| (chi(start[j]) - first[j]).norm() > UNIT_TOL) {
        return Err(Error::Domain(format!(
            "start coordinate {j} does not map to the first sample"
        )));
    }
    let mut out = Vec::with_capacity(path.samples.len());
    let mut current = start.to_vec();
    out.push(current.clone());
    for (k, pair) in path.samples.windows(2).enumerate() {
        for j in 0..current.len() {
            let step = angle_step(pair[0][j], pair[1][j]);
            if step.abs() >= FRAC_PI_2 {
                return Err(Error::Resolution {
                    step: k,
                    jump: step.abs(),
                });
            }
            current[j] += step;
        }
        out.push(current.clone());
    }
    debug_assert!(out
        .windows(2)
        .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| (a - b).abs() < PI)));
    Ok(out)
}

/// Whether `(z, w)` lies on the pullback of the cover `χⁿ`, i.e. `|χ(w_j) − z_j| ≤ tol`
/// for every coordinate.
pub fn pullback_member(z_image: &[C64], w: &[f64], tol: f64) -> bool {
    z_image.len() == w.len()
        && z_image
            .iter()
            .zip(w)
            .all(|(&z, &x)| (chi(x) - z).norm() <= tol)
}
