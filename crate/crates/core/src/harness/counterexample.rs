//! Searches for witnesses that certain plausible inclusions fail.
//!
//! Each claim names an inclusion that does not hold in general; a witness is a
//! concrete input satisfying the hypotheses whose margin shows the violation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::io::MatrixFile;
use super::report::{Report, Witness};
use crate::cones::{self, ConeParams};
use crate::error::{Error, Result};
use crate::matrix::{self, CMat, RMat, C64};
use crate::rng::{self, StreamRng};

/// Factor between the tube aperture and the cone aperture that the `h` claims violate.
pub const AMPLIFICATION: f64 = 10.0;
/// Dimension used by the `h` claims.
pub const TUBE_DIM: usize = 3;

const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Claim {
    /// `h ∈ E_δ`, real `x` with `hx ∉ V_{10δ}`.
    #[serde(rename = "hx-not-in-V")]
    HxNotInV,
    /// `h ∈ E_δ`, real `x` with `hhᵀx ∉ V_{10δ}`.
    #[serde(rename = "hhTx-not-in-V")]
    HhtxNotInV,
    /// `h ∈ E_δ` with `hᵀh ∉ M⁺_{10δ}`.
    #[serde(rename = "hTh-not-in-Mplus")]
    HthNotInMplus,
    /// `B ∈ M⁺_δ` with `Re(B²)` not positive semidefinite.
    #[serde(rename = "B2-not-psd")]
    B2NotPsd,
    /// `A, B ∈ M_δ` with `AB ∉ M_δ`.
    #[serde(rename = "product-not-in-M")]
    ProductNotInM,
}

impl Claim {
    pub const ALL: [Self; 5] = [
        Self::HxNotInV,
        Self::HhtxNotInV,
        Self::HthNotInMplus,
        Self::B2NotPsd,
        Self::ProductNotInM,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::HxNotInV => "hx-not-in-V",
            Self::HhtxNotInV => "hhTx-not-in-V",
            Self::HthNotInMplus => "hTh-not-in-Mplus",
            Self::B2NotPsd => "B2-not-psd",
            Self::ProductNotInM => "product-not-in-M",
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown claim {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessOrigin {
    /// The closed-form family.
    Family,
    /// Random search candidate at the recorded seed.
    Random,
}

/// A verified violation of a claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub claim: Claim,
    pub delta: f64,
    pub origin: WitnessOrigin,
    pub seed: Option<u64>,
    /// Inputs by role: `g`, `p`, `x` for the `h` claims, `B` or `A`, `B` otherwise.
    pub matrices: BTreeMap<String, MatrixFile>,
    /// Hypothesis margin; positive when the hypotheses hold.
    pub hypothesis_margin: f64,
    /// Conclusion margin; not positive when the conclusion fails.
    pub conclusion_margin: f64,
}

/// Margins `(hypothesis, conclusion)` for a candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    pub hypothesis: f64,
    pub conclusion: f64,
}

impl Margins {
    pub fn violates(&self, claim: Claim) -> bool {
        let concluded = match claim {
            Claim::B2NotPsd => self.conclusion >= 0.0,
            _ => self.conclusion > 0.0,
        };
        self.hypothesis > 0.0 && !concluded
    }
}

struct Candidate {
    matrices: BTreeMap<String, CMat>,
}

impl Candidate {
    fn get(&self, key: &str) -> Result<&CMat> {
        self.matrices
            .get(key)
            .ok_or_else(|| Error::Domain(format!("witness lacks matrix {key}")))
    }
}

fn tube_hypothesis(g: &CMat, p: &CMat, delta: f64) -> Result<f64> {
    let n = matrix::ensure_square(p)?;
    if g.iter().any(|z| z.im != 0.0) {
        return Err(Error::Domain("g must be real".into()));
    }
    let det = matrix::re(g).determinant();
    let dist = matrix::opnorm(&(p - CMat::identity(n, n)));
    Ok(if det > 0.0 { delta - dist } else { -1.0 })
}

fn margins(claim: Claim, delta: f64, c: &Candidate) -> Result<Margins> {
    let target = AMPLIFICATION * delta;
    match claim {
        Claim::HxNotInV | Claim::HhtxNotInV | Claim::HthNotInMplus => {
            let (g, p) = (c.get("g")?, c.get("p")?);
            let hypothesis = tube_hypothesis(g, p, delta)?;
            let h = g * p;
            let conclusion = match claim {
                Claim::HthNotInMplus => {
                    cones::symmetric_cone_margin(&(h.transpose() * &h), target)?.min()
                }
                _ => {
                    let x = c.get("x")?;
                    let image = if claim == Claim::HxNotInV {
                        &h * x
                    } else {
                        &h * h.transpose() * x
                    };
                    cones::vector_cone_margin(&image.column(0).into_owned(), target)?
                }
            };
            Ok(Margins {
                hypothesis,
                conclusion,
            })
        }
        Claim::B2NotPsd => {
            let b = c.get("B")?;
            let hypothesis = cones::symmetric_cone_margin(b, delta)?.min();
            let conclusion =
                matrix::min_sym_eigenvalue(&matrix::symmetrize_real(&matrix::re(&(b * b))));
            Ok(Margins {
                hypothesis,
                conclusion,
            })
        }
        Claim::ProductNotInM => {
            let params = ConeParams::new(delta)?;
            let (a, b) = (c.get("A")?, c.get("B")?);
            let hypothesis =
                cones::matrix_cone_margin(a, &params)?.min(cones::matrix_cone_margin(b, &params)?);
            let conclusion = cones::matrix_cone_margin(&(a * b), &params)?;
            Ok(Margins {
                hypothesis,
                conclusion,
            })
        }
    }
}

fn unit_column(n: usize, j: usize) -> CMat {
    CMat::from_fn(n, 1, |r, _| C64::new(if r == j { 1.0 } else { 0.0 }, 0.0))
}

/// The closed-form witness family at aperture `delta`.
///
/// The `h` claims use `g = diag(L, 1, 1/L)`, `p = I + i·0.9δ·E₁₂` and `x = e₂`,
/// for which the relevant aperture is `0.9δL`. `B2-not-psd` uses
/// `Re B = diag(1, M)`, `Im B = a(E₁₂ + E₂₁)`, `a = 0.9δ√M`, `M = 1.5/δ²`, so that
/// `Re(B²) = diag(1 − a², M² − a²)`. `product-not-in-M` uses
/// `A = E₁₁ + icE₂₂`, `B = E₂₂ + icE₁₁`, `AB = icI`.
fn family(claim: Claim, delta: f64) -> Candidate {
    let c = 0.9 * delta;
    let mut matrices = BTreeMap::new();
    match claim {
        Claim::HxNotInV | Claim::HhtxNotInV | Claim::HthNotInMplus => {
            let l = 20.0;
            let g = matrix::complexify(&matrix::diag_real(&[l, 1.0, 1.0 / l]));
            let mut p = CMat::identity(TUBE_DIM, TUBE_DIM);
            p[(0, 1)] = C64::new(0.0, c);
            matrices.insert("g".into(), g);
            matrices.insert("p".into(), p);
            matrices.insert("x".into(), unit_column(TUBE_DIM, 1));
        }
        Claim::B2NotPsd => {
            let m = 1.5 / (delta * delta);
            let a = c * m.sqrt();
            let mut b = matrix::complexify(&matrix::diag_real(&[1.0, m]));
            b[(0, 1)] = C64::new(0.0, a);
            b[(1, 0)] = C64::new(0.0, a);
            matrices.insert("B".into(), b);
        }
        Claim::ProductNotInM => {
            let a = matrix::diag_complex(&[C64::new(1.0, 0.0), C64::new(0.0, c)]);
            let b = matrix::diag_complex(&[C64::new(0.0, c), C64::new(1.0, 0.0)]);
            matrices.insert("A".into(), a);
            matrices.insert("B".into(), b);
        }
    }
    Candidate { matrices }
}

fn random_orthogonal(rng: &mut StreamRng, n: usize) -> RMat {
    let q = rng::gaussian_matrix(rng, n, n).qr().q();
    if q.determinant() < 0.0 {
        let mut q = q;
        let mut col = q.column_mut(0);
        col *= -1.0;
        q
    } else {
        q
    }
}

/// `R₁ diag(σ) R₂` with log-uniform singular values spread over `spread` decades.
fn anisotropic(rng: &mut StreamRng, n: usize, spread: f64) -> (RMat, RMat) {
    let sigma: Vec<f64> = (0..n)
        .map(|_| 10f64.powf(rng.random_range(-spread / 2.0..=spread / 2.0)))
        .collect();
    let r1 = random_orthogonal(rng, n);
    let r2 = random_orthogonal(rng, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma[a].total_cmp(&sigma[b]));
    let weakest = r2.row(order[0]).transpose();
    (
        &r1 * matrix::diag_real(&sigma) * &r2,
        RMat::from_column_slice(n, 1, weakest.as_slice()),
    )
}

/// A complex matrix with real part `re` and a random imaginary part scaled to
/// aperture `t` relative to `re` in the operator norm.
fn with_imaginary(rng: &mut StreamRng, re: &RMat, t: f64) -> CMat {
    let noise = rng::gaussian_matrix(rng, re.nrows(), re.ncols());
    let scale = t * matrix::real_norm(re, matrix::MatrixNorm::Operator2)
        / matrix::real_norm(&noise, matrix::MatrixNorm::Operator2);
    matrix::from_parts(re, &(noise * scale))
}

fn random_candidate(claim: Claim, delta: f64, seed: u64) -> Candidate {
    let mut rng = rng::substream(seed, 0);
    let mut matrices = BTreeMap::new();
    match claim {
        Claim::HxNotInV | Claim::HhtxNotInV | Claim::HthNotInMplus => {
            let n = TUBE_DIM;
            let (g, weakest) = anisotropic(&mut rng, n, 4.0);
            let g = if g.determinant() < 0.0 { -g } else { g };
            let nilpotent = rng::gaussian_matrix(&mut rng, n, n);
            let nilpotent =
                &nilpotent / matrix::real_norm(&nilpotent, matrix::MatrixNorm::Operator2);
            let t = delta * rng.random_range(0.5..0.95);
            let mut zeta = matrix::from_parts(&RMat::zeros(n, n), &(nilpotent * t));
            let mut p = zeta.exp();
            while matrix::opnorm(&(&p - CMat::identity(n, n))) >= delta {
                zeta *= C64::new(0.9, 0.0);
                p = zeta.exp();
            }
            let x = if rng.random_bool(0.5) {
                weakest
            } else {
                RMat::from_column_slice(n, 1, rng::unit_vector(&mut rng, n).as_slice())
            };
            matrices.insert("g".into(), matrix::complexify(&g));
            matrices.insert("p".into(), p);
            matrices.insert("x".into(), matrix::complexify(&x));
        }
        Claim::B2NotPsd => {
            let n = rng.random_range(2..=4);
            let r = random_orthogonal(&mut rng, n);
            let spread: Vec<f64> = (0..n)
                .map(|_| 10f64.powf(rng.random_range(0.0..=5.0)))
                .collect();
            let re = &r * matrix::diag_real(&spread) * r.transpose();
            let y = rng::gaussian_symmetric(&mut rng, n);
            let b = matrix::from_parts(&re, &y);
            let ap = cones::symmetric_cone_aperture(&b).unwrap_or(f64::INFINITY);
            let t = delta * rng.random_range(0.5..0.99);
            let scaled = if ap.is_finite() && ap > 0.0 {
                y * (t / ap)
            } else {
                RMat::zeros(n, n)
            };
            matrices.insert("B".into(), matrix::from_parts(&re, &scaled));
        }
        Claim::ProductNotInM => {
            let n = rng.random_range(2..=3);
            let (ra, _) = anisotropic(&mut rng, n, 4.0);
            let (rb, _) = anisotropic(&mut rng, n, 4.0);
            let ta = delta * rng.random_range(0.5..0.99);
            let tb = delta * rng.random_range(0.5..0.99);
            matrices.insert("A".into(), with_imaginary(&mut rng, &ra, ta));
            matrices.insert("B".into(), with_imaginary(&mut rng, &rb, tb));
        }
    }
    Candidate { matrices }
}

fn to_counterexample(
    claim: Claim,
    delta: f64,
    origin: WitnessOrigin,
    seed: Option<u64>,
    c: &Candidate,
    m: Margins,
) -> Counterexample {
    Counterexample {
        claim,
        delta,
        origin,
        seed,
        matrices: c
            .matrices
            .iter()
            .map(|(k, v)| (k.clone(), MatrixFile::from_complex(v)))
            .collect(),
        hypothesis_margin: m.hypothesis,
        conclusion_margin: m.conclusion,
    }
}

/// Random search over `budget` candidates; the first violating index wins, so
/// the result does not depend on scheduling.
pub fn random_search(
    claim: Claim,
    delta: f64,
    budget: usize,
    seed: u64,
) -> Result<Option<(Counterexample, usize)>> {
    if claim == Claim::ProductNotInM {
        ConeParams::new(delta)?;
    }
    let mut start = 0;
    while start < budget {
        let end = (start + CHUNK).min(budget);
        let hit = (start..end).into_par_iter().find_map_first(|i| {
            let s = rng::child_seed(seed, i as u64);
            let c = random_candidate(claim, delta, s);
            match margins(claim, delta, &c) {
                Ok(m) if m.violates(claim) => Some((
                    to_counterexample(claim, delta, WitnessOrigin::Random, Some(s), &c, m),
                    i + 1,
                )),
                _ => None,
            }
        });
        if hit.is_some() {
            return Ok(hit);
        }
        start = end;
    }
    Ok(None)
}

/// Recompute the margins of a stored witness; `Ok(true)` when it still violates its claim.
pub fn replay(w: &Counterexample) -> Result<bool> {
    let matrices = w
        .matrices
        .iter()
        .map(|(k, v)| Ok((k.clone(), v.to_complex()?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let m = margins(w.claim, w.delta, &Candidate { matrices })?;
    Ok(m.violates(w.claim))
}

/// Try the closed-form family at each aperture of the grid, then random search
/// with the budget split evenly across the grid.
pub fn find_counterexample(
    claim: Claim,
    deltas: &[f64],
    budget: usize,
    seed: u64,
) -> Result<Report> {
    if deltas.is_empty() {
        return Err(Error::Config("the aperture grid is empty".into()));
    }
    if let Some(d) = deltas.iter().find(|&&d| !(d > 0.0 && d < 1.0)) {
        return Err(Error::Config(format!("aperture {d} outside (0, 1)")));
    }
    if budget == 0 {
        return Err(Error::Config("budget must be at least 1".into()));
    }
    let started = Instant::now();
    let parameters = json!({ "claim": claim, "deltas": deltas, "budget": budget, "seed": seed });
    let mut report = Report::new(claim.name(), parameters);
    let found = super::with_thread_pool(|| search(claim, deltas, budget, seed))??;
    match found {
        Some((cx, attempts)) => {
            report.trials = attempts;
            report.record_pass("witness-found", Some(cx.delta));
            report.record_max("conclusion-margin", Some(cx.delta), cx.conclusion_margin);
            report.counterexample = Some(cx);
        }
        None => {
            report.trials = budget;
            report.record_failure(Witness {
                check: "witness-found".into(),
                delta: None,
                trial: budget,
                seed,
                detail: json!({ "reason": "budget exhausted" }),
            });
        }
    }
    report.wall_time_s = started.elapsed().as_secs_f64();
    Ok(report)
}

fn search(
    claim: Claim,
    deltas: &[f64],
    budget: usize,
    seed: u64,
) -> Result<Option<(Counterexample, usize)>> {
    let mut attempts = 0;
    for &delta in deltas {
        if attempts >= budget {
            return Ok(None);
        }
        attempts += 1;
        let c = family(claim, delta);
        let m = margins(claim, delta, &c)?;
        if m.violates(claim) {
            return Ok(Some((
                to_counterexample(claim, delta, WitnessOrigin::Family, None, &c, m),
                attempts,
            )));
        }
    }
    let share = (budget - attempts) / deltas.len();
    for (j, &delta) in deltas.iter().enumerate() {
        if let Some((cx, used)) =
            random_search(claim, delta, share, rng::child_seed(seed, j as u64))?
        {
            return Ok(Some((cx, attempts + used)));
        }
        attempts += share;
    }
    Ok(None)
}
