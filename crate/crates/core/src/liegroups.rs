//! Classical linear groups, their tubes in the complexification, and the
//! Siegel-product action.
//!
//! Groups are given by a real Lie algebra basis and a set of defining
//! equations. Samples are exponentials of random algebra elements; tube
//! samples `h = g·p` multiply such a real `g` by `p = exp(ζ)` with `ζ` in the
//! complexified algebra and `‖p − I‖ < δ`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, CMat, RMat, C64};
use crate::polar;
use crate::rng;

/// Tolerance on defining residuals of sampled group elements.
pub const SAMPLE_TOL: f64 = 1e-10;
/// Tolerance on defining residuals of polar factors.
pub const FACTOR_TOL: f64 = 1e-9;
/// Relative pivot threshold for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-8;
/// Resamples allowed when searching for a generic base point.
pub const MAX_RESAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupFamily {
    /// Real matrices with positive determinant.
    GlPlus,
    Sl,
    So,
    /// Identity component of `O(p, q)`, form `diag(I_p, −I_q)`.
    SoPq,
    /// Real symplectic group of size `2m`, form `[[0, I], [−I, 0]]`.
    Sp,
}

/// A classical real linear group together with its Lie algebra basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    pub family: GroupFamily,
    pub n: usize,
    pub signature: Option<(usize, usize)>,
    pub algebra_basis: Vec<RMat>,
    /// Invariant bilinear form `J` with `gᵀJg = J`, if any.
    pub form: Option<RMat>,
}

fn unit(n: usize, i: usize, j: usize) -> RMat {
    let mut m = RMat::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

fn antisym_basis(n: usize) -> Vec<RMat> {
    let mut basis = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            basis.push(unit(n, i, j) - unit(n, j, i));
        }
    }
    basis
}

impl GroupSpec {
    pub fn gl_plus(n: usize) -> Result<Self> {
        check_size(n, 1)?;
        let mut basis = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                basis.push(unit(n, i, j));
            }
        }
        Ok(Self {
            family: GroupFamily::GlPlus,
            n,
            signature: None,
            algebra_basis: basis,
            form: None,
        })
    }

    pub fn sl(n: usize) -> Result<Self> {
        check_size(n, 2)?;
        let mut basis = Vec::with_capacity(n * n - 1);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    basis.push(unit(n, i, j));
                }
            }
        }
        for i in 0..n - 1 {
            basis.push(unit(n, i, i) - unit(n, i + 1, i + 1));
        }
        Ok(Self {
            family: GroupFamily::Sl,
            n,
            signature: None,
            algebra_basis: basis,
            form: None,
        })
    }

    pub fn so(n: usize) -> Result<Self> {
        check_size(n, 2)?;
        Ok(Self {
            family: GroupFamily::So,
            n,
            signature: None,
            algebra_basis: antisym_basis(n),
            form: None,
        })
    }

    pub fn so_pq(p: usize, q: usize) -> Result<Self> {
        let n = p + q;
        check_size(n, 2)?;
        let mut diag = vec![1.0; p];
        diag.extend(std::iter::repeat_n(-1.0, q));
        let j = matrix::diag_real(&diag);
        // X = J·A with A antisymmetric solves XᵀJ + JX = 0.
        let basis = antisym_basis(n).into_iter().map(|a| &j * a).collect();
        Ok(Self {
            family: GroupFamily::SoPq,
            n,
            signature: Some((p, q)),
            algebra_basis: basis,
            form: Some(j),
        })
    }

    pub fn sp(n: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "symplectic size must be even and positive, got {n}"
            )));
        }
        check_size(n, 2)?;
        let m = n / 2;
        let mut j = RMat::zeros(n, n);
        for i in 0..m {
            j[(i, m + i)] = 1.0;
            j[(m + i, i)] = -1.0;
        }
        // X = J·S with S symmetric solves XᵀJ + JX = 0.
        let mut basis = Vec::with_capacity(m * (2 * m + 1));
        for a in 0..n {
            for b in a..n {
                let s = if a == b {
                    unit(n, a, a)
                } else {
                    unit(n, a, b) + unit(n, b, a)
                };
                basis.push(&j * s);
            }
        }
        Ok(Self {
            family: GroupFamily::Sp,
            n,
            signature: None,
            algebra_basis: basis,
            form: Some(j),
        })
    }

    pub fn dim(&self) -> usize {
        self.algebra_basis.len()
    }

    /// Named defining residuals of `g`. Quadratic residuals are scaled by
    /// `max(1, ‖g‖₂²)`.
    pub fn residuals(&self, g: &RMat) -> Vec<(&'static str, f64)> {
        let n = self.n;
        let det = g.determinant();
        let scale = matrix::real_norm(g, matrix::MatrixNorm::Operator2)
            .powi(2)
            .max(1.0);
        let positive = if det > 0.0 { 0.0 } else { f64::INFINITY };
        let det_one = (det - 1.0).abs();
        let quadratic = |form: &RMat| (g.transpose() * form * g - form).norm() / scale;
        match self.family {
            GroupFamily::GlPlus => vec![("det>0", positive)],
            GroupFamily::Sl => vec![("det-1", det_one)],
            GroupFamily::So => vec![
                ("gTg-I", quadratic(&RMat::identity(n, n))),
                ("det-1", det_one),
            ],
            GroupFamily::SoPq => vec![
                ("gTJg-J", quadratic(self.form.as_ref().expect("form"))),
                ("det-1", det_one),
            ],
            GroupFamily::Sp => vec![("gTJg-J", quadratic(self.form.as_ref().expect("form")))],
        }
    }

    pub fn max_residual(&self, g: &RMat) -> f64 {
        self.residuals(g).iter().fold(0.0_f64, |m, r| m.max(r.1))
    }

    /// Membership test up to `tol` on the defining residuals. Also requires
    /// `det g > 0`, which every element of the identity component satisfies.
    pub fn contains(&self, g: &RMat, tol: f64) -> bool {
        g.nrows() == self.n
            && g.ncols() == self.n
            && g.determinant() > 0.0
            && self.max_residual(g) <= tol
    }

    /// Residual of the linearized defining equations at the identity.
    pub fn algebra_residual(&self, x: &RMat) -> f64 {
        match self.family {
            GroupFamily::GlPlus => 0.0,
            GroupFamily::Sl => x.trace().abs(),
            GroupFamily::So => (x.transpose() + x).norm(),
            GroupFamily::SoPq | GroupFamily::Sp => {
                let j = self.form.as_ref().expect("form");
                (x.transpose() * j + j * x).norm()
            }
        }
    }
}

fn check_size(n: usize, min: usize) -> Result<()> {
    if n < min || n > 16 {
        return Err(Error::Config(format!("group size {n} outside [{min}, 16]")));
    }
    Ok(())
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.family, self.signature) {
            (GroupFamily::GlPlus, _) => write!(f, "gl+:{}", self.n),
            (GroupFamily::Sl, _) => write!(f, "sl:{}", self.n),
            (GroupFamily::So, _) => write!(f, "so:{}", self.n),
            (GroupFamily::SoPq, Some((p, q))) => write!(f, "so:{p},{q}"),
            (GroupFamily::SoPq, None) => write!(f, "so:{}", self.n),
            (GroupFamily::Sp, _) => write!(f, "sp:{}", self.n),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    /// Parses `gl+:n`, `sl:n`, `so:n`, `so:p,q` and `sp:2m`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unrecognized group '{s}'"));
        let (family, args) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<usize> = args
            .split(',')
            .map(|a| a.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (family.trim().to_ascii_lowercase().as_str(), nums.as_slice()) {
            ("gl+", [n]) => Self::gl_plus(*n),
            ("sl", [n]) => Self::sl(*n),
            ("so", [n]) => Self::so(*n),
            ("so", [p, q]) => Self::so_pq(*p, *q),
            ("sp", [n]) => Self::sp(*n),
            _ => Err(bad()),
        }
    }
}

impl Serialize for GroupSpec {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

fn random_algebra_element(spec: &GroupSpec, radius: f64, rng: &mut impl Rng) -> RMat {
    let n = spec.n;
    let mut x = RMat::zeros(n, n);
    for b in &spec.algebra_basis {
        let c: f64 = rng.random_range(-1.0..=1.0) * radius;
        x += b * c;
    }
    x
}

/// `exp(Σ cᵢ Xᵢ)` with `cᵢ` uniform in `[−radius, radius]`.
pub fn sample_group(spec: &GroupSpec, radius: f64, seed: u64) -> Result<RMat> {
    if !(0.0..=2.0).contains(&radius) {
        return Err(Error::Config(format!(
            "sampling radius {radius} outside [0, 2]"
        )));
    }
    let mut rng = rng::substream(seed, 0);
    Ok(random_algebra_element(spec, radius, &mut rng).exp())
}

/// A point `h = g·p` of the tube around a real group.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeSample {
    pub h: CMat,
    pub g: RMat,
    pub p: CMat,
    pub delta: f64,
}

/// Sample `h = g·p` with `g = sample_group(spec, radius)` and `p = exp(ζ)`,
/// `ζ` a random element of the complexified algebra scaled so that
/// `‖p − I‖₂` is uniform-ish in `(0, δ)`.
pub fn sample_tube(spec: &GroupSpec, delta: f64, radius: f64, seed: u64) -> Result<TubeSample> {
    if !(delta > 0.0 && delta <= 0.1) {
        return Err(Error::Config(format!(
            "tube aperture {delta} outside (0, 0.1]"
        )));
    }
    let g = sample_group(spec, radius, rng::child_seed(seed, 0))?;
    let mut rng = rng::substream(seed, 1);
    let n = spec.n;
    let id = CMat::identity(n, n);
    let mut zeta = CMat::zeros(n, n);
    for b in &spec.algebra_basis {
        let c = C64::new(rng::gaussian(&mut rng), rng::gaussian(&mut rng));
        zeta += matrix::complexify(b).map(|z| z * c);
    }
    let size = matrix::opnorm(&zeta);
    let target = delta * rng.random_range(0.05..1.0);
    let p = if size == 0.0 {
        id.clone()
    } else {
        let mut t = target / size;
        loop {
            let p = zeta.scale(t).exp();
            let dist = matrix::opnorm(&(&p - &id));
            if dist < delta {
                break p;
            }
            t *= 0.98 * target / dist;
        }
    };
    let h = matrix::complexify(&g) * &p;
    Ok(TubeSample { h, g, p, delta })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupPolar {
    pub p_factor: RMat,
    pub k_factor: RMat,
    pub p_residual: f64,
    pub k_residual: f64,
}

impl GroupPolar {
    /// Both factors lie in the group, as they must for a self-adjoint group.
    pub fn closed(&self) -> bool {
        self.p_residual <= FACTOR_TOL && self.k_residual <= FACTOR_TOL
    }
}

/// `g = p·k` with `p` symmetric positive definite and `k` orthogonal; reports
/// the defining residuals of both factors.
pub fn group_polar(spec: &GroupSpec, g: &RMat) -> Result<GroupPolar> {
    let f = polar::real_polar(g)?;
    Ok(GroupPolar {
        p_residual: spec.max_residual(&f.p),
        k_residual: spec.max_residual(&f.u),
        p_factor: f.p,
        k_factor: f.u,
    })
}

/// A point of `Σ⁺ × Σ⁺`: two complex symmetric matrices with positive
/// definite real parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelPoint {
    pub z1: CMat,
    pub z2: CMat,
}

fn check_siegel(z: &CMat) -> Result<()> {
    matrix::ensure_square(z)?;
    matrix::ensure_finite(z)?;
    let asym = matrix::relative_asymmetry(z);
    if asym > 1e-12 {
        return Err(Error::Asymmetric { asymmetry: asym });
    }
    if !matrix::is_positive_definite(&matrix::symmetrize_real(&matrix::re(z))) {
        return Err(Error::Domain("real part is not positive definite".into()));
    }
    Ok(())
}

impl SiegelPoint {
    pub fn new(z1: CMat, z2: CMat) -> Result<Self> {
        check_siegel(&z1)?;
        check_siegel(&z2)?;
        if z1.nrows() != z2.nrows() {
            return Err(Error::DimensionMismatch(
                "Siegel factors differ in size".into(),
            ));
        }
        Ok(Self { z1, z2 })
    }

    pub fn n(&self) -> usize {
        self.z1.nrows()
    }

    /// `z₁ = I + iY₁`, `z₂ = U·D·Uᵀ + iY₂` with `U` random orthogonal, `D`
    /// diagonal with distinct entries in `[1, 2]`, and small random symmetric `Yᵢ`.
    pub fn generic(n: usize, seed: u64) -> Result<Self> {
        let mut rng = rng::substream(seed, 0);
        let u = sample_group(&GroupSpec::so(n)?, 2.0, rng.random())?;
        let mut d: Vec<f64> = (0..n)
            .map(|i| 1.0 + (i as f64 + rng.random_range(0.1..0.9)) / n as f64)
            .collect();
        d.sort_by(f64::total_cmp);
        let y1 = rng::gaussian_symmetric(&mut rng, n).scale(0.1);
        let y2 = rng::gaussian_symmetric(&mut rng, n).scale(0.1);
        let x2 = matrix::symmetrize_real(&(&u * matrix::diag_real(&d) * u.transpose()));
        Self::new(
            matrix::from_parts(&RMat::identity(n, n), &y1),
            matrix::from_parts(&x2, &y2),
        )
    }
}

/// `g·(z₁, z₂) = (g z₁ gᵀ, g z₂ gᵀ)`.
pub fn siegel_act(g: &RMat, pt: &SiegelPoint) -> Result<SiegelPoint> {
    matrix::ensure_square(g)?;
    if g.nrows() != pt.n() {
        return Err(Error::DimensionMismatch(format!(
            "group element is {}x{}, point is {}x{}",
            g.nrows(),
            g.ncols(),
            pt.n(),
            pt.n()
        )));
    }
    if g.clone().try_inverse().is_none() {
        return Err(Error::Domain("acting matrix is singular".into()));
    }
    let gc = matrix::complexify(g);
    let act = |z: &CMat| matrix::symmetrize(&(&gc * z * gc.transpose()));
    SiegelPoint::new(act(&pt.z1), act(&pt.z2))
}

fn upper_coords(m: &CMat, out: &mut Vec<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
}

/// Real coordinates of `ξ ↦ (ξz₁ + z₁ξᵀ, ξz₂ + z₂ξᵀ)` applied to `x`.
fn tangent_image(x: &CMat, pt: &SiegelPoint) -> Vec<f64> {
    let mut out = Vec::new();
    for z in [&pt.z1, &pt.z2] {
        let img = x * z + z * x.transpose();
        upper_coords(&img, &mut out);
    }
    out
}

fn columns_to_matrix(cols: &[Vec<f64>]) -> RMat {
    let rows = cols.first().map_or(0, Vec::len);
    RMat::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Rank by Gaussian elimination with full pivoting, treating pivots below
/// `rel_tol · (largest pivot)` as zero.
pub fn numerical_rank(m: &RMat, rel_tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut rank = 0;
    let mut first_pivot = None;
    while rank < rows.min(cols) {
        let mut best = (0.0, rank, rank);
        for i in rank..rows {
            for j in rank..cols {
                let v = a[(i, j)].abs();
                if v > best.0 {
                    best = (v, i, j);
                }
            }
        }
        let (pivot, pi, pj) = best;
        let reference = *first_pivot.get_or_insert(pivot);
        if pivot == 0.0 || pivot <= rel_tol * reference {
            break;
        }
        a.swap_rows(rank, pi);
        a.swap_columns(rank, pj);
        for i in rank + 1..rows {
            let factor = a[(i, rank)] / a[(rank, rank)];
            if factor != 0.0 {
                for j in rank..cols {
                    let v = a[(rank, j)];
                    a[(i, j)] -= factor * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TangentRank {
    /// Real rank of the realified tangent map on the complexified algebra.
    pub rank: usize,
    /// Complex dimension of its kernel.
    pub kernel_dim: usize,
}

/// Rank of the orbit map's differential at the identity, on `L(G^c)`.
pub fn tangent_map_rank(spec: &GroupSpec, pt: &SiegelPoint) -> Result<TangentRank> {
    if pt.n() != spec.n {
        return Err(Error::DimensionMismatch(
            "point and group sizes differ".into(),
        ));
    }
    let mut cols = Vec::with_capacity(2 * spec.dim());
    for b in &spec.algebra_basis {
        let x = matrix::complexify(b);
        cols.push(tangent_image(&x, pt));
        cols.push(tangent_image(&x.map(|z| z * C64::i()), pt));
    }
    let rank = numerical_rank(&columns_to_matrix(&cols), RANK_TOL);
    let real_kernel = 2 * spec.dim() - rank;
    Ok(TangentRank {
        rank,
        kernel_dim: real_kernel.div_ceil(2),
    })
}

/// `dim(T ∩ iT)` for the real tangent space `T` of the orbit at `pt`; zero
/// exactly when the orbit is totally real there.
pub fn totally_real_defect(spec: &GroupSpec, pt: &SiegelPoint) -> Result<usize> {
    let tr = tangent_map_rank(spec, pt)?;
    if tr.kernel_dim != 0 {
        return Err(Error::Domain(format!(
            "tangent map has kernel of dimension {} at this point",
            tr.kernel_dim
        )));
    }
    let real: Vec<Vec<f64>> = spec
        .algebra_basis
        .iter()
        .map(|b| tangent_image(&matrix::complexify(b), pt))
        .collect();
    let mut both = real.clone();
    both.extend(spec.algebra_basis.iter().map(|b| {
        let x = matrix::complexify(b).map(|z| z * C64::i());
        tangent_image(&x, pt)
    }));
    let dim_t = numerical_rank(&columns_to_matrix(&real), RANK_TOL);
    let dim_sum = numerical_rank(&columns_to_matrix(&both), RANK_TOL);
    Ok((2 * dim_t).saturating_sub(dim_sum))
}

/// Draw base points until the tangent map is injective, at most
/// [`MAX_RESAMPLES`] extra draws. Returns the point and the number of draws.
pub fn generic_point(spec: &GroupSpec, seed: u64) -> Result<(SiegelPoint, usize)> {
    for attempt in 0..=MAX_RESAMPLES {
        let pt = SiegelPoint::generic(spec.n, rng::child_seed(seed, attempt as u64))?;
        if tangent_map_rank(spec, &pt)?.kernel_dim == 0 {
            return Ok((pt, attempt + 1));
        }
    }
    Err(Error::Degenerate(format!(
        "no generic point for {spec} after {} draws",
        MAX_RESAMPLES + 1
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_dimensions() {
        assert_eq!(GroupSpec::gl_plus(3).unwrap().dim(), 9);
        assert_eq!(GroupSpec::sl(3).unwrap().dim(), 8);
        assert_eq!(GroupSpec::so(4).unwrap().dim(), 6);
        assert_eq!(GroupSpec::so_pq(2, 1).unwrap().dim(), 3);
        assert_eq!(GroupSpec::sp(4).unwrap().dim(), 10);
        assert_eq!(GroupSpec::sp(6).unwrap().dim(), 21);
    }

    #[test]
    fn basis_satisfies_linearized_equations_and_is_independent() {
        for name in ["gl+:3", "sl:3", "so:3", "so:2,1", "sp:4"] {
            let spec: GroupSpec = name.parse().unwrap();
            for x in &spec.algebra_basis {
                assert!(spec.algebra_residual(x) < 1e-15, "{name}");
            }
            let cols: Vec<Vec<f64>> = spec
                .algebra_basis
                .iter()
                .map(|b| b.iter().copied().collect())
                .collect();
            assert_eq!(
                numerical_rank(&columns_to_matrix(&cols), RANK_TOL),
                spec.dim(),
                "{name}"
            );
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        for name in ["gl+:3", "sl:2", "so:5", "so:2,1", "sp:4"] {
            let spec: GroupSpec = name.parse().unwrap();
            assert_eq!(spec.to_string(), name);
        }
        assert!("sp:3".parse::<GroupSpec>().is_err());
        assert!("xx:3".parse::<GroupSpec>().is_err());
        assert!("sl".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn zero_radius_gives_identity() {
        let g = sample_group(&GroupSpec::sl(3).unwrap(), 0.0, 5).unwrap();
        assert_eq!(g, RMat::identity(3, 3));
    }

    #[test]
    fn samples_satisfy_defining_equations() {
        for name in ["so:3", "sl:3", "so:2,1", "sp:4", "gl+:3"] {
            let spec: GroupSpec = name.parse().unwrap();
            for seed in 0..50 {
                let g = sample_group(&spec, 1.0, seed).unwrap();
                assert!(
                    spec.max_residual(&g) <= SAMPLE_TOL,
                    "{name} seed {seed}: {:?}",
                    spec.residuals(&g)
                );
                assert!(g.determinant() > 0.0);
            }
        }
    }

    #[test]
    fn odd_dimension_excludes_minus_identity() {
        for name in ["so:3", "sl:3", "gl+:5", "so:2,1"] {
            let spec: GroupSpec = name.parse().unwrap();
            let minus = -RMat::identity(spec.n, spec.n);
            assert!(!spec.contains(&minus, 1e-9), "{name}");
        }
    }

    #[test]
    fn group_polar_examples() {
        let so3 = GroupSpec::so(3).unwrap();
        let g = sample_group(&so3, 1.0, 11).unwrap();
        let gp = group_polar(&so3, &g).unwrap();
        assert!((&gp.p_factor - RMat::identity(3, 3)).norm() < 1e-12);
        assert!((&gp.k_factor - &g).norm() < 1e-12);
        assert!(gp.closed());

        let sl2 = GroupSpec::sl(2).unwrap();
        let g = matrix::diag_real(&[2.0, 0.5]);
        let gp = group_polar(&sl2, &g).unwrap();
        assert!((&gp.p_factor - &g).norm() < 1e-14);
        assert!((&gp.k_factor - RMat::identity(2, 2)).norm() < 1e-14);
        assert!(gp.closed());
    }

    #[test]
    fn tube_sample_invariants() {
        let spec = GroupSpec::gl_plus(3).unwrap();
        for seed in 0..20 {
            let t = sample_tube(&spec, 0.02, 1.0, seed).unwrap();
            let id = CMat::identity(3, 3);
            assert!(matrix::opnorm(&(&t.p - id)) < 0.02);
            assert_eq!(t.h, matrix::complexify(&t.g) * &t.p);
        }
        assert!(sample_tube(&spec, 0.5, 1.0, 0).is_err());
    }

    #[test]
    fn siegel_action_examples() {
        let pt = SiegelPoint::generic(3, 1).unwrap();
        let same = siegel_act(&RMat::identity(3, 3), &pt).unwrap();
        assert!((same.z1 - &pt.z1).norm() < 1e-15);

        let id = SiegelPoint::new(CMat::identity(3, 3), CMat::identity(3, 3)).unwrap();
        let moved = siegel_act(&matrix::diag_real(&[2.0, 1.0, 1.0]), &id).unwrap();
        assert!(
            (moved.z1 - matrix::complexify(&matrix::diag_real(&[4.0, 1.0, 1.0]))).norm() < 1e-15
        );
    }

    #[test]
    fn siegel_rejects_bad_points() {
        let bad = matrix::complexify(&matrix::diag_real(&[1.0, -1.0]));
        assert!(SiegelPoint::new(bad, CMat::identity(2, 2)).is_err());
    }

    #[test]
    fn degenerate_point_has_full_kernel_for_so3() {
        let spec = GroupSpec::so(3).unwrap();
        let pt = SiegelPoint::new(CMat::identity(3, 3), CMat::identity(3, 3)).unwrap();
        let tr = tangent_map_rank(&spec, &pt).unwrap();
        assert_eq!(tr.kernel_dim, 3);
        assert!(matches!(
            totally_real_defect(&spec, &pt),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn generic_points_are_injective_and_totally_real() {
        for name in ["so:3", "sl:3", "so:2,1"] {
            let spec: GroupSpec = name.parse().unwrap();
            let (pt, _) = generic_point(&spec, 9).unwrap();
            assert_eq!(
                tangent_map_rank(&spec, &pt).unwrap().kernel_dim,
                0,
                "{name}"
            );
            assert_eq!(totally_real_defect(&spec, &pt).unwrap(), 0, "{name}");
        }
    }

    #[test]
    fn rank_threshold() {
        let m = RMat::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0 + 1e-12, 0.0, 0.0, 1.0]);
        assert_eq!(numerical_rank(&m, RANK_TOL), 2);
        assert_eq!(numerical_rank(&RMat::zeros(2, 2), RANK_TOL), 0);
    }
}
