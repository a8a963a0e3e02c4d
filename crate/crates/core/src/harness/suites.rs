use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{RunConfig, Suite};
use super::io::MatrixFile;
use super::report::{Report, Witness};
use crate::cones::{self, ConeParams};
use crate::covering::{self, CoverElement, IntMatrix};
use crate::error::{Error, Result};
use crate::liegroups::{self, GroupFamily, GroupSpec, SiegelPoint};
use crate::matrix::{self, CMat, RMat};
use crate::sqrtm::{self, StructureViolation};
use crate::{polar, rng};

/// Slack on the measured aperture in the complex-orthogonal norm bounds,
/// which are equalities at the exact aperture.
pub const APERTURE_SLACK: f64 = 1e-6;
/// Tolerance on `‖Re Q‖² − ‖Im Q‖² = 1`.
pub const NORM_IDENTITY_TOL: f64 = 1e-9;
/// Relative tolerance on `g₁·(g₂·z) = (g₁g₂)·z`.
pub const COMPOSITION_TOL: f64 = 1e-10;
/// Relative tolerance for orthogonal invariance of the matrix cone aperture.
pub const INVARIANCE_TOL: f64 = 1e-12;
/// Largest allowed ratio between Ĉ values across the aperture grid.
pub const C_HAT_SPREAD: f64 = 2.0;

const DIRECTIONS_PER_TRIAL: usize = 4;
const WITNESS_PROBES: usize = 8;
const ONCE: u64 = 1 << 32;

enum Entry {
    Pass(&'static str),
    Fail(&'static str, Value),
    Skip(&'static str),
    Max(&'static str, f64),
}

/// Assertions and measurements of one trial.
#[derive(Default)]
struct TrialLog {
    entries: Vec<Entry>,
}

impl TrialLog {
    fn assert(&mut self, name: &'static str, ok: bool, detail: impl FnOnce() -> Value) {
        self.entries.push(if ok {
            Entry::Pass(name)
        } else {
            Entry::Fail(name, detail())
        });
    }

    fn skip(&mut self, name: &'static str) {
        self.entries.push(Entry::Skip(name));
    }

    fn max(&mut self, name: &'static str, value: f64) {
        self.entries.push(Entry::Max(name, value));
    }
}

fn absorb(
    report: &mut Report,
    delta: Option<f64>,
    trial: usize,
    seed: u64,
    log: TrialLog,
    err: Option<Error>,
) {
    for entry in log.entries {
        match entry {
            Entry::Pass(name) => report.record_pass(name, delta),
            Entry::Skip(name) => report.record_skip(name, delta),
            Entry::Max(name, value) => report.record_max(name, delta, value),
            Entry::Fail(name, detail) => report.record_failure(Witness {
                check: name.into(),
                delta,
                trial,
                seed,
                detail,
            }),
        }
    }
    if let Some(e) = err {
        report.record_failure(Witness {
            check: "trial-error".into(),
            delta,
            trial,
            seed,
            detail: json!({ "error": e.to_string() }),
        });
    }
}

/// Run `f` on `trials` independent seeds derived from `base`, in parallel,
/// folding the results into `report` in trial order.
fn run_trials<F>(report: &mut Report, delta: Option<f64>, base: u64, trials: usize, f: F)
where
    F: Fn(u64, &mut TrialLog) -> Result<()> + Sync,
{
    let logs: Vec<(u64, TrialLog, Option<Error>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = rng::child_seed(base, i as u64);
            let mut log = TrialLog::default();
            let err = f(seed, &mut log).err();
            (seed, log, err)
        })
        .collect();
    for (i, (seed, log, err)) in logs.into_iter().enumerate() {
        absorb(report, delta, i, seed, log, err);
    }
    report.trials += trials;
}

fn run_once<F>(report: &mut Report, seed: u64, f: F)
where
    F: FnOnce(u64, &mut TrialLog) -> Result<()>,
{
    let mut log = TrialLog::default();
    let err = f(seed, &mut log).err();
    absorb(report, None, 0, seed, log, err);
}

fn parameters(config: &RunConfig) -> Value {
    json!({
        "suite": config.suite,
        "group": config.group,
        "deltas": config.deltas,
        "trials": config.trials,
        "seed": config.seed,
        "tol": config.tol,
        "radius": config.radius,
        "matrix_norm": config.matrix_norm,
    })
}

/// Execute the configured suite and, when `config.out` is set, write the report.
pub fn run_suite(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let started = Instant::now();
    let mut report = super::with_thread_pool(|| run_suite_inner(config))??;
    report.wall_time_s = started.elapsed().as_secs_f64();
    if let Some(path) = &config.out {
        std::fs::write(path, report.to_json()?)?;
    }
    Ok(report)
}

fn run_suite_inner(config: &RunConfig) -> Result<Report> {
    let mut report = Report::new(config.suite.name(), parameters(config));
    let suites: Vec<Suite> = match config.suite {
        Suite::All => Suite::ALL
            .into_iter()
            .filter(|&s| s != Suite::All)
            .collect(),
        s => vec![s],
    };
    for suite in suites {
        let base = rng::child_seed(config.seed, suite.stream());
        match suite {
            Suite::Cones => cones_suite(config, base, &mut report),
            Suite::Sqrt => sqrt_suite(config, base, &mut report),
            Suite::Polar => polar_suite(config, base, &mut report),
            Suite::Action => action_suite(config, base, &mut report),
            Suite::Cover => cover_suite(config, base, &mut report),
            Suite::All => unreachable!(),
        }
    }
    Ok(report)
}

fn per_delta(
    config: &RunConfig,
    base: u64,
    report: &mut Report,
    f: impl Fn(f64, u64, &mut TrialLog) -> Result<()> + Sync,
) {
    for (j, &delta) in config.deltas.iter().enumerate() {
        let delta_base = rng::child_seed(base, j as u64);
        run_trials(
            report,
            Some(delta),
            delta_base,
            config.trials,
            |seed, log| f(delta, seed, log),
        );
    }
}

fn cones_suite(config: &RunConfig, base: u64, report: &mut Report) {
    let spec = &config.group;
    let n = spec.n;
    per_delta(config, base, report, |delta, seed, log| {
        let sample = liegroups::sample_tube(spec, delta, config.radius, seed)?;
        let h = &sample.h;
        let mut rng = rng::substream(seed, 2);

        for _ in 0..DIRECTIONS_PER_TRIAL {
            let x = matrix::complexify(&RMat::from_column_slice(
                n,
                1,
                rng::unit_vector(&mut rng, n).as_slice(),
            ));
            let hx = (h.transpose() * &x).column(0).into_owned();
            let margin = cones::vector_cone_margin(&hx, 2.0 * delta)?;
            log.max(
                "htx-aperture/delta",
                cones::vector_cone_aperture(&hx)? / delta,
            );
            log.assert("almost-real-b", margin > 0.0, || {
                json!({ "h": MatrixFile::from_complex(h), "x": MatrixFile::from_complex(&x), "margin": margin })
            });
        }

        let b = h * h.transpose();
        let margin = cones::symmetric_cone_margin(&b, 3.0 * delta)?.min();
        log.max(
            "hht-aperture/delta",
            cones::symmetric_cone_aperture(&b)? / delta,
        );
        log.assert(
            "almost-real-d",
            margin > 0.0,
            || json!({ "h": MatrixFile::from_complex(h), "margin": margin }),
        );
        if margin > 0.0 {
            let params = ConeParams::new(3.0 * delta)?;
            let witness = cones::quadratic_form_witness(
                &b,
                &params,
                WITNESS_PROBES,
                rng::child_seed(seed, 3),
            )?;
            log.assert(
                "almost-real-a",
                witness.is_none(),
                || json!({ "h": MatrixFile::from_complex(h), "witness": witness }),
            );
        } else {
            log.skip("almost-real-a");
        }

        if n >= 2 {
            let r = matrix::complexify(&liegroups::sample_group(
                &GroupSpec::so(n)?,
                2.0,
                rng::child_seed(seed, 4),
            )?);
            let a0 = cones::matrix_cone_aperture(h, config.matrix_norm)?;
            let right = cones::matrix_cone_aperture(&(h * &r), config.matrix_norm)?;
            let left = cones::matrix_cone_aperture(&(&r * h), config.matrix_norm)?;
            let defect = (right - a0).abs().max((left - a0).abs()) / a0.max(f64::MIN_POSITIVE);
            log.assert("orthogonal-invariance", defect <= INVARIANCE_TOL, || {
                json!({ "h": MatrixFile::from_complex(h), "r": MatrixFile::from_complex(&r), "relative_defect": defect })
            });
        }
        Ok(())
    });
}

fn sqrt_suite(config: &RunConfig, base: u64, report: &mut Report) {
    let spec = &config.group;
    let n = spec.n;
    per_delta(config, base, report, |delta, seed, log| {
        let sample = liegroups::sample_tube(spec, delta, config.radius, seed)?;
        let b = &sample.h * sample.h.transpose();
        let detail = || json!({ "b": MatrixFile::from_complex(&b) });
        log.max(
            "b-aperture/delta",
            cones::symmetric_cone_aperture(&b)? / delta,
        );

        let spectrum = sqrtm::eigenvalues(&b)?;
        let worst = spectrum
            .eigenvalues
            .iter()
            .map(|l| {
                if l.re > 0.0 {
                    l.im.abs() / l.re
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0_f64, f64::max);
        log.max("eigen-aperture/delta", worst / delta);
        match sqrtm::eigenvalue_cone_epsilon(n, delta) {
            Some(eps) => log.assert(
                "eigenvalue-cone",
                worst < eps,
                || json!({ "b": MatrixFile::from_complex(&b), "epsilon": eps, "aperture": worst }),
            ),
            None => log.skip("eigenvalue-cone"),
        }

        let desc = sqrtm::describe_sqrt(&b, delta, sqrtm::DEFAULT_TOL)?;
        log.max("sqrt-residual", desc.residual);
        log.max("max-k/delta", desc.max_k / delta);
        log.assert(
            "sqrt-residual",
            desc.residual <= config.tol,
            || json!({ "b": MatrixFile::from_complex(&b), "residual": desc.residual }),
        );
        let min_re = desc.lambda.first().copied().unwrap_or(f64::INFINITY);
        log.assert(
            "re-s-positive",
            min_re > 0.0,
            || json!({ "b": MatrixFile::from_complex(&b), "min_eigenvalue": min_re }),
        );
        log.assert("sqrt-cone", desc.cone_margin > 0.0, || {
            json!({ "b": MatrixFile::from_complex(&b), "epsilon": desc.cone_epsilon, "margin": desc.cone_margin })
        });
        log.assert("k-bound", desc.max_k <= 2.0 * delta, || {
            json!({ "b": MatrixFile::from_complex(&b), "max_k": desc.max_k, "bound": 2.0 * delta })
        });
        let structural: Vec<&StructureViolation> = desc
            .violations
            .iter()
            .filter(|v| {
                matches!(
                    v,
                    StructureViolation::Reconstruction { .. }
                        | StructureViolation::NotSymmetric { .. }
                )
            })
            .collect();
        log.assert("sqrt-structure", structural.is_empty(), || {
            let mut d = detail();
            d["violations"] = json!(structural);
            d
        });
        Ok(())
    });
}

fn polar_suite(config: &RunConfig, base: u64, report: &mut Report) {
    let spec = &config.group;
    per_delta(config, base, report, |delta, seed, log| {
        let sample = liegroups::sample_tube(spec, delta, config.radius, seed)?;
        let h = &sample.h;
        let f = polar::complex_polar(h)?;
        log.assert("polar-residuals", f.within_tolerance(config.tol), || {
            json!({
                "h": MatrixFile::from_complex(h),
                "reconstruction": f.residual_sq,
                "orthogonality": f.residual_orth,
                "asymmetry": f.asymmetry,
            })
        });

        let proj = polar::nearest_special_orthogonal(&f.q, config.matrix_norm)?;
        log.max("orth-dist/delta", proj.dist / delta);
        log.max("q-aperture/delta", proj.aperture() / delta);
        let defect = proj.norm_identity_defect();
        log.assert(
            "norm-identity",
            defect.abs() <= NORM_IDENTITY_TOL,
            || json!({ "h": MatrixFile::from_complex(h), "defect": defect }),
        );

        let d = proj.aperture() * (1.0 + APERTURE_SLACK);
        let bound = if d < 1.0 {
            1.0 / (1.0 - d * d).sqrt()
        } else {
            f64::NAN
        };
        let holds = d < 1.0 && proj.real_norm < bound && proj.imag_norm < d * bound;
        log.assert("orth-lemma-bounds", holds, || {
            json!({
                "h": MatrixFile::from_complex(h),
                "aperture": d,
                "real_norm": proj.real_norm,
                "imag_norm": proj.imag_norm,
            })
        });

        let real = polar::complex_polar(&matrix::complexify(&sample.g))?;
        let rp = polar::real_polar(&sample.g)?;
        let q_err = matrix::opnorm(&(&real.q - matrix::complexify(&rp.u)));
        let s_err = matrix::opnorm(&(&real.s - matrix::complexify(&rp.p))) / rp.p.norm();
        log.assert(
            "real-functoriality",
            q_err.max(s_err) <= config.tol,
            || json!({ "g": MatrixFile::from_real(&sample.g), "q_error": q_err, "s_error": s_err }),
        );
        Ok(())
    });

    let c_hats: Vec<f64> = config
        .deltas
        .iter()
        .filter_map(|&d| report.constant("orth-dist/delta", Some(d)))
        .collect();
    if c_hats.len() >= 2 {
        let hi = c_hats.iter().copied().fold(f64::MIN, f64::max);
        let lo = c_hats.iter().copied().fold(f64::MAX, f64::min);
        let spread = hi / lo;
        report.record_max("c-hat-spread", None, spread);
        let mut log = TrialLog::default();
        log.assert(
            "c-hat-stability",
            spread < C_HAT_SPREAD,
            || json!({ "c_hat": c_hats, "spread": spread }),
        );
        absorb(report, None, 0, config.seed, log, None);
    }
}

fn relative_gap(a: &CMat, b: &CMat) -> f64 {
    matrix::opnorm(&(a - b)) / matrix::opnorm(b).max(1.0)
}

fn action_suite(config: &RunConfig, base: u64, report: &mut Report) {
    let spec = &config.group;
    let n = spec.n;
    run_trials(report, None, base, config.trials, |seed, log| {
        let g = liegroups::sample_group(spec, config.radius, rng::child_seed(seed, 0))?;
        let detail = || json!({ "g": MatrixFile::from_real(&g) });
        let residual = spec.max_residual(&g);
        log.assert("sample-residual", residual <= liegroups::SAMPLE_TOL, detail);
        let residual_t = spec.max_residual(&g.transpose());
        log.assert("self-adjoint", residual_t <= liegroups::FACTOR_TOL, detail);
        let gp = liegroups::group_polar(spec, &g)?;
        log.assert("group-polar", gp.closed(), || {
            json!({ "g": MatrixFile::from_real(&g), "p_residual": gp.p_residual, "k_residual": gp.k_residual })
        });

        let g2 = liegroups::sample_group(spec, config.radius, rng::child_seed(seed, 1))?;
        let pt = SiegelPoint::generic(n, rng::child_seed(seed, 2))?;
        let nested = liegroups::siegel_act(&g, &liegroups::siegel_act(&g2, &pt)?)?;
        let direct = liegroups::siegel_act(&(&g * &g2), &pt)?;
        let gap = relative_gap(&nested.z1, &direct.z1).max(relative_gap(&nested.z2, &direct.z2));
        log.max("composition-gap", gap);
        log.assert("action-composition", gap <= COMPOSITION_TOL, || {
            json!({ "g1": MatrixFile::from_real(&g), "g2": MatrixFile::from_real(&g2), "gap": gap })
        });
        Ok(())
    });

    run_once(report, rng::child_seed(base, ONCE), |seed, log| {
        let (pt, draws) = liegroups::generic_point(spec, seed)?;
        log.max("generic-point-draws", draws as f64);
        log.assert(
            "generic-kernel",
            draws <= liegroups::MAX_RESAMPLES + 1,
            || json!({ "draws": draws }),
        );
        let defect = liegroups::totally_real_defect(spec, &pt)?;
        log.assert("totally-real", defect == 0, || {
            json!({ "z1": MatrixFile::from_complex(&pt.z1), "z2": MatrixFile::from_complex(&pt.z2), "defect": defect })
        });

        if spec.family == GroupFamily::So {
            let id = CMat::identity(n, n);
            let rank = liegroups::tangent_map_rank(spec, &SiegelPoint::new(id.clone(), id)?)?;
            log.assert(
                "degenerate-kernel",
                rank.kernel_dim == spec.dim(),
                || json!({ "kernel_dim": rank.kernel_dim, "expected": spec.dim() }),
            );
        }
        if n % 2 == 1 {
            let minus = -RMat::identity(n, n);
            log.assert(
                "odd-minus-identity",
                !spec.contains(&minus, liegroups::SAMPLE_TOL),
                || json!({}),
            );
        }
        Ok(())
    });
}

fn random_cover_element(radius: f64, seed: u64) -> Result<CoverElement> {
    let sl2 = GroupSpec::sl(2)?;
    let g = liegroups::sample_group(&sl2, radius, rng::child_seed(seed, 0))?;
    let k = rng::substream(seed, 1).random_range(-2..=2);
    Ok(CoverElement::canonical(g)?.deck_shift(k))
}

/// Winding of a conjugated rotation loop, refining until the sampling resolves it.
fn conjugated_winding(a: &RMat, k: i64, samples: usize) -> Result<(i64, usize)> {
    let mut samples = samples;
    loop {
        match covering::winding_number(&covering::conjugated_rotation_loop(a, k, samples)?, false) {
            Err(Error::Resolution { .. }) if samples < 1 << 16 => samples = 2 * samples - 1,
            other => return other.map(|w| (w, samples)),
        }
    }
}

fn cover_gap(a: &CoverElement, b: &CoverElement) -> f64 {
    (&a.g - &b.g).norm().max((a.x - b.x).abs())
}

fn random_int_matrix(seed: u64) -> IntMatrix {
    let mut rng = rng::substream(seed, 0);
    let rows = rng.random_range(1..=5);
    let cols = rng.random_range(1..=5);
    IntMatrix::from_fn(rows, cols, |_, _| rng.random_range(-9..=9))
}

/// Exact Smith form invariants: `UMV = D`, unimodularity, divisibility.
pub fn snf_defects(m: &IntMatrix) -> Result<Vec<&'static str>> {
    let snf = covering::smith_normal_form(m)?;
    let wide = |x: &IntMatrix| x.map(i128::from);
    let mut defects = Vec::new();
    if wide(&snf.u) * wide(m) * wide(&snf.v) != wide(&snf.d) {
        defects.push("product");
    }
    if covering::integer_determinant(&snf.u)?.abs() != 1
        || covering::integer_determinant(&snf.v)?.abs() != 1
    {
        defects.push("unimodular");
    }
    let (rows, cols) = snf.d.shape();
    if (0..rows).any(|r| (0..cols).any(|c| r != c && snf.d[(r, c)] != 0)) {
        defects.push("diagonal");
    }
    let inv = snf.invariants();
    let chain = inv.iter().all(|&d| d >= 0)
        && inv.windows(2).all(|w| {
            if w[0] == 0 {
                w[1] == 0
            } else {
                w[1] % w[0] == 0
            }
        });
    if !chain {
        defects.push("divisibility");
    }
    Ok(defects)
}

fn cover_suite(config: &RunConfig, base: u64, report: &mut Report) {
    let radius = config.radius;
    run_once(report, rng::child_seed(base, ONCE), |_, log| {
        for k in -2..=2_i64 {
            for level in 0..=3 {
                let samples = (64 << level) * (k.unsigned_abs() as usize).max(1) + 1;
                let w = covering::winding_number(&covering::rotation_loop(k, samples), false)?;
                log.assert(
                    "rotation-winding",
                    w == k,
                    || json!({ "k": k, "samples": samples, "winding": w }),
                );
            }
        }
        let r = CoverElement::new(matrix::rotation2(PI), PI)?;
        let sq = covering::cover_multiply(&r, &r)?;
        let gap = cover_gap(&sq, &CoverElement::identity().deck_shift(1));
        log.assert(
            "half-turn-square",
            gap <= covering::COVER_TOL,
            || json!({ "x": sq.x, "gap": gap }),
        );
        Ok(())
    });

    run_trials(report, None, base, config.trials, |seed, log| {
        let mut rng = rng::substream(seed, 9);
        let a_mat = liegroups::sample_group(&GroupSpec::sl(2)?, radius, rng::child_seed(seed, 0))?;
        let k: i64 = rng.random_range(-2..=2);
        let (w1, samples) =
            conjugated_winding(&a_mat, k, 256 * (k.unsigned_abs() as usize + 1) + 1)?;
        let w10 = covering::winding_number(
            &covering::conjugated_rotation_loop(&a_mat, k, 10 * (samples - 1) + 1)?,
            false,
        )?;
        log.assert(
            "conjugated-winding",
            w1 == k && w10 == k,
            || json!({ "a": MatrixFile::from_real(&a_mat), "k": k, "winding": w1, "refined": w10 }),
        );

        let a = random_cover_element(radius, rng::child_seed(seed, 1))?;
        let b = random_cover_element(radius, rng::child_seed(seed, 2))?;
        let c = random_cover_element(radius, rng::child_seed(seed, 3))?;
        let ab = covering::cover_multiply(&a, &b)?;
        let left = covering::cover_multiply(&ab, &c)?;
        let right = covering::cover_multiply(&a, &covering::cover_multiply(&b, &c)?)?;
        let gap = (left.x - right.x).abs();
        log.max("associativity-gap", gap);
        log.assert(
            "associativity",
            gap <= covering::COVER_TOL,
            || json!({ "a": a, "b": b, "c": c, "gap": gap }),
        );
        log.assert(
            "product-compatibility",
            CoverElement::new(ab.g.clone(), ab.x).is_ok(),
            || json!({ "a": a, "b": b }),
        );

        let shift_b = covering::cover_multiply(&a, &b.deck_shift(1))?;
        let shift_a = covering::cover_multiply(&a.deck_shift(1), &b)?;
        let gap = (shift_b.x - ab.x - TAU)
            .abs()
            .max((shift_a.x - ab.x - TAU).abs());
        log.assert(
            "deck-centrality",
            gap <= covering::COVER_TOL,
            || json!({ "a": a, "b": b, "gap": gap }),
        );

        let (j, l): (i64, i64) = (rng.random_range(-3..=3), rng.random_range(-3..=3));
        let e = CoverElement::identity();
        let prod = covering::cover_multiply(&e.deck_shift(j), &e.deck_shift(l))?;
        let gap = cover_gap(&prod, &e.deck_shift(j + l));
        log.assert(
            "kernel-closure",
            gap <= covering::COVER_TOL,
            || json!({ "j": j, "l": l, "gap": gap }),
        );

        let theta: f64 = rng.random_range(-PI..PI);
        let sheet: i64 = rng.random_range(-3..=3);
        let x = theta + TAU * sheet as f64;
        let z = covering::chi(theta);
        let angles: Vec<Vec<f64>> = (0..=64).map(|s| vec![theta * s as f64 / 64.0]).collect();
        let lift =
            covering::lift_path(&covering::CirclePath::from_angles(&angles, false)?, &[0.0])?;
        let realized = lift.last().expect("non-empty")[0] + TAU * sheet as f64;
        let ok = covering::pullback_member(&[z], &[x], covering::COVER_TOL)
            && (realized - x).abs() <= covering::COVER_TOL;
        log.assert(
            "fiber-product",
            ok,
            || json!({ "theta": theta, "sheet": sheet, "realized": realized }),
        );

        let m = random_int_matrix(rng::child_seed(seed, 4));
        let defects = snf_defects(&m)?;
        log.assert(
            "snf",
            defects.is_empty(),
            || json!({ "m": MatrixFile::from_integer(&m), "defects": defects }),
        );
        Ok(())
    });
}
