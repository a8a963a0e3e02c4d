//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use holo_core::covering::{self, IntMatrix};
use holo_core::harness::{self, Claim, Report, RunConfig, Suite, WitnessOrigin};
use holo_core::liegroups::{self, GroupSpec, SiegelPoint};
use holo_core::matrix::{self, CMat};
use holo_core::rng;
use nalgebra::DMatrix;
use rand::Rng;

const SEED: u64 = 20_240_917;
const DIMS: [usize; 3] = [3, 5, 7];
const DELTAS: [f64; 3] = [0.01, 0.02, 0.05];
const SAMPLES: usize = 500;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn failures(reports: &[Report], checks: &[&str]) -> usize {
    reports
        .iter()
        .flat_map(|r| r.checks.iter())
        .filter(|c| checks.contains(&c.name.as_str()))
        .map(|c| c.failures)
        .sum()
}

fn checked(reports: &[Report], checks: &[&str]) -> usize {
    reports
        .iter()
        .flat_map(|r| r.checks.iter())
        .filter(|c| checks.contains(&c.name.as_str()))
        .map(|c| c.trials)
        .sum()
}

fn run(suite: Suite, group: GroupSpec, deltas: &[f64], trials: usize) -> Report {
    let config = RunConfig::new(suite, group, deltas.to_vec(), trials, SEED);
    harness::run_suite(&config).expect("valid configuration")
}

/// Independent residual and positivity recomputation on a subset of samples.
fn spot_check_sqrt(n: usize, delta: f64, count: usize) -> Result<(), String> {
    let spec = GroupSpec::gl_plus(n).unwrap();
    for i in 0..count as u64 {
        let h = liegroups::sample_tube(&spec, delta, 1.0, rng::child_seed(SEED ^ 0x5eed, i))
            .unwrap()
            .h;
        let b = &h * h.transpose();
        let s = holo_core::sqrtm::principal_sqrt(&b, 1e-12)
            .map_err(|e| e.to_string())?
            .s;
        let svd_norm = |m: &CMat| m.clone().svd(false, false).singular_values.max();
        let residual = svd_norm(&(&s * &s - &b)) / svd_norm(&b);
        let re = matrix::re(&s);
        let min_eig = ((&re + re.transpose()) * 0.5)
            .symmetric_eigen()
            .eigenvalues
            .min();
        if residual > 1e-10 || min_eig <= 0.0 {
            return Err(format!(
                "n={n} δ={delta} sample {i}: residual {residual:.2e}, min eig {min_eig:.2e}"
            ));
        }
    }
    Ok(())
}

fn criteria_1_to_3() -> (Outcome, Outcome, Outcome) {
    let started = Instant::now();
    let reports: Vec<Report> = DIMS
        .iter()
        .map(|&n| {
            run(
                Suite::Sqrt,
                GroupSpec::gl_plus(n).unwrap(),
                &DELTAS,
                SAMPLES,
            )
        })
        .collect();
    let elapsed = started.elapsed();

    let eig_fail = failures(&reports, &["eigenvalue-cone", "trial-error"]);
    let eig_n = checked(&reports, &["eigenvalue-cone"]);
    let skipped: usize = reports
        .iter()
        .flat_map(|r| &r.checks)
        .filter(|c| c.name == "eigenvalue-cone")
        .map(|c| c.skipped)
        .sum();
    let worst_eig = reports
        .iter()
        .flat_map(|r| &r.constants)
        .filter(|c| c.name == "eigen-aperture/delta")
        .map(|c| c.value)
        .fold(0.0, f64::max);
    let c1 = Outcome::new(
        eig_fail == 0 && eig_n == DIMS.len() * DELTAS.len() * SAMPLES && elapsed < Duration::from_secs(60),
        format!(
            "{eig_n} samples, {eig_fail} failures, {skipped} skipped, max eigen aperture {worst_eig:.3}·δ, {:.1}s (limit 60s)",
            elapsed.as_secs_f64()
        ),
    );

    let spot = DIMS
        .iter()
        .flat_map(|&n| DELTAS.iter().map(move |&d| (n, d)))
        .try_for_each(|(n, d)| spot_check_sqrt(n, d, 20));
    let res_fail = failures(&reports, &["sqrt-residual", "re-s-positive", "trial-error"]);
    let worst_res = reports
        .iter()
        .flat_map(|r| &r.constants)
        .filter(|c| c.name == "sqrt-residual")
        .map(|c| c.value)
        .fold(0.0, f64::max);
    let c2 = Outcome::new(
        res_fail == 0 && spot.is_ok(),
        format!(
            "{} checks, {res_fail} failures, max ‖S²−B‖/‖B‖ {worst_res:.2e}, independent spot check {}",
            checked(&reports, &["sqrt-residual", "re-s-positive"]),
            spot.err().unwrap_or_else(|| "ok".into())
        ),
    );

    let cone_fail = failures(
        &reports,
        &["sqrt-cone", "k-bound", "sqrt-structure", "trial-error"],
    );
    let worst_k = reports
        .iter()
        .flat_map(|r| &r.constants)
        .filter(|c| c.name == "max-k/delta")
        .map(|c| c.value)
        .fold(0.0, f64::max);
    let c3 = Outcome::new(
        cone_fail == 0,
        format!(
            "{} checks, {cone_fail} failures, max |K_ij| {worst_k:.3}·δ (bound 2δ)",
            checked(&reports, &["sqrt-cone", "k-bound"])
        ),
    );
    (c1, c2, c3)
}

fn criterion_4() -> Outcome {
    let mut lines = Vec::new();
    let mut fail = 0;
    for &n in &DIMS {
        let r = run(
            Suite::Polar,
            GroupSpec::gl_plus(n).unwrap(),
            &DELTAS,
            SAMPLES,
        );
        fail += failures(
            std::slice::from_ref(&r),
            &[
                "norm-identity",
                "orth-lemma-bounds",
                "polar-residuals",
                "c-hat-stability",
                "trial-error",
            ],
        );
        if r.check("c-hat-stability", None).is_none() {
            fail += 1;
        }
        let c_hat: Vec<String> = DELTAS
            .iter()
            .map(|&d| {
                format!(
                    "{:.3}",
                    r.constant("orth-dist/delta", Some(d)).unwrap_or(f64::NAN)
                )
            })
            .collect();
        lines.push(format!(
            "n={n} Ĉ=[{}] spread {:.3}",
            c_hat.join(", "),
            r.constant("c-hat-spread", None).unwrap_or(f64::NAN)
        ));
    }
    Outcome::new(fail == 0, format!("{fail} failures; {}", lines.join("; ")))
}

fn action_reports() -> Vec<(String, Report)> {
    ["sl:3", "so:3", "so:2,1", "sp:4"]
        .iter()
        .map(|g| {
            (
                g.to_string(),
                run(Suite::Action, g.parse().unwrap(), &[0.05], 200),
            )
        })
        .collect()
}

fn criterion_5(reports: &[(String, Report)]) -> Outcome {
    let mut fail = 0;
    let mut count = 0;
    for (_, r) in reports {
        let c = r.check("group-polar", None).expect("group-polar check ran");
        fail += c.failures + r.check("trial-error", None).map_or(0, |c| c.failures);
        count += c.trials;
    }
    Outcome::new(
        fail == 0 && count == 800,
        format!("{count} factorizations over 4 groups, {fail} failures"),
    )
}

fn criterion_6(reports: &[(String, Report)]) -> Outcome {
    let mut fail = 0;
    let mut notes = Vec::new();
    for (name, r) in reports.iter().filter(|(g, _)| g != "sp:4") {
        let checks = [
            "generic-kernel",
            "totally-real",
            "action-composition",
            "trial-error",
        ];
        fail += failures(std::slice::from_ref(r), &checks);
        for required in ["generic-kernel", "totally-real"] {
            if r.check(required, None).is_none_or(|c| c.trials != 1) {
                fail += 1;
            }
        }
        let composition = r.check("action-composition", None).map_or(0, |c| c.trials);
        if composition != 200 {
            fail += 1;
        }
        notes.push(format!(
            "{name}: draws {}, composition gap {:.1e}",
            r.constant("generic-point-draws", None).unwrap_or(f64::NAN),
            r.constant("composition-gap", None).unwrap_or(f64::NAN)
        ));
    }
    let so3 = GroupSpec::so(3).unwrap();
    let id = CMat::identity(3, 3);
    let degenerate =
        liegroups::tangent_map_rank(&so3, &SiegelPoint::new(id.clone(), id).unwrap()).unwrap();
    if degenerate.kernel_dim != 3 {
        fail += 1;
    }
    notes.push(format!("so:3 at (I, I) kernel {}", degenerate.kernel_dim));
    Outcome::new(fail == 0, format!("{fail} failures; {}", notes.join("; ")))
}

fn criterion_7() -> Outcome {
    let started = Instant::now();
    let r = run(Suite::Cover, GroupSpec::sl(2).unwrap(), &[0.05], 100);
    let elapsed = started.elapsed();
    let names = [
        "rotation-winding",
        "conjugated-winding",
        "associativity",
        "deck-centrality",
        "half-turn-square",
        "trial-error",
    ];
    let fail = failures(std::slice::from_ref(&r), &names);
    let assoc = r.check("associativity", None).map_or(0, |c| c.trials);
    let windings = r.check("rotation-winding", None).map_or(0, |c| c.trials);
    Outcome::new(
        fail == 0 && assoc == 100 && windings == 20 && elapsed < Duration::from_secs(30),
        format!(
            "{fail} failures, {assoc} triples, max associativity gap {:.1e}, {:.1}s (limit 30s)",
            r.constant("associativity-gap", None).unwrap_or(f64::NAN),
            elapsed.as_secs_f64()
        ),
    )
}

fn laplace_det(m: &DMatrix<i128>) -> i128 {
    let n = m.nrows();
    if n == 0 {
        return 1;
    }
    (0..n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * m[(0, j)] * laplace_det(&m.clone().remove_row(0).remove_column(j))
        })
        .sum()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (0..n)
        .flat_map(|last| {
            subsets(last, k - 1).into_iter().map(move |mut s| {
                s.push(last);
                s
            })
        })
        .collect()
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Invariant factors from gcds of minors: `dᵢ = gᵢ / gᵢ₋₁`.
fn minors_oracle(m: &IntMatrix) -> Vec<i64> {
    let wide = m.map(i128::from);
    let (rows, cols) = m.shape();
    let mut prev = 1_i128;
    let mut out = Vec::new();
    for k in 1..=rows.min(cols) {
        let mut g = 0;
        for r in subsets(rows, k) {
            for c in subsets(cols, k) {
                let minor = DMatrix::from_fn(k, k, |i, j| wide[(r[i], c[j])]);
                g = gcd(g, laplace_det(&minor));
            }
        }
        out.push(if g == 0 { 0 } else { (g / prev) as i64 });
        if g != 0 {
            prev = g;
        }
    }
    out
}

fn criterion_8() -> Outcome {
    let mut rng = rng::substream(SEED, 8);
    let mut fail = Vec::new();
    for trial in 0..200 {
        let rows = rng.random_range(1..=5);
        let cols = rng.random_range(1..=5);
        let m = IntMatrix::from_fn(rows, cols, |_, _| rng.random_range(-9..=9));
        let snf = covering::smith_normal_form(&m).expect("no overflow at this scale");
        let w = |x: &IntMatrix| x.map(i128::from);
        let exact = w(&snf.u) * w(&m) * w(&snf.v) == w(&snf.d);
        let unimodular = laplace_det(&w(&snf.u)).abs() == 1 && laplace_det(&w(&snf.v)).abs() == 1;
        let inv = snf.invariants();
        let chain = inv.windows(2).all(|p| {
            if p[0] == 0 {
                p[1] == 0
            } else {
                p[1] % p[0] == 0
            }
        });
        let oracle = minors_oracle(&m) == inv;
        if !(exact && unimodular && chain && oracle) {
            fail.push(trial);
        }
    }
    Outcome::new(
        fail.is_empty(),
        format!("200 matrices, failures at {fail:?}"),
    )
}

fn criterion_9() -> Outcome {
    let grid = [0.02, 0.05, 0.1, 0.3];
    let mut fail = 0;
    let mut notes = Vec::new();
    for claim in Claim::ALL {
        let r = harness::find_counterexample(claim, &grid, 100_000, SEED).expect("valid search");
        match &r.counterexample {
            Some(cx) if harness::replay(cx).unwrap_or(false) => {
                notes.push(format!(
                    "{claim} at δ={} after {} candidates",
                    cx.delta, r.trials
                ));
            }
            _ => {
                fail += 1;
                notes.push(format!("{claim} not found"));
            }
        }
    }
    for claim in Claim::ALL {
        match harness::random_search(claim, 0.1, 100_000, SEED).expect("valid search") {
            Some((cx, used)) if harness::replay(&cx).unwrap_or(false) => {
                notes.push(format!("{claim} by random search alone after {used}"));
            }
            _ => {
                fail += 1;
                notes.push(format!("{claim} not found by random search"));
            }
        }
    }
    let b2 =
        harness::find_counterexample(Claim::B2NotPsd, &[0.1], 100_000, SEED).expect("valid search");
    let family_ok = b2.counterexample.as_ref().is_some_and(|cx| {
        let b = cx.matrices["B"].to_complex().unwrap();
        cx.origin == WitnessOrigin::Family
            && (b[(1, 1)].re - 150.0).abs() < 1e-9
            && cx.conclusion_margin < 0.0
            && harness::replay(cx).unwrap()
    });
    if !family_ok {
        fail += 1;
    }
    notes.push(format!(
        "B2 family at δ=0.1: {}",
        if family_ok { "ok" } else { "missing" }
    ));
    Outcome::new(fail == 0, notes.join("; "))
}

fn main() {
    let (c1, c2, c3) = criteria_1_to_3();
    let actions = action_reports();
    let outcomes = [
        ("1 eigenvalue cone", c1),
        ("2 square-root residual and positivity", c2),
        ("3 square-root cone", c3),
        ("4 orthogonal-part proximity", criterion_4()),
        ("5 group polar closure", criterion_5(&actions)),
        ("6 action geometry", criterion_6(&actions)),
        ("7 covering suite", criterion_7()),
        ("8 Smith normal form", criterion_8()),
        ("9 counterexample existence", criterion_9()),
    ];
    let mut all = true;
    for (name, o) in &outcomes {
        println!(
            "criterion {name}: {} ({})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        all &= o.pass;
    }
    if !all {
        std::process::exit(1);
    }
}
