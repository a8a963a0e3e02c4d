use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use holo_core::covering::{self, CoverElement};
use holo_core::harness::{self, Claim, DecomposeMode, MatrixFile, Report, RunConfig, Suite};
use holo_core::liegroups::{self, GroupSpec};
use holo_core::matrix::{self, MatrixNorm};
use holo_core::{rng, Error};
use serde_json::json;

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "holo",
    version,
    about = "Verify cone, square-root, polar and covering constructions for linear Lie groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and report every assertion.
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        /// Group as gl+:n, sl:n, so:n, so:p,q or sp:2m.
        #[arg(long, default_value = "sl:3", value_parser = parse_group)]
        group: GroupSpec,
        /// Tube apertures; repeat the flag or separate with commas.
        #[arg(long = "delta", value_delimiter = ',', default_values_t = [0.01, 0.02, 0.05])]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Residual tolerance for square roots and polar factors.
        #[arg(long, default_value_t = RunConfig::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = RunConfig::DEFAULT_RADIUS)]
        radius: f64,
        #[arg(long, value_enum, default_value_t = NormArg::Operator)]
        norm: NormArg,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a witness that a plausible inclusion fails.
    Counterexample {
        #[arg(long, value_parser = parse_claim)]
        claim: Claim,
        #[arg(long = "delta", value_delimiter = ',', default_values_t = [0.02, 0.05, 0.1, 0.3])]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Factor a matrix file, writing one file per factor and a residual file.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: DecomposeMode,
        /// Directory for the outputs; defaults to the input's directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Smith normal form of an integer matrix file.
    Snf {
        #[arg(long)]
        input: PathBuf,
    },
    /// Demonstrate the universal cover of SL(2, R).
    Cover {
        #[arg(long, value_enum)]
        demo: Demo,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Operator,
    Frobenius,
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    Winding,
    Multiply,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_group(s: &str) -> Result<GroupSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_claim(s: &str) -> Result<Claim, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<DecomposeMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Usage errors exit with 2, numerical failures with 1.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::DimensionMismatch(_)
        | Error::NonFinite => EXIT_USAGE,
        _ => EXIT_FAILED,
    }
}

fn emit(report: &Report, out: Option<&Path>) -> Result<(), Error> {
    for c in &report.checks {
        let delta = c.delta.map_or_else(|| "-".to_string(), |d| d.to_string());
        eprintln!(
            "{:<24} delta={:<6} trials={:<6} failures={} skipped={}",
            c.name, delta, c.trials, c.failures, c.skipped
        );
    }
    eprintln!("{}: {} failures", report.claim, report.failures);
    match out {
        Some(path) => std::fs::write(path, report.to_json()?)?,
        None => print!("{}", report.to_json()?),
    }
    Ok(())
}

fn print_json(value: &serde_json::Value) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Verify {
            suite,
            group,
            deltas,
            trials,
            seed,
            tol,
            radius,
            norm,
            out,
        } => {
            let mut config = RunConfig::new(suite, group, deltas, trials, seed);
            config.tol = tol;
            config.radius = radius;
            config.matrix_norm = match norm {
                NormArg::Operator => MatrixNorm::Operator2,
                NormArg::Frobenius => MatrixNorm::Frobenius,
            };
            let report = harness::run_suite(&config)?;
            emit(&report, out.as_deref())?;
            Ok(report.exit_code() as u8)
        }
        Command::Counterexample {
            claim,
            deltas,
            budget,
            seed,
            out,
        } => {
            let report = harness::find_counterexample(claim, &deltas, budget, seed)?;
            emit(&report, out.as_deref())?;
            Ok(report.exit_code() as u8)
        }
        Command::Decompose {
            input,
            mode,
            out_dir,
        } => {
            let file = MatrixFile::read(&input)?;
            let d = harness::decompose(&file, mode)?;
            let dir = out_dir
                .unwrap_or_else(|| input.parent().map(Path::to_path_buf).unwrap_or_default());
            let stem = input
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("matrix");
            let mut written = Vec::new();
            for (name, factor) in &d.factors {
                let path = dir.join(format!("{stem}.{mode}.{name}.json"));
                factor.write(&path)?;
                written.push(path.display().to_string());
            }
            let residual_path = dir.join(format!("{stem}.{mode}.residuals.json"));
            std::fs::write(
                &residual_path,
                serde_json::to_string_pretty(&d.residuals)? + "\n",
            )?;
            print_json(&json!({ "mode": mode, "residuals": d.residuals, "factors": written }))?;
            Ok(0)
        }
        Command::Snf { input } => {
            let m = MatrixFile::read(&input)?.to_integer()?;
            let snf = covering::smith_normal_form(&m)?;
            let split = covering::split_abelian(&m)?;
            print_json(&json!({
                "U": MatrixFile::from_integer(&snf.u),
                "V": MatrixFile::from_integer(&snf.v),
                "D": MatrixFile::from_integer(&snf.d),
                "invariants": snf.invariants(),
                "torsion": split.torsion,
                "free_rank": split.free_rank,
            }))?;
            Ok(0)
        }
        Command::Cover { demo, seed } => {
            let sl2 = GroupSpec::sl(2)?;
            match demo {
                Demo::Winding => {
                    let a = liegroups::sample_group(&sl2, 1.0, seed)?;
                    let mut rows = Vec::new();
                    for k in -2..=2_i64 {
                        let samples = 256 * (k.unsigned_abs() as usize + 1) + 1;
                        let rotation =
                            covering::winding_number(&covering::rotation_loop(k, samples), false)?;
                        let conjugated = covering::winding_number(
                            &covering::conjugated_rotation_loop(&a, k, samples)?,
                            false,
                        )?;
                        rows.push(
                            json!({ "k": k, "rotation": rotation, "conjugated": conjugated }),
                        );
                    }
                    let x = matrix::diag_real(&[1.0, -1.0]);
                    let contractible =
                        covering::winding_number(&covering::contractible_loop(&x, 64), false)?;
                    print_json(
                        &json!({ "conjugator": MatrixFile::from_real(&a), "loops": rows, "contractible": contractible }),
                    )?;
                }
                Demo::Multiply => {
                    let a = CoverElement::canonical(liegroups::sample_group(
                        &sl2,
                        1.0,
                        rng::child_seed(seed, 0),
                    )?)?;
                    let b = CoverElement::canonical(liegroups::sample_group(
                        &sl2,
                        1.0,
                        rng::child_seed(seed, 1),
                    )?)?
                    .deck_shift(1);
                    let ab = covering::cover_multiply(&a, &b)?;
                    let half = CoverElement::new(
                        matrix::rotation2(std::f64::consts::PI),
                        std::f64::consts::PI,
                    )?;
                    let square = covering::cover_multiply(&half, &half)?;
                    print_json(
                        &json!({ "a": a, "b": b, "product": ab, "sheet": ab.sheet()?, "half_turn_squared": square }),
                    )?;
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
