use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gqe_core::curvature::{Geometry, MetricJet};
use gqe_core::verify::{self, RunConfig, Suite, VerificationReport};
use gqe_core::zoo;

#[derive(Parser)]
#[command(name = "gqe", version, about = "Curvature engine and verifier for generalized quasi-Einstein metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites; exits 1 if any unexpected check fails.
    Verify {
        /// JSON run configuration. Other flags are ignored when given.
        #[arg(long, conflicts_with = "instance")]
        config: Option<PathBuf>,
        /// Zoo key such as `sphere:4` or `remark:2,4`.
        #[arg(long, required_unless_present = "config")]
        instance: Option<String>,
        /// curvature-identities, conformal-laws, gqe, splitting or all. Repeatable.
        #[arg(long = "suite", default_value = "all")]
        suites: Vec<String>,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report path; the report goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the zoo keys.
    ListInstances,
    /// Print every curvature tensor at one point as JSON.
    Curvature {
        #[arg(long)]
        instance: String,
        /// Comma separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::ListInstances => {
            for (key, about) in zoo::catalogue() {
                println!("{key:<28} {about}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Curvature { instance, point } => {
            let inst = zoo::lookup(&instance)?;
            let p = parse_point(&point)?;
            if p.len() != inst.dim() {
                return Err(format!("point has {} coordinates, {instance} has dimension {}", p.len(), inst.dim()).into());
            }
            let geom = Geometry::new(MetricJet::new(&inst.metric, &p)?);
            println!("{}", serde_json::to_string_pretty(&geom.pack())?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            config,
            instance,
            suites,
            samples,
            seed,
            out,
        } => {
            let (cfg, out) = match config {
                Some(path) => {
                    let cfg = RunConfig::from_json(&std::fs::read_to_string(&path)?)?;
                    let out = cfg.output.as_ref().map(PathBuf::from);
                    (cfg, out)
                }
                None => {
                    let suites = suites
                        .iter()
                        .map(|s| Suite::parse(s).ok_or_else(|| format!("unknown suite `{s}`")))
                        .collect::<Result<Vec<_>, _>>()?;
                    let key = instance.expect("clap enforces --instance");
                    (RunConfig::for_instance(&key, suites, samples, seed), out)
                }
            };
            let report = verify::run(&cfg)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, report.to_json() + "\n")?;
                    summarize(&report);
                }
                None => println!("{}", report.to_json()),
            }
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn parse_point(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad coordinate `{t}`: {e}")))
        .collect()
}

fn summarize(report: &VerificationReport) {
    for suite in &report.suites {
        let name = serde_json::to_value(suite.name).ok();
        let name = name.as_ref().and_then(|v| v.as_str()).unwrap_or("?");
        if let Some(why) = &suite.skipped {
            eprintln!("{name}: skipped ({why})");
            continue;
        }
        for c in &suite.checks {
            let status = match (c.passed, c.expected_failure) {
                (true, _) => "pass",
                (false, true) => "FAIL (expected)",
                (false, false) => "FAIL",
            };
            let label = format!("{name}/{}", c.name);
            eprintln!("{label:<56} {status:<16} max {:.3e}  tol {:.1e}", c.max_residual, c.tolerance);
        }
    }
    if !report.rejected_points.is_empty() {
        eprintln!("{} sample point(s) rejected", report.rejected_points.len());
    }
    eprintln!("{}", if report.passed { "PASSED" } else { "FAILED" });
}
