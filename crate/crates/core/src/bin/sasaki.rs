//! Command-line surface: scenario verification, residual sweeps over
//! configured geometries, and geodesic traces with an optional brute-force
//! cross-check.
//!
//! Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 bad configuration or usage.

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sasaki_core::config::RunConfig;
use sasaki_core::geodesic::{integrate, oracle_integrate, trace_divergence, trace_to_csv};
use sasaki_core::scenario::{
    self, grid_points, Extremum, GridSpec, Outcome, ScenarioOverrides, ScenarioReport, Tolerances,
};
use sasaki_core::GeomError;

#[derive(Parser)]
#[command(
    name = "sasaki",
    about = "Sasaki-metric geometry of tangent bundles: totally geodesic residuals, scenarios, geodesics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a registered scenario and report pass/fail.
    Verify {
        /// Scenario name (see `sasaki list`).
        scenario: String,
        /// Grid points per parameter dimension.
        #[arg(long)]
        grid: Option<usize>,
        /// Pass tolerance for residual_zero expectations.
        #[arg(long)]
        tol: Option<f64>,
        /// Fail threshold (also the residual_positive floor).
        #[arg(long)]
        fail_tol: Option<f64>,
        /// Write the full report as JSON to this path.
        #[arg(long)]
        json: Option<String>,
    },
    /// Totally-geodesic residuals of a configured field over its grid.
    Residual {
        #[arg(long)]
        config: String,
        #[arg(long)]
        json: Option<String>,
    },
    /// Integrate a Sasaki geodesic and export the trace as CSV.
    Geodesic {
        #[arg(long)]
        config: String,
        /// Final curve parameter.
        #[arg(long)]
        sigma: f64,
        /// Fixed RK4 step.
        #[arg(long)]
        step: f64,
        /// Trace output path.
        #[arg(long)]
        csv: String,
        /// Also run the brute-force reference integrator and report the
        /// largest divergence.
        #[arg(long)]
        oracle: bool,
    },
    /// List registered scenarios and builtin geometries.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(3)
        }
    }
}

fn outcome_code(outcome: Outcome) -> ExitCode {
    match outcome {
        Outcome::Pass => ExitCode::SUCCESS,
        Outcome::Fail => ExitCode::from(1),
        Outcome::Inconclusive => ExitCode::from(2),
    }
}

fn run(cli: Cli) -> Result<ExitCode, GeomError> {
    match cli.command {
        Command::Verify {
            scenario,
            grid,
            tol,
            fail_tol,
            json,
        } => {
            let mut overrides = ScenarioOverrides::default();
            if let Some(n) = grid {
                overrides.grid = Some(GridSpec {
                    points_per_dim: n,
                    ..GridSpec::default()
                });
            }
            if tol.is_some() || fail_tol.is_some() {
                let d = Tolerances::default();
                overrides.tolerances = Some(Tolerances {
                    pass: tol.unwrap_or(d.pass),
                    fail: fail_tol.unwrap_or(d.fail),
                });
            }
            let report = scenario::run_scenario(&scenario, &overrides)?;
            print_report(&report);
            write_json(json.as_deref(), &report)?;
            Ok(outcome_code(report.outcome))
        }
        Command::Residual { config, json } => {
            let cfg = load_config(&config)?;
            let m = cfg.build_manifold()?;
            let patch = cfg.build_patch(&m)?;
            let field = cfg.build_field(patch)?;
            let grid = cfg.grid();
            let tol = cfg.tolerances()?;
            let (lo, hi) = field.patch().domain();
            let mut max = Extremum {
                value: f64::NEG_INFINITY,
                location: Vec::new(),
            };
            let mut min = Extremum {
                value: f64::INFINITY,
                location: Vec::new(),
            };
            let mut worst_cond = 0.0_f64;
            for u in grid_points(lo, hi, &grid) {
                let rep = field.tg_residuals(&u)?;
                let r = rep.max_residual();
                if r > max.value {
                    max = Extremum {
                        value: r,
                        location: u.clone(),
                    };
                }
                if r < min.value {
                    min = Extremum {
                        value: r,
                        location: u,
                    };
                }
                worst_cond = worst_cond.max(rep.frame_cond);
            }
            let outcome = if max.value <= tol.pass {
                Outcome::Pass
            } else if max.value >= tol.fail {
                Outcome::Fail
            } else {
                Outcome::Inconclusive
            };
            let report = ScenarioReport {
                name: "residual".into(),
                pass: outcome == Outcome::Pass,
                outcome,
                expectation: scenario::Expectation::ResidualZero,
                grid,
                tolerances: tol,
                max_residual: max,
                min_residual: min,
                notes: format!(
                    "configured geometry; worst induced-metric condition {worst_cond:.3e}"
                ),
            };
            print_report(&report);
            let json_path = json.or_else(|| cfg.output.as_ref().and_then(|o| o.json.clone()));
            write_json(json_path.as_deref(), &report)?;
            Ok(outcome_code(report.outcome))
        }
        Command::Geodesic {
            config,
            sigma,
            step,
            csv,
            oracle,
        } => {
            if !(sigma > 0.0) {
                return Err(GeomError::Config("--sigma must be positive".into()));
            }
            if !(step > 0.0) {
                return Err(GeomError::Config("--step must be positive".into()));
            }
            let cfg = load_config(&config)?;
            let m = cfg.build_manifold()?;
            let s0 = cfg.build_geodesic_state(&m)?;
            let trace = integrate(&m, &s0, sigma, step)?;
            fs::write(&csv, trace_to_csv(&trace))
                .map_err(|e| GeomError::Config(format!("cannot write `{csv}`: {e}")))?;
            let last = trace.last();
            println!(
                "integrated to sigma = {:.6} in {} steps; energy drift {:.3e}{}",
                last.sigma,
                trace.records.len() - 1,
                trace.energy_drift(),
                if trace.truncated {
                    " (trace truncated at the chart boundary)"
                } else {
                    ""
                }
            );
            println!("trace written to {csv}");
            if oracle {
                let reference = oracle_integrate(&m, &s0, sigma, step)?;
                let div = trace_divergence(&trace, &reference);
                println!(
                    "oracle cross-check: max divergence {div:.3e} over {} records",
                    reference.records.len()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::List => {
            println!("scenarios:");
            for def in scenario::registry() {
                println!(
                    "  {:<22} [{}] {}",
                    def.name,
                    expectation_label(def.expectation),
                    def.summary
                );
            }
            println!();
            println!("builtin manifolds:");
            println!("  euclidean    (dim)                flat R^n");
            println!("  conformal    (dim, curvature)     constant-curvature chart, either sign");
            println!("  sphere-band  (half_width)         band around the unit-sphere equator");
            println!("  flat-torus   (dim, period)        flat box chart with periodic faces");
            println!();
            println!("builtin patches: full (identity immersion over a box)");
            println!("builtin fields:  zero, constant (values)");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn expectation_label(e: scenario::Expectation) -> &'static str {
    match e {
        scenario::Expectation::ResidualZero => "residual_zero",
        scenario::Expectation::ResidualPositive => "residual_positive",
        scenario::Expectation::IdentityHolds => "identity_holds",
    }
}

fn load_config(path: &str) -> Result<RunConfig, GeomError> {
    let src = fs::read_to_string(path)
        .map_err(|e| GeomError::Config(format!("cannot read `{path}`: {e}")))?;
    RunConfig::from_json(&src)
}

fn print_report(report: &ScenarioReport) {
    println!(
        "{}: {} (expectation {})",
        report.name,
        match report.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Inconclusive => "INCONCLUSIVE",
        },
        expectation_label(report.expectation)
    );
    println!(
        "  max residual {:.3e} at {:?}",
        report.max_residual.value, report.max_residual.location
    );
    println!(
        "  min residual {:.3e} at {:?}",
        report.min_residual.value, report.min_residual.location
    );
    println!(
        "  grid {} pts/dim (margin {}), tolerances pass {:.1e} / fail {:.1e}",
        report.grid.points_per_dim,
        report.grid.margin,
        report.tolerances.pass,
        report.tolerances.fail
    );
    if !report.notes.is_empty() {
        println!("  notes: {}", report.notes);
    }
}

fn write_json(path: Option<&str>, report: &ScenarioReport) -> Result<(), GeomError> {
    if let Some(path) = path {
        let body = serde_json::to_string_pretty(report)
            .map_err(|e| GeomError::Config(format!("cannot serialize report: {e}")))?;
        fs::write(path, body)
            .map_err(|e| GeomError::Config(format!("cannot write `{path}`: {e}")))?;
    }
    Ok(())
}
