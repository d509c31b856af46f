use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use deltaprime::diagnostics::Observable;
use deltaprime::export::*;
use deltaprime::identities::run_identities;
use deltaprime::pipeline::{convergence_study, run_scenario, RunOptions};
use deltaprime::{Error, GammaConfig, Scenario, ScenarioConfig};

#[derive(Parser)]
#[command(name = "deltaprime", version, about = "Schrödinger evolution with a moving derivative-type point interaction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write the charge, frames, field and diagnostics.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Frame times, comma separated; each must be a time node.
        #[arg(long, value_delimiter = ',')]
        frames: Option<Vec<f64>>,
        /// Overrides the seed of a rough gamma profile.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the built-in identity suite.
    Identities {
        #[arg(long)]
        out: PathBuf,
    },
    /// Refine the time grid and tabulate errors and observed orders.
    Converge {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        refinements: usize,
        /// Defaults to the charge for manufactured scenarios and the norm drift otherwise.
        #[arg(long, value_enum)]
        observable: Option<ObservableArg>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and check a scenario without solving it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ObservableArg {
    Charge,
    NormDrift,
    Boundary,
}

impl From<ObservableArg> for Observable {
    fn from(o: ObservableArg) -> Self {
        match o {
            ObservableArg::Charge => Observable::Charge,
            ObservableArg::NormDrift => Observable::NormDrift,
            ObservableArg::Boundary => Observable::Boundary,
        }
    }
}

#[derive(Serialize)]
struct RunManifest {
    subcommand: String,
    scenario: Option<PathBuf>,
    out_dir: PathBuf,
    seed: Option<u64>,
    /// The scenario exactly as solved, after any overrides.
    scenario_config: Option<ScenarioConfig>,
    tolerances: BTreeMap<String, f64>,
    timings: Vec<(String, f64)>,
    files: Vec<String>,
    version: String,
}

impl RunManifest {
    fn new(subcommand: &str, scenario: Option<&Path>, out_dir: &Path, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.into(),
            scenario: scenario.map(Path::to_path_buf),
            out_dir: out_dir.to_path_buf(),
            seed,
            scenario_config: None,
            tolerances: BTreeMap::new(),
            timings: Vec::new(),
            files: Vec::new(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    fn write(mut self, out: &Path) -> Result<(), Failure> {
        self.files.push("manifest.json".into());
        write_json(&out.join("manifest.json"), &self)?;
        Ok(())
    }
}

/// An error together with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BoundaryMass { .. }
            | Error::OscillationResolution { .. }
            | Error::SingularTrace
            | Error::DiagonalDegeneracy { .. }
            | Error::NonConstantGamma
            | Error::ResourceGuard(_) => 3,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn load(path: &Path, seed: Option<u64>) -> Result<(ScenarioConfig, Scenario<f64>), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut cfg = ScenarioConfig::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        match &mut cfg.gamma {
            GammaConfig::RoughFourier { seed, .. } => *seed = s,
            _ => return Err(usage("--seed applies only to a rough_fourier gamma")),
        }
    }
    let scenario = Scenario::from_config(&cfg)?;
    Ok((cfg, scenario))
}

fn prepare_out(out: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(out).map_err(|e| usage(format!("{}: {e}", out.display())))
}

fn run(scenario_path: &Path, out: &Path, frames: Option<Vec<f64>>, seed: Option<u64>) -> Result<u8, Failure> {
    let (cfg, scenario) = load(scenario_path, seed)?;
    prepare_out(out)?;
    let mut manifest = RunManifest::new("run", Some(scenario_path), out, seed);
    manifest.tolerances = scenario.tolerances.resolved();
    let options = RunOptions { frames, ..RunOptions::default() };
    let result = run_scenario(&scenario, &options)?;

    let clock = Instant::now();
    let mut files = vec!["charge.csv".to_string()];
    write_charge_csv(&out.join("charge.csv"), &result.trajectory)?;
    for f in &result.frames {
        let name = format!("frame_{:06}.csv", f.node);
        write_frame_csv(&out.join(&name), f)?;
        files.push(name);
    }
    write_field_binary(&out.join("psi.bin"), &out.join("psi.json"), &result.frames, &scenario.spatial_grid)?;
    files.extend(["psi.bin".into(), "psi.json".into(), "report.json".into()]);
    write_report_json(&out.join("report.json"), &result.report)?;

    manifest.timings = result.timings;
    manifest.timings.push(("export".into(), clock.elapsed().as_secs_f64()));
    manifest.files = files;
    manifest.scenario_config = Some(cfg);
    manifest.write(out)?;
    Ok(0)
}

fn identities(out: &Path) -> Result<u8, Failure> {
    prepare_out(out)?;
    let clock = Instant::now();
    let rows = run_identities()?;
    let mut manifest = RunManifest::new("identities", None, out, None);
    manifest.timings.push(("identities".into(), clock.elapsed().as_secs_f64()));
    write_identity_csv(&out.join("identities.csv"), &rows)?;
    manifest.files.push("identities.csv".into());
    manifest.write(out)?;
    let mut failed = 0;
    for r in &rows {
        let order = r.order.map(|p| format!("  order {p:.3} (floor {})", r.order_floor.unwrap_or(f64::NAN))).unwrap_or_default();
        println!("{} {:<28} {:.3e} (tol {:.1e}){order}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.measured, r.tolerance);
        failed += usize::from(!r.pass);
    }
    Ok(u8::from(failed > 0))
}

fn converge(scenario_path: &Path, out: &Path, refinements: usize, observable: Option<ObservableArg>, seed: Option<u64>) -> Result<u8, Failure> {
    if refinements < 2 {
        return Err(usage(format!("--refinements must be at least 2, got {refinements}")));
    }
    let (cfg, scenario) = load(scenario_path, seed)?;
    prepare_out(out)?;
    let observable = match observable {
        Some(o) => o.into(),
        None if scenario.manufactured.is_some() => Observable::Charge,
        None => Observable::NormDrift,
    };
    let clock = Instant::now();
    let rows = convergence_study(&scenario, refinements, observable)?;
    let mut manifest = RunManifest::new("converge", Some(scenario_path), out, seed);
    manifest.tolerances = scenario.tolerances.resolved();
    manifest.timings.push(("convergence".into(), clock.elapsed().as_secs_f64()));
    write_convergence_csv(&out.join("convergence.csv"), &rows)?;
    manifest.files.push("convergence.csv".into());
    manifest.scenario_config = Some(cfg);
    manifest.write(out)?;

    let floor = scenario.tolerances.get("order_floor");
    let mut below = false;
    for r in &rows {
        match r.order {
            Some(p) => {
                println!("{:>7} {:.3e} {:.3e} {p:.3}", r.n_steps, r.h, r.error);
                below |= !(p >= floor);
            }
            None => println!("{:>7} {:.3e} {:.3e}", r.n_steps, r.h, r.error),
        }
    }
    if below {
        eprintln!("observed order below the floor {floor}");
    }
    Ok(u8::from(below))
}

fn validate(scenario_path: &Path, seed: Option<u64>) -> Result<u8, Failure> {
    load(scenario_path, seed)?;
    println!("{}: ok", scenario_path.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run { scenario, out, frames, seed } => run(&scenario, &out, frames, seed),
        Command::Identities { out } => identities(&out),
        Command::Converge { scenario, out, refinements, observable, seed } => converge(&scenario, &out, refinements, observable, seed),
        Command::Validate { scenario, seed } => validate(&scenario, seed),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
