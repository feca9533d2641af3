//! Scenario runner for the generalized-function engine: loads a config,
//! builds the regime, nets and expressions, runs the named verification
//! tasks and writes a JSON report plus optional CSV curves.
//!
//! Exit codes: 0 all task verdicts as expected, 1 some task failed,
//! 2 configuration error.

mod build;
mod config;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use build::Workbench;
use config::Scenario;
use tasks::{run_task, Curves, TaskResult};

#[derive(Parser)]
#[command(name = "colombeau", about = "Nonlinear generalized function scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config (a file path or a built-in name)
    Run {
        config: String,
        /// output directory for the report and curves
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// also write the raw sweep curves as CSV
        #[arg(long)]
        curves: bool,
        /// override the scenario seed
        #[arg(long)]
        seed: Option<u64>,
        /// drop eps grid points below this value
        #[arg(long)]
        eps_min: Option<f64>,
        /// worker threads for the sweeps
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List the built-in scenarios
    List,
    /// Check admissibility of a scale pair
    /// ("poly", "ultra-beurling:gevrey:2", "ultra-roumieu:gevrey:2")
    VerifyScales { pair: String },
    /// Verify the test-object axioms of a mollifier net
    /// ("distribution" or "gevrey:2")
    VerifyMollifier { params: String },
}

const BUILTINS: &[(&str, &str)] = &[
    ("delta-square", include_str!("../scenarios/delta-square.json")),
    (
        "embedding-products",
        include_str!("../scenarios/embedding-products.json"),
    ),
    ("fourier-bounds", include_str!("../scenarios/fourier-bounds.json")),
    ("sheaf-glue", include_str!("../scenarios/sheaf-glue.json")),
    (
        "diffeo-invariance",
        include_str!("../scenarios/diffeo-invariance.json"),
    ),
    (
        "scale-admissibility",
        include_str!("../scenarios/scale-admissibility.json"),
    ),
    ("test-objects", include_str!("../scenarios/test-objects.json")),
    (
        "test-objects-gevrey",
        include_str!("../scenarios/test-objects-gevrey.json"),
    ),
];

#[derive(serde::Serialize)]
struct Report {
    scenario: String,
    reference: String,
    expected: String,
    seed: u64,
    eps_grid: Vec<f64>,
    tasks: Vec<TaskResult>,
    passed: bool,
}

fn load_scenario(name_or_path: &str) -> Result<Scenario, String> {
    let text = if let Some((_, body)) = BUILTINS.iter().find(|(n, _)| *n == name_or_path) {
        (*body).to_string()
    } else {
        std::fs::read_to_string(name_or_path)
            .map_err(|e| format!("cannot read config {name_or_path:?}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| format!("config parse error: {e}"))
}

fn run(
    config: String,
    out: PathBuf,
    write_curves: bool,
    seed: Option<u64>,
    eps_min: Option<f64>,
    jobs: Option<usize>,
) -> ExitCode {
    if let Some(n) = jobs {
        colombeau_core::sweep::configure_threads(n);
    }
    let mut scenario = match load_scenario(&config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let bench = match Workbench::from_scenario(&scenario, eps_min) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!("scenario {} [{}]", scenario.name, scenario.reference);
    println!("expected: {}", scenario.expected);
    let mut curves: Curves = Vec::new();
    let mut results = Vec::new();
    for task in &scenario.tasks {
        let r = match run_task(&bench, task, &mut curves) {
            Ok(r) => r,
            Err(colombeau_core::Error::Config(msg)) => {
                eprintln!("error in task {}: {msg}", task.name());
                return ExitCode::from(2);
            }
            Err(e) => TaskResult {
                name: task.name().to_string(),
                passed: false,
                detail: format!("task error: {e}"),
                data: serde_json::Value::Null,
            },
        };
        println!(
            "  [{}] {}: {}",
            if r.passed { "pass" } else { "FAIL" },
            r.name,
            r.detail
        );
        results.push(r);
    }
    let passed = results.iter().all(|r| r.passed);
    let report = Report {
        scenario: scenario.name.clone(),
        reference: scenario.reference.clone(),
        expected: scenario.expected.clone(),
        seed: scenario.seed,
        eps_grid: bench.eps.clone(),
        tasks: results,
        passed,
    };
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: cannot create output dir: {e}");
        return ExitCode::from(2);
    }
    let report_path = out.join(format!("{}-report.json", scenario.name));
    match serde_json::to_string_pretty(&report) {
        Ok(json) => {
            if let Err(e) = std::fs::write(&report_path, json) {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(2);
            }
        }
        Err(e) => {
            eprintln!("error: report serialization: {e}");
            return ExitCode::from(2);
        }
    }
    if write_curves {
        let mut csv = String::from("task,eps,value,bound\n");
        for (task, eps, value, bound) in &curves {
            csv.push_str(&format!("{task},{eps},{value},{bound}\n"));
        }
        let curves_path = out.join(format!("{}-curves.csv", scenario.name));
        if let Err(e) = std::fs::write(&curves_path, csv) {
            eprintln!("error: cannot write curves: {e}");
            return ExitCode::from(2);
        }
    }
    println!(
        "report: {} ({})",
        report_path.display(),
        if passed { "all tasks passed" } else { "FAILURES" }
    );
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn list() -> ExitCode {
    println!("{:<22} | {} ", "name", "checks / expected verdicts");
    println!("{:-<22}-+-{:-<60}", "", "");
    for (name, body) in BUILTINS {
        let sc: Scenario = match serde_json::from_str(body) {
            Ok(s) => s,
            Err(_) => continue,
        };
        println!("{name:<22} | {}", sc.reference);
        println!("{:<22} |   expected: {}", "", sc.expected);
    }
    ExitCode::SUCCESS
}

fn verify_scales(pair: &str) -> ExitCode {
    let base: Scenario =
        serde_json::from_str(include_str!("../scenarios/scale-admissibility.json"))
            .expect("builtin parses");
    let bench = match Workbench::from_scenario(&base, None) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match bench.scale_by_name(pair) {
        Ok(p) => {
            let cert = p.certificate().expect("certified on construction");
            for e in &cert.entries {
                println!(
                    "axiom ({}) [{}] {}: witness {}, fitted log C = {:.3}",
                    e.axiom,
                    e.mode,
                    if e.passed { "pass" } else { "FAIL" },
                    e.witness,
                    e.fitted_log_c
                );
            }
            if cert.passed {
                println!("admissible");
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(colombeau_core::Error::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}

fn verify_mollifier(params: &str) -> ExitCode {
    let (config, name) = match params {
        "distribution" => ("test-objects", "mollifier-distribution"),
        "gevrey:2" | "gevrey-beurling:2" => ("test-objects-gevrey", "mollifier-gevrey2"),
        other => {
            eprintln!(
                "error: unknown mollifier params {other:?} (use \"distribution\" or \"gevrey:2\")"
            );
            return ExitCode::from(2);
        }
    };
    let scenario = load_scenario(config).expect("builtin parses");
    let bench = match Workbench::from_scenario(&scenario, None) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let task = scenario
        .tasks
        .iter()
        .find(|t| t.name() == name)
        .expect("builtin task present");
    let mut curves = Vec::new();
    match run_task(&bench, task, &mut curves) {
        Ok(r) => {
            println!("[{}] {}", if r.passed { "pass" } else { "FAIL" }, r.detail);
            if r.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            curves,
            seed,
            eps_min,
            jobs,
        } => run(config, out, curves, seed, eps_min, jobs),
        Command::List => list(),
        Command::VerifyScales { pair } => verify_scales(&pair),
        Command::VerifyMollifier { params } => verify_mollifier(&params),
    }
}
