use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elastica::io::{run_experiment, write_outputs, Command, ExperimentConfig, RunArtifact};

/// Equilibria and optimal two-material designs of a clamped elastic beam
/// under gravity.
///
/// Settings come from built-in defaults, then `--config`, then flags.
/// Results go to `--out`: record.json, config.txt, data.csv and SVG plots.
/// The exit status is 1 when a solve does not converge or a check fails.
#[derive(Parser, Debug)]
#[command(name = "elastica", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Solve the equilibrium for the hard material.
    SolveState(Flags),
    /// Optimize the phase-field design with BFGS.
    OptimizeDesign(Flags),
    /// Compare laminates against the harmonic-mean relaxation.
    Homogenize(Flags),
    /// Optimize, then run the structural checks on the optimum.
    Verify(Flags),
    /// Optimize from several initializations in parallel.
    Sweep(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_name = "L")]
    level_coarse: Option<String>,
    #[arg(long, value_name = "L")]
    level_fine: Option<String>,
    /// Load magnitude.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Clamp angle in radians.
    #[arg(long = "K0", allow_hyphen_values = true)]
    k0: Option<String>,
    /// Soft stiffness.
    #[arg(long)]
    a: Option<String>,
    /// Hard stiffness.
    #[arg(long)]
    b: Option<String>,
    /// Cost per unit length of hard material.
    #[arg(long)]
    cl: Option<String>,
    /// Perimeter weight.
    #[arg(long)]
    cp: Option<String>,
    /// Interface width (`auto` for the fine mesh size).
    #[arg(long)]
    eps: Option<String>,
    /// State branch (simple, twisted, s-shape) or phase-field start
    /// (zero, all-soft, all-hard, random, random:N).
    #[arg(long)]
    init: Option<String>,
    /// Point constraints, e.g. "(0.5, -0.3, 0); (1, -0.6, 0)".
    #[arg(long, allow_hyphen_values = true)]
    constraints: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Sweep worker threads.
    #[arg(long)]
    workers: Option<String>,
    /// Any other configuration key, as KEY=VALUE.
    #[arg(long = "set", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    set: Vec<String>,
}

impl Flags {
    fn overrides(&self) -> Result<Vec<(String, String)>, String> {
        let named = [
            ("level_coarse", &self.level_coarse),
            ("level_fine", &self.level_fine),
            ("delta", &self.delta),
            ("K0", &self.k0),
            ("a", &self.a),
            ("b", &self.b),
            ("cl", &self.cl),
            ("cp", &self.cp),
            ("eps", &self.eps),
            ("seed", &self.seed),
            ("init", &self.init),
            ("constraints", &self.constraints),
            ("out", &self.out),
            ("workers", &self.workers),
        ];
        let mut pairs: Vec<(String, String)> = Vec::new();
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| format!("--set expects KEY=VALUE, got `{s}`"))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        // named flags win over --set
        pairs.extend(
            named
                .into_iter()
                .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))),
        );
        Ok(pairs)
    }
}

// write errors (e.g. a closed pipe) are ignored; the files are already on disk
fn summarize(art: &RunArtifact, written: usize, dir: &std::path::Path) {
    let mut out = std::io::stdout().lock();
    let status = if art.success { "ok" } else { "FAILED" };
    let _ = writeln!(out, "{}: {status}", art.label);
    if let Some(e) = &art.error {
        let _ = writeln!(out, "  error: {e}");
    }
    for (k, v) in &art.scalars {
        let _ = writeln!(out, "  {k} = {v:.6e}");
    }
    for (k, v) in &art.flags {
        let _ = writeln!(out, "  {k} = {v}");
    }
    for v in &art.violations {
        let _ = writeln!(out, "  violation: {v}");
    }
    let _ = writeln!(out, "wrote {written} files to {}", dir.display());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::SolveState(f) => (Command::SolveState, f),
        Sub::OptimizeDesign(f) => (Command::OptimizeDesign, f),
        Sub::Homogenize(f) => (Command::Homogenize, f),
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Sweep(f) => (Command::Sweep, f),
    };
    let config = flags
        .overrides()
        .map_err(|e| e.to_string())
        .and_then(|o| ExperimentConfig::resolve(command, flags.config.as_deref(), &o).map_err(|e| e.to_string()));
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("elastica: invalid configuration: {e}");
            return ExitCode::from(2);
        }
    };
    let art = run_experiment(&config);
    match write_outputs(&art, &config.out) {
        Ok(files) => summarize(&art, files.len(), &config.out),
        Err(e) => {
            eprintln!("elastica: cannot write results: {e}");
            return ExitCode::from(1);
        }
    }
    if art.success {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
