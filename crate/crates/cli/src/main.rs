use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use cocycle_lab::error::LabError;
use cocycle_lab_cli::config::LabConfig;
use cocycle_lab_cli::{run_and_write, suites};

/// Numerical laboratory for shift-group cocycles, Wold decompositions,
/// cochain calculus and fermionic flows.
#[derive(Parser)]
#[command(name = "cocycle-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named verification suite and write reports, series and plots.
    Run(RunArgs),
    /// Build the whole chain for one inner function and print a summary.
    DemoInner(DemoArgs),
}

#[derive(Args)]
struct RunArgs {
    /// shift-cocycles | cohomology | car | perturbation | all
    #[arg(long, default_value = "all")]
    suite: String,
    /// Structured-text configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report, series and plot files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized sweeps (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Window half-width override for the lattice suites.
    #[arg(long)]
    window: Option<usize>,
    /// Also measure the literal reading of the markovian constructor and
    /// record its unitarity failure as a finding.
    #[arg(long = "literal-2-1")]
    literal_2_1: bool,
}

#[derive(Args)]
struct DemoArgs {
    /// Blaschke zeros as comma-separated re:im pairs, e.g. "0.5" or
    /// "0.3,0:-0.4".
    #[arg(long, default_value = "")]
    zeros: String,
    /// Requested unitary-part spectrum as comma-separated angles (radians);
    /// length must match the number of zeros.
    #[arg(long, default_value = "")]
    spectrum: String,
    #[arg(long, default_value_t = 128)]
    window: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_zeros(text: &str) -> Result<Vec<Complex64>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (re, im) = match part.split_once(':') {
            Some((r, i)) => (r.trim(), i.trim()),
            None => (part, "0"),
        };
        let re: f64 = re.parse().map_err(|_| format!("bad zero component {re}"))?;
        let im: f64 = im.parse().map_err(|_| format!("bad zero component {im}"))?;
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

fn parse_angles(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("bad angle {s}")))
        .collect()
}

fn exit_code_for(err: &LabError) -> u8 {
    match err {
        LabError::WindowOverflow(_) | LabError::SizeLimit(_) => 3,
        _ => 1,
    }
}

fn run(args: RunArgs) -> ExitCode {
    let mut cfg = match &args.config {
        None => LabConfig::default(),
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read config {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            };
            match LabConfig::from_toml(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config parse error: {e}");
                    return ExitCode::from(2);
                }
            }
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(window) = args.window {
        if window < 16 {
            eprintln!("window must be at least 16");
            return ExitCode::from(2);
        }
        cfg.override_window(window);
    }
    match run_and_write(&args.suite, &cfg, &args.out, args.literal_2_1) {
        Ok((report, files)) => {
            print!("{}", report.render());
            for f in &files {
                eprintln!("wrote {}", f.display());
            }
            if report.has_failures() {
                for rec in report.failures() {
                    eprintln!("FAIL {}", rec.render());
                }
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn demo(args: DemoArgs) -> ExitCode {
    let zeros = match parse_zeros(&args.zeros) {
        Ok(z) => z,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let spectrum = match parse_angles(&args.spectrum) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match suites::demo_inner(&zeros, &spectrum, args.window) {
        Ok((summary, plots)) => {
            print!("{summary}");
            if std::fs::create_dir_all(&args.out).is_ok() {
                for (name, content) in plots {
                    let p = args.out.join(name);
                    if std::fs::write(&p, content).is_ok() {
                        eprintln!("wrote {}", p.display());
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::DemoInner(args) => demo(args),
    }
}
