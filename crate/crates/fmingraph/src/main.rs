use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fmingraph::config::{parse_config, ExperimentConfig, ExperimentKind};
use fmingraph::experiment::{run, EXIT_USAGE};

/// Batch experiments for prescribed-mean-curvature graphs on rotationally
/// symmetric manifolds.
#[derive(Parser)]
#[command(name = "fmingraph", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// experiment config file (key = value with [section] headers)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// output directory for CSV artifacts and the manifest
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// grid override, e.g. 256x128
    #[arg(long, global = true)]
    grid: Option<String>,

    /// solver tolerance override
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the warping-function initial value problems and export them
    Jacobi,
    /// Check the curvature assumptions and drift structure conditions
    Check,
    /// Build and verify the global and asymptotic barriers
    Barrier,
    /// Solve the Dirichlet problem on a geodesic ball
    Solve,
    /// Solve on an exhaustion of balls and audit convergence
    Exhaust,
    /// Three distinct solutions with identical zero boundary data
    DemoNonuniqueness,
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Jacobi => ExperimentKind::Jacobi,
            Command::Check => ExperimentKind::Assumptions,
            Command::Barrier => ExperimentKind::BarrierVerify,
            Command::Solve => ExperimentKind::SolveBall,
            Command::Exhaust => ExperimentKind::Exhaustion,
            Command::DemoNonuniqueness => ExperimentKind::Nonuniqueness,
        }
    }
}

fn main() -> ExitCode {
    // exit contract: 0 pass, 1 usage error, 2 verification failure; clap's
    // native exit code for bad flags is 2, so map parse errors ourselves
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE as u8)
            } else {
                ExitCode::SUCCESS // --help / --version
            };
        }
    };
    let kind = cli.command.kind();

    let (mut cfg, raw) = match &cli.config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read {}: {e}", path.display());
                    return ExitCode::from(EXIT_USAGE as u8);
                }
            };
            match parse_config(&text) {
                Ok(c) => (c, text),
                Err(e) => {
                    eprintln!("config error:\n{e}");
                    return ExitCode::from(EXIT_USAGE as u8);
                }
            }
        }
        None => {
            let mut c = ExperimentConfig::default();
            // subcommand defaults that make sense without a config file
            match kind {
                ExperimentKind::Jacobi => {
                    c.manifold_preset = "hyperbolic(1)".into();
                    c.r_max = 10.0;
                }
                ExperimentKind::Assumptions => {
                    c.manifold_preset = "power(2,0.5)".into();
                    c.r_max = 2100.0;
                    c.r_probe = 2048.0;
                    c.jacobi_step = 1e-2;
                    c.a0_preset = "powerlog(2)".into();
                    c.delta = 0.0625;
                }
                ExperimentKind::BarrierVerify => {
                    c.manifold_preset = "power(2,0.5)".into();
                    c.r_max = 1100.0;
                    c.jacobi_step = 1e-2;
                    c.a0_preset = "powerlog(2)".into();
                    c.delta = 0.0625;
                }
                ExperimentKind::Exhaustion => {
                    c.manifold_preset = "power(2,0.5)".into();
                    c.r_max = 150.0;
                    c.jacobi_step = 1e-2;
                    c.a0_preset = "powerlog(2)".into();
                    c.boundary = "cos".into();
                    c.nt = 64;
                    c.delta = 0.0625;
                }
                ExperimentKind::Nonuniqueness => {
                    c.manifold_preset = "euclidean".into();
                    c.r_max = 10.0;
                    c.nr = 128;
                    c.nt = 64;
                }
                ExperimentKind::SolveBall => {
                    c.boundary = "cos(0.5)".into();
                }
            }
            (c, String::new())
        }
    };
    cfg.kind = kind;
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(tol) = cli.tol {
        if tol <= 0.0 {
            eprintln!("--tol must be positive");
            return ExitCode::from(EXIT_USAGE as u8);
        }
        cfg.tol = tol;
    }
    if let Some(grid) = cli.grid {
        match grid.split_once(['x', 'X']) {
            Some((a, b)) => match (a.parse::<usize>(), b.parse::<usize>()) {
                (Ok(nr), Ok(nt)) if nr >= 2 && nt >= 4 => {
                    cfg.nr = nr;
                    cfg.nt = nt;
                }
                _ => {
                    eprintln!("--grid expects NRxNT with NR >= 2, NT >= 4, got \"{grid}\"");
                    return ExitCode::from(EXIT_USAGE as u8);
                }
            },
            None => {
                eprintln!("--grid expects NRxNT, got \"{grid}\"");
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
    }

    let raw_for_hash = if raw.is_empty() {
        fmingraph::config::to_manifest(&cfg)
    } else {
        raw
    };
    match run(&cfg, &raw_for_hash) {
        Ok(code) => {
            println!(
                "{}: {}",
                cfg.kind.name(),
                if code == 0 { "pass" } else { "verification failure" }
            );
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("{}: {e}", cfg.kind.name());
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
