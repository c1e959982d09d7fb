use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use geoctl::scenario::{self, RunReport, ScenarioConfig, OUT_DIR_ENV};

/// Run and validate geometric-control scenarios.
#[derive(Debug, Parser)]
#[command(name = "geoctl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario configuration.
    Run {
        config: PathBuf,
        /// Output directory for the CSV and JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Integration step.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Check a configuration and list every problem found.
    Validate { config: PathBuf },
    /// Run the bundled scenarios and print the acceptance table.
    Suite {
        /// Only scenarios whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_dir(flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
}

fn print_report(report: &RunReport) {
    println!(
        "{} ({}, seed {}, {:.2} s)",
        report.name, report.scenario, report.seed, report.wall_time_s
    );
    for fit in &report.fits {
        println!(
            "  fit {:<24} λ = {:.6}  K = {:.4}  rms = {:.2e}",
            fit.label, fit.fit.lambda, fit.fit.k, fit.fit.residual
        );
    }
    for c in &report.criteria {
        println!("  {}", c.summary());
    }
    for path in &report.outputs {
        println!("  wrote {}", path.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            h,
        } => {
            let mut cfg = match ScenarioConfig::load(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(h) = h {
                cfg.h = h;
            }
            if let Some(dir) = out_dir(out) {
                cfg.output = Some(dir);
            }
            match scenario::run(&cfg) {
                Ok(report) => {
                    print_report(&report);
                    if report.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Validate { config } => {
            let problems = match ScenarioConfig::load(&config) {
                Ok(cfg) => cfg.validate(),
                Err(e) => vec![e],
            };
            if problems.is_empty() {
                println!("{}: ok", config.display());
                return ExitCode::SUCCESS;
            }
            for p in &problems {
                println!("{}: {p}", config.display());
            }
            ExitCode::FAILURE
        }
        Command::Suite { filter, out } => {
            let configs = match scenario::bundled_configs(filter.as_deref()) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if configs.is_empty() {
                eprintln!("error: no bundled scenario matches the filter");
                return ExitCode::from(2);
            }
            let start = Instant::now();
            let dir = out_dir(out);
            let results = scenario::run_suite(&configs, dir.as_deref());
            let mut all = true;
            println!(
                "{:<28} {:<36} {:>14} {:>14}  result",
                "scenario", "criterion", "measured", "predicted"
            );
            for (cfg, result) in configs.iter().zip(&results) {
                match result {
                    Ok(report) => {
                        for c in &report.criteria {
                            println!(
                                "{:<28} {:<36} {:>14.6e} {:>14.6e}  {}",
                                report.name,
                                c.name,
                                c.measured,
                                c.predicted,
                                if c.passed { "PASS" } else { "FAIL" }
                            );
                        }
                        all &= report.passed;
                    }
                    Err(e) => {
                        println!(
                            "{:<28} {:<36} {:>14} {:>14}  FAIL ({e})",
                            cfg.label(),
                            "run",
                            "-",
                            "-"
                        );
                        all = false;
                    }
                }
            }
            println!(
                "suite: {} in {:.1} s",
                if all { "PASS" } else { "FAIL" },
                start.elapsed().as_secs_f64()
            );
            if all {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
