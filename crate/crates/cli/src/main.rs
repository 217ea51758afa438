use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use microsing::commands::{
    cmd_analyze, cmd_groupoid, cmd_nctorus, cmd_propagate, cmd_wavefront, CliError,
};
use microsing::config::RunConfig;
use microsing::report::{write_atomic, RunReport};
use microsing::selftest::run_selftest;

#[derive(Parser)]
#[command(
    name = "microsing",
    about = "Microlocal singularity experiments on spectral torus truncations",
    version
)]
struct Cli {
    /// JSON config file overriding the defaults.
    #[arg(long, global = true)]
    config: Option<String>,

    /// Seed for all randomness in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for reports and CSV sidecars.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format written to disk (json|csv).
    #[arg(long, global = true)]
    format: Option<String>,

    /// Reduced-scale run.
    #[arg(long, global = true)]
    quick: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tameness/regularity analysis of a distribution spec.
    Analyze { uspec: String },
    /// Singular support and wavefront detection with heatmap CSVs.
    Wavefront { uspec: String },
    /// Propagate and compare against the calibrated flow.
    Propagate {
        /// Distribution spec (default delta:0).
        #[arg(long, default_value = "delta:0")]
        u: String,
        #[arg(long, default_value_t = 0.7)]
        t: f64,
        /// Metric profile: const | cos:AMPL | file.json.
        #[arg(long)]
        profile: Option<String>,
    },
    /// Groupoid demos: equivariance | anchor.
    Groupoid {
        #[arg(long, default_value = "equivariance")]
        demo: String,
        #[arg(long, default_value_t = 0.8)]
        t: f64,
    },
    /// Noncommutative-torus wavefront membership check.
    Nctorus {
        /// JSON element file; a built-in example element when omitted.
        #[arg(long)]
        check_wf: Option<String>,
        #[arg(long, default_value = "5/7")]
        theta: String,
    },
    /// Run the acceptance suite; nonzero exit on any failure.
    Selftest,
}

fn run() -> Result<(RunReport, PathBuf, String), CliError> {
    let cli = Cli::parse();
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(fmt) = &cli.format {
        cfg.output.format = fmt.clone();
    }
    if let Some(out) = &cli.out {
        cfg.output.directory = out.display().to_string();
    }
    if cli.quick && !cfg.quick {
        cfg = cfg.quickened();
    }
    cfg.validate()?;
    let out_dir = PathBuf::from(&cfg.output.directory);
    let report = match &cli.command {
        Command::Analyze { uspec } => cmd_analyze(uspec, &cfg)?,
        Command::Wavefront { uspec } => cmd_wavefront(uspec, &cfg, &out_dir)?,
        Command::Propagate { u, t, profile } => {
            cmd_propagate(u, *t, profile.as_deref(), &cfg, &out_dir)?
        }
        Command::Groupoid { demo, t } => cmd_groupoid(demo, *t, &cfg, &out_dir)?,
        Command::Nctorus { check_wf, theta } => cmd_nctorus(check_wf.as_deref(), theta, &cfg)?,
        Command::Selftest => run_selftest(&cfg, true).map_err(CliError::from)?,
    };
    Ok((report, out_dir, cfg.output.format))
}

fn main() -> ExitCode {
    match run() {
        Ok((report, out_dir, format)) => {
            let json = report.to_json_string();
            println!("{json}");
            let path = out_dir.join("report.json");
            if let Err(e) = write_atomic(&path, &json) {
                eprintln!("io error writing {}: {e}", path.display());
                return ExitCode::from(3);
            }
            if format == "csv" {
                let mut csv = String::from("check,status\n");
                for r in &report.results {
                    csv.push_str(&format!("{},{:?}\n", r.name, r.status));
                }
                if let Err(e) = write_atomic(&out_dir.join("report.csv"), &csv) {
                    eprintln!("io error: {e}");
                    return ExitCode::from(3);
                }
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
