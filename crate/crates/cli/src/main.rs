//! `hfmargin`: margin levels from futures tick data.

mod commands;
mod config;
mod error;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outputs;
use config::RunConfig;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hfmargin", version, about = "Futures margin levels from high-frequency price data")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Tick CSV (timestamp,price,volume,delivery_month).
    #[arg(long, global = true)]
    ticks: Option<String>,

    /// Returns CSV with a return_pct column, used instead of ticks.
    #[arg(long, global = true)]
    returns: Option<String>,

    /// Trading calendar file.
    #[arg(long, global = true)]
    calendar: Option<String>,

    /// Anchor times, e.g. 09:00,13:00,17:00.
    #[arg(long, global = true)]
    anchors: Option<String>,

    /// Intraday frequencies, e.g. 5min,1h.
    #[arg(long, global = true)]
    frequencies: Option<String>,

    /// Coverage probabilities, strictly increasing in (0.5, 1).
    #[arg(long, global = true)]
    coverages: Option<String>,

    /// Models: gaussian, evt, historical, garch.
    #[arg(long, global = true)]
    models: Option<String>,

    /// Intervals per day used for scaling: session or calendar.
    #[arg(long, global = true)]
    scaling_preset: Option<String>,

    /// Seed for the Monte Carlo KS null.
    #[arg(long, global = true)]
    seed: Option<String>,

    /// Output directory.
    #[arg(long = "out", global = true)]
    out_dir: Option<String>,

    /// Monte Carlo replications for the KS p-value.
    #[arg(long, global = true)]
    ks_reps: Option<String>,

    /// Ljung-Box lags.
    #[arg(long, global = true)]
    lb_lags: Option<String>,

    /// Tail regression range; default min(N+/2, 1000).
    #[arg(long, global = true)]
    eta: Option<String>,

    /// Share of the sample beyond the EVT margin threshold.
    #[arg(long, global = true)]
    threshold_fraction: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Roll, filter and resample ticks; write every return series.
    Ingest,
    /// Moments, quantiles, KS and Ljung-Box tests per series.
    Stats,
    /// Tail index per series and side with moment-existence tests.
    Tails,
    /// GARCH(1,1) fit per series.
    Garch,
    /// Daily margin grid and intraday margins scaled to a day.
    Margins,
    /// Scaled intraday margins against the anchored daily average, with t-tests.
    Compare,
    /// Intraday margin calls on the tick path.
    Monitor {
        #[arg(long)]
        long_margin: Option<String>,
        #[arg(long)]
        short_margin: Option<String>,
        /// Share of the margin lost before a call.
        #[arg(long)]
        call_threshold: Option<String>,
    },
    /// Generate synthetic returns or ticks from a JSON generator spec.
    Synth {
        #[arg(long)]
        spec: Option<String>,
    },
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let mut flags: Vec<(&'static str, &Option<String>)> = vec![
            ("ticks", &self.ticks),
            ("returns", &self.returns),
            ("calendar", &self.calendar),
            ("anchors", &self.anchors),
            ("frequencies", &self.frequencies),
            ("coverages", &self.coverages),
            ("models", &self.models),
            ("scaling_preset", &self.scaling_preset),
            ("seed", &self.seed),
            ("out_dir", &self.out_dir),
            ("ks_reps", &self.ks_reps),
            ("lb_lags", &self.lb_lags),
            ("eta", &self.eta),
            ("threshold_fraction", &self.threshold_fraction),
        ];
        match &self.command {
            Command::Monitor { long_margin, short_margin, call_threshold } => flags.extend([
                ("long_margin", long_margin),
                ("short_margin", short_margin),
                ("call_threshold", call_threshold),
            ]),
            Command::Synth { spec } => flags.push(("spec", spec)),
            _ => {}
        }
        flags.into_iter().filter_map(|(k, v)| v.as_deref().map(|v| (k, v))).collect()
    }

    fn run_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        for (key, value) in self.overrides() {
            cfg.set(key, value).map_err(|e| CliError::Config(format!("--{}: {e}", key.replace('_', "-"))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    let cfg = cli.run_config()?;
    let mut out = Outputs::new(&cfg)?;
    if let Command::Synth { .. } = cli.command {
        commands::synth(&cfg, &mut out)?;
    } else {
        let data = pipeline::load(&cfg)?;
        match cli.command {
            Command::Ingest => commands::ingest(&cfg, &data, &mut out)?,
            Command::Stats => commands::stats(&cfg, &data, &mut out)?,
            Command::Tails => commands::tails(&cfg, &data, &mut out)?,
            Command::Garch => commands::garch(&cfg, &data, &mut out)?,
            Command::Margins => commands::margins(&cfg, &data, &mut out)?,
            Command::Compare => commands::compare(&cfg, &data, &mut out)?,
            Command::Monitor { .. } => commands::monitor(&cfg, &data, &mut out)?,
            Command::Synth { .. } => unreachable!("handled above"),
        }
    }
    out.write_all(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{f}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
