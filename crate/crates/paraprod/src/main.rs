use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use paraprod::config::ExperimentConfig;
use paraprod::experiments;
use paraprod::io;
use paraprod::weights;

#[derive(Parser)]
#[command(name = "paraprod", about = "Paraproduct and bilinear multiplier workbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct CommonFlags {
    /// TOML config file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Weight name: unit | log | log_power.
    #[arg(long)]
    weight: Option<String>,
    /// Exponent for the log_power weight.
    #[arg(long)]
    weight_alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl CommonFlags {
    fn merge(&self, mut cfg: ExperimentConfig) -> ExperimentConfig {
        if let Some(v) = self.dim {
            cfg.dim = v;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = &self.weight {
            cfg.weight = v.clone();
        }
        if let Some(v) = self.weight_alpha {
            cfg.weight_alpha = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg
    }

    fn base(&self) -> paraprod::Result<ExperimentConfig> {
        let cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        Ok(self.merge(cfg))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the admissibility axioms for a weight and print the report.
    ValidateWeights {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Run the brute-force oracle suite at small N.
    Oracle {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Run a boundedness-ratio experiment for a named inequality.
    Verify {
        #[command(flatten)]
        common: CommonFlags,
        /// thm-main | thm-main-w1 | var-coeff | cm | kato-ponce | bmo-equiv
        #[arg(long)]
        inequality: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        /// Inclusive dilation range, e.g. -3..3.
        #[arg(long, allow_hyphen_values = true)]
        dilations: Option<String>,
        /// Fractional order for kato-ponce.
        #[arg(long)]
        s: Option<f64>,
        /// CSV output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print (dilation, ratio) columns for plotting.
        #[arg(long)]
        plot_data: bool,
    },
    /// Evaluate norms of a field read from a binary or CSV container.
    Norms {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long)]
        input: PathBuf,
        /// Evaluate the full set of norms (the default and only mode).
        #[arg(long)]
        all: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run() -> paraprod::Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::ValidateWeights { common } => {
            let cfg = common.base()?;
            let w = weights::builtin_weight(&cfg.weight, Some(cfg.weight_alpha))?;
            let grid = weights::axiom_scale_grid();
            let report = weights::validate_admissible(&w, &weights::default_s_samples(), &grid)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(report.all_pass())
        }
        Command::Oracle { common } => {
            let mut cfg = common.base()?;
            if common.n.is_none() {
                cfg.n = 64;
            }
            let table = experiments::run_oracle_suite(&cfg)?;
            print!("{}", table.to_csv());
            println!("{}", table.summary_json());
            Ok(true)
        }
        Command::Verify { common, inequality, trials, dilations, s, out, plot_data } => {
            let mut cfg = common.base()?;
            if let Some(v) = inequality {
                cfg.inequality = v;
            }
            if let Some(v) = trials {
                cfg.trials = v;
            }
            if let Some(v) = dilations {
                cfg.dilations = v;
            }
            if let Some(v) = s {
                cfg.s = v;
            }
            if let Some(v) = out {
                cfg.out = Some(v);
            }
            let table = experiments::run_inequality(&cfg)?;
            match &cfg.out {
                Some(path) => table.write_csv(path)?,
                None => print!("{}", table.to_csv()),
            }
            if plot_data {
                if let Some(p) = table.plot_data("dilation", "ratio") {
                    print!("{p}");
                }
            }
            println!("{}", table.summary_json());
            Ok(true)
        }
        Command::Norms { common, input, all: _, out } => {
            let cfg = common.base()?;
            let field = io::read_field(&input)?;
            let id = input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "field".into());
            let table = experiments::norms_report(&id, &field, &cfg)?;
            match &out {
                Some(path) => table.write_csv(path)?,
                None => print!("{}", table.to_csv()),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
