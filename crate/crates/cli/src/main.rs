//! `dynpat`: config-driven batch runs over dynamically generated patterns.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dynpat::pattern::{Frequency, PatternKind};

use commands::{Failure, Outcome};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "dynpat", version, about = "Patterns, spectra, gap labels and edge spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the pattern spec and write its points.
    Generate,
    /// Periodic-approximant spectra and gaps over all p/q with q <= q_max.
    Butterfly,
    /// Fit integer gap labels to the gaps of the approximant.
    Labels {
        /// Label every frequency of the butterfly sweep instead of the configured one.
        #[arg(long)]
        sweep: bool,
    },
    /// Boundary spectrum of a bundle of half-space cuts.
    Edge,
    /// Stroboscopic spacing tuples of the pattern.
    Hull,
    /// Run the invariant self-tests.
    Check,
}

#[derive(Args)]
struct Overrides {
    /// TOML file with [pattern] [hopping] [sweep] [gap] [edge] [hull] [output] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Thread count, `auto` or `sequential`.
    #[arg(long, global = true)]
    parallelism: Option<String>,

    #[arg(long, global = true, value_parser = parse_kind)]
    kind: Option<PatternKind>,
    /// Comma-separated frequencies, each `p/q` or a decimal.
    #[arg(long, global = true, value_delimiter = ',')]
    alpha: Option<Vec<Frequency>>,
    #[arg(long, global = true)]
    r: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    omega: Option<Vec<f64>>,

    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    cutoff: Option<f64>,

    #[arg(long, global = true)]
    q_max: Option<u64>,
    #[arg(long, global = true)]
    size_floor: Option<usize>,
    #[arg(long, global = true)]
    omega_samples: Option<usize>,

    #[arg(long, global = true)]
    min_width: Option<f64>,
    #[arg(long, global = true)]
    max_coeff: Option<i64>,
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[arg(long, global = true)]
    cuts: Option<usize>,
    #[arg(long, global = true)]
    width: Option<usize>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    cut_axis: Option<usize>,

    #[arg(long, global = true)]
    depth: Option<usize>,
}

fn parse_kind(s: &str) -> Result<PatternKind, String> {
    PatternKind::ALL
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| {
            let names: Vec<&str> = PatternKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown kind {s:?}, expected one of {}", names.join(", "))
        })
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Overrides {
    fn resolve(self) -> Outcome<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        set(&mut c.output.dir, self.out);
        set(&mut c.seed, self.seed);
        set(&mut c.sweep.parallelism, self.parallelism);
        set(&mut c.pattern.kind, self.kind);
        set(&mut c.pattern.alpha, self.alpha);
        set(&mut c.pattern.r, self.r);
        set(&mut c.pattern.omega, self.omega);
        set(&mut c.hopping.beta, self.beta);
        set(&mut c.hopping.cutoff, self.cutoff);
        set(&mut c.sweep.q_max, self.q_max);
        set(&mut c.sweep.size_floor, self.size_floor);
        set(&mut c.sweep.omega_samples, self.omega_samples);
        set(&mut c.gap.min_width, self.min_width);
        set(&mut c.gap.max_coeff, self.max_coeff);
        set(&mut c.gap.tol, self.tol);
        set(&mut c.edge.cuts, self.cuts);
        set(&mut c.edge.width, self.width);
        set(&mut c.edge.epsilon, self.epsilon);
        set(&mut c.edge.cut_axis, self.cut_axis);
        set(&mut c.hull.depth, self.depth);
        c.parallelism()?;
        if c.pattern.alpha.len() > c.pattern.kind.label_dim() {
            c.pattern.alpha.truncate(c.pattern.kind.label_dim());
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> Outcome<bool> {
    let config = cli.common.resolve()?;
    match cli.command {
        Command::Generate => commands::generate_cmd(&config).map(|_| true),
        Command::Butterfly => commands::butterfly_cmd(&config).map(|_| true),
        Command::Labels { sweep } => commands::labels_cmd(&config, sweep).map(|_| true),
        Command::Edge => commands::edge_cmd(&config).map(|_| true),
        Command::Hull => commands::hull_cmd(&config).map(|_| true),
        Command::Check => commands::check_cmd(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: invariant checks failed");
            ExitCode::from(1)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
