//! Command-line driver for `riesz-core`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 a mathematical
//! gate failed (counterexample, invalid coefficients, uncertified witness).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;

pub use commands::{
    cmd_coeffs, cmd_convolve, cmd_dissociate, cmd_family, cmd_gap, cmd_profile, cmd_witness,
    cmd_words, witness_reports, Outcome,
};
pub use config::{split_letters, CoeffChoice, Format, MasterRule, RunConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Gate(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Gate(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "riesz",
    version,
    about = "Dissociate sets, Riesz products and separation witnesses"
)]
pub struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for pair-level work.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exhaustively check a letter list for dissociativity.
    Dissociate(Overrides),
    /// List the words of length at most L and their values.
    Words(Overrides),
    /// Letter families selected by branch seeds.
    Family(Overrides),
    /// Coefficients assigned to each letter, with validation.
    Coeffs(Overrides),
    /// Product of the truncated transforms of the first two seeds.
    Convolve(Overrides),
    /// Total variation distance between convolution powers over the Cantor group.
    Profile(Overrides),
    /// Separation certificates for every pair of seeds.
    Witness(Overrides),
    /// Distance between the transform range and the unit disc.
    Gap(Overrides),
}

#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// Dual group, e.g. Z, Z^2, sumZ2, sumZ(3), ZxsumZ2.
    #[arg(long)]
    pub group: Option<String>,
    /// Master letter rule, e.g. "lacunary base=3 count=40" or "rademacher count=24".
    #[arg(long)]
    pub master: Option<String>,
    /// Explicit comma-separated letters, replacing the master rule.
    #[arg(long)]
    pub letters: Option<String>,
    /// Keep only the first letters of the master list.
    #[arg(long)]
    pub take: Option<usize>,
    /// Branch seeds separated by ';', e.g. "prefix=01,period=1;prng=7".
    #[arg(long)]
    pub seeds: Option<String>,
    /// Number of branch prefixes per family.
    #[arg(long)]
    pub size: Option<usize>,
    /// Word length bound L.
    #[arg(long, short = 'L')]
    pub level: Option<usize>,
    /// Coefficient rule: "default" or "const=<a>".
    #[arg(long)]
    pub coeffs: Option<String>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long = "n")]
    pub n: Option<u32>,
    #[arg(long = "m")]
    pub m: Option<u32>,
    #[arg(long)]
    pub cap: Option<usize>,
    /// Ball centre as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<String>,
    /// Ball radius.
    #[arg(long)]
    pub r: Option<f64>,
    /// Random pairs drawn for the disc check.
    #[arg(long)]
    pub samples: Option<usize>,
}

impl Cli {
    /// The config file (or defaults) with every given flag applied.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        let o = match &self.command {
            Command::Dissociate(o)
            | Command::Words(o)
            | Command::Family(o)
            | Command::Coeffs(o)
            | Command::Convolve(o)
            | Command::Profile(o)
            | Command::Witness(o)
            | Command::Gap(o) => o,
        };
        if let Some(v) = &o.group {
            cfg.group = Some(v.clone());
        }
        if let Some(v) = &o.master {
            cfg.master = v.clone();
            cfg.letters = None;
        }
        if let Some(v) = &o.letters {
            cfg.letters = Some(split_letters(v));
        }
        if o.take.is_some() {
            cfg.take = o.take;
        }
        if let Some(v) = &o.seeds {
            cfg.seeds = v
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
        }
        if o.size.is_some() {
            cfg.size = o.size;
        }
        if let Some(v) = &o.coeffs {
            cfg.coeffs = v.clone();
        }
        if let Some(v) = &o.z0 {
            let parts: Vec<f64> = v
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage(format!("cannot parse z0 {v:?}")))?;
            let [re, im] = parts[..] else {
                return Err(CliError::Usage(format!(
                    "z0 needs two components, got {v:?}"
                )));
            };
            cfg.z0 = [re, im];
        }
        macro_rules! set {
            ($($field:ident <- $val:expr),*) => {$(if let Some(v) = $val { cfg.$field = v; })*};
        }
        set!(level <- o.level, k_min <- o.k_min, k_max <- o.k_max, n <- o.n, m <- o.m,
             cap <- o.cap, r <- o.r, samples <- o.samples, seed <- self.seed,
             jobs <- self.jobs, format <- self.format);
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs one command against a resolved configuration.
pub fn execute(command: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Dissociate(_) => cmd_dissociate(cfg),
        Command::Words(_) => cmd_words(cfg),
        Command::Family(_) => cmd_family(cfg),
        Command::Coeffs(_) => cmd_coeffs(cfg),
        Command::Convolve(_) => cmd_convolve(cfg),
        Command::Profile(_) => cmd_profile(cfg),
        Command::Witness(_) => cmd_witness(cfg),
        Command::Gap(_) => cmd_gap(cfg),
    }
}

/// Full program: parses `args`, writes the result to `--out` or `stdout`,
/// diagnostics to `stderr`, and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = cli.resolve().and_then(|cfg| {
        let outcome = execute(&cli.command, &cfg)?;
        match &cfg.out {
            Some(path) => std::fs::write(path, &outcome.body)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
            None => stdout
                .write_all(outcome.body.as_bytes())
                .map_err(|e| CliError::Usage(e.to_string()))?,
        }
        Ok(outcome.code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}
