use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use riesz_core::adfamily::BranchSeed;
use riesz_core::concrete::DEFAULT_CANTOR_CAP;
use riesz_core::dissociate::{lacunary_letters, rademacher_letters, Letter};
use riesz_core::dualgroup::DualGroup;
use riesz_core::spectrum::{default_z0, WitnessParams, DEFAULT_RADIUS};

use crate::CliError;

pub const MAX_LEVEL: usize = 16;
pub const MAX_MASTER: usize = 4096;
pub const MAX_SAMPLES: usize = 100_000_000;
pub const MAX_JOBS: usize = 256;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Letters every command draws from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MasterRule {
    /// `base^1, …, base^count` in ℤ.
    Lacunary { base: u32, count: usize },
    /// `e_1, …, e_count` in ⊕ℤ₂.
    Rademacher { count: usize },
}

impl MasterRule {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("cannot parse master rule {text:?}"));
        let mut words = text.split_whitespace();
        let kind = words.next().ok_or_else(bad)?;
        let mut base = None;
        let mut count = None;
        for w in words {
            let (key, value) = w.split_once('=').ok_or_else(bad)?;
            match key {
                "base" => base = Some(value.parse::<u32>().map_err(|_| bad())?),
                "count" => count = Some(value.parse::<usize>().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        let count = count.ok_or_else(bad)?;
        if count == 0 || count > MAX_MASTER {
            return Err(CliError::Usage(format!(
                "master count must be between 1 and {MAX_MASTER}, got {count}"
            )));
        }
        match kind {
            "lacunary" => {
                let base = base.unwrap_or(3);
                if base < 3 {
                    return Err(CliError::Usage(format!(
                        "lacunary base must be at least 3, got {base}"
                    )));
                }
                Ok(MasterRule::Lacunary { base, count })
            }
            "rademacher" if base.is_none() => Ok(MasterRule::Rademacher { count }),
            _ => Err(bad()),
        }
    }

    pub fn build(&self) -> Result<(DualGroup, Vec<Letter>), CliError> {
        let built = match *self {
            MasterRule::Lacunary { base, count } => lacunary_letters(base, count),
            MasterRule::Rademacher { count } => rademacher_letters(count),
        };
        built.map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Coefficient assignment for specs built from a letter list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoeffChoice {
    Default,
    Constant(f64),
}

impl CoeffChoice {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let t = text.trim();
        if t == "default" {
            return Ok(CoeffChoice::Default);
        }
        t.strip_prefix("const=")
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .map(CoeffChoice::Constant)
            .ok_or_else(|| CliError::Usage(format!("cannot parse coefficient rule {text:?}")))
    }
}

/// Everything a run needs. Loaded from JSON, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub group: Option<String>,
    pub master: String,
    /// Explicit letters; replaces the master rule when present.
    pub letters: Option<Vec<String>>,
    /// Keep only the first `take` letters of the master list.
    pub take: Option<usize>,
    pub seeds: Vec<String>,
    /// Branch prefix count for `family`; by default every prefix inside the master list.
    pub size: Option<usize>,
    pub level: usize,
    pub coeffs: String,
    pub k_min: usize,
    pub k_max: usize,
    pub n: u32,
    pub m: u32,
    pub cap: usize,
    pub z0: [f64; 2],
    pub r: f64,
    pub samples: usize,
    pub seed: u64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let z0 = default_z0();
        RunConfig {
            group: None,
            master: "lacunary base=3 count=40".into(),
            letters: None,
            take: None,
            seeds: Vec::new(),
            size: None,
            level: 4,
            coeffs: "default".into(),
            k_min: 1,
            k_max: 12,
            n: 1,
            m: 2,
            cap: DEFAULT_CANTOR_CAP,
            z0: [z0.re, z0.im],
            r: DEFAULT_RADIUS,
            samples: 10_000,
            seed: 0,
            jobs: 1,
            out: None,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Usage(msg));
        if self.level == 0 || self.level > MAX_LEVEL {
            return fail(format!(
                "level must be between 1 and {MAX_LEVEL}, got {}",
                self.level
            ));
        }
        if self.cap == 0 || self.cap > DEFAULT_CANTOR_CAP {
            return fail(format!(
                "cap must be between 1 and {DEFAULT_CANTOR_CAP}, got {}",
                self.cap
            ));
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return fail(format!("empty level range {}..={}", self.k_min, self.k_max));
        }
        if self.n == 0 || self.m == 0 {
            return fail("convolution powers must be positive".into());
        }
        if self.samples > MAX_SAMPLES {
            return fail(format!(
                "at most {MAX_SAMPLES} samples, got {}",
                self.samples
            ));
        }
        if self.jobs == 0 || self.jobs > MAX_JOBS {
            return fail(format!(
                "jobs must be between 1 and {MAX_JOBS}, got {}",
                self.jobs
            ));
        }
        if !(self.z0[0].is_finite() && self.z0[1].is_finite() && self.r.is_finite()) {
            return fail("z0 and r must be finite".into());
        }
        if self.take == Some(0) {
            return fail("take must be positive".into());
        }
        if let Some(s) = self.size {
            if s == 0 || s > 62 {
                return fail(format!("size must be between 1 and 62, got {s}"));
            }
        }
        if self.letters.is_none() {
            MasterRule::parse(&self.master)?;
        }
        if let Some(g) = &self.group {
            g.parse::<DualGroup>()
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        CoeffChoice::parse(&self.coeffs)?;
        self.branch_seeds()?;
        Ok(())
    }

    /// The group and letter list selected by `letters` or `master`, cut to `take`.
    pub fn resolve_letters(&self) -> Result<(DualGroup, Vec<Letter>), CliError> {
        let usage = |e: &dyn std::fmt::Display| CliError::Usage(e.to_string());
        let named: Option<DualGroup> = match &self.group {
            Some(g) => Some(g.parse().map_err(|e| usage(&e))?),
            None => None,
        };
        let (group, mut letters) = match &self.letters {
            Some(list) => {
                let group = named.unwrap_or_else(DualGroup::integers);
                let letters = list
                    .iter()
                    .map(|t| {
                        let el = group.parse_element(t).map_err(|e| usage(&e))?;
                        Letter::new(&group, el).map_err(|e| usage(&e))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                (group, letters)
            }
            None => {
                let (group, letters) = MasterRule::parse(&self.master)?.build()?;
                if let Some(g) = named.filter(|g| *g != group) {
                    return Err(CliError::Usage(format!(
                        "group {g} does not match master rule over {group}"
                    )));
                }
                (group, letters)
            }
        };
        if letters.is_empty() {
            return Err(CliError::Usage("no letters".into()));
        }
        if let Some(t) = self.take {
            letters.truncate(t);
        }
        Ok((group, letters))
    }

    pub fn branch_seeds(&self) -> Result<Vec<BranchSeed>, CliError> {
        self.seeds
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|e: riesz_core::adfamily::FamilyError| CliError::Usage(e.to_string()))
            })
            .collect()
    }

    pub fn coeff_choice(&self) -> Result<CoeffChoice, CliError> {
        CoeffChoice::parse(&self.coeffs)
    }

    pub fn witness_params(&self) -> WitnessParams {
        WitnessParams {
            z0: Complex64::new(self.z0[0], self.z0[1]),
            r: self.r,
            samples: self.samples,
            sample_seed: self.seed,
            ..Default::default()
        }
    }
}

/// Splits a letter list on commas outside parentheses.
pub fn split_letters(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}
