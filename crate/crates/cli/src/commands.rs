use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::json;

use riesz_core::adfamily::{
    ad_set, intersection_bound, letters_for, prefixes_within, BranchSeed, LetterFamily,
};
use riesz_core::concrete::{singularity_profile, ConcreteError};
use riesz_core::dissociate::{
    enumerate_words, is_dissociate, word_count, DissociateError, DissociateOutcome, Letter,
};
use riesz_core::dualgroup::DualGroup;
use riesz_core::riesz::{convolve, ip_criterion_partial, validate_spec, RieszError, RieszSpec};
use riesz_core::spectrum::{
    natural_spectrum, naturalness_gap, unit_disc_claim, witness_pair, WitnessError, WitnessReport,
};

use crate::config::{CoeffChoice, Format, RunConfig};
use crate::CliError;

/// Rendered output of a command and the exit code it asks for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub body: String,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { code: 0, body }
    }

    fn gate(ok: bool, body: String) -> Self {
        Outcome {
            code: if ok { 0 } else { 2 },
            body,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn from_dissociate(e: DissociateError) -> CliError {
    match e {
        DissociateError::NotDissociate { .. } => CliError::Gate(e.to_string()),
        _ => usage(e),
    }
}

fn from_riesz(e: RieszError) -> CliError {
    match e {
        RieszError::NotDissociate(_) | RieszError::Invalid(_) => CliError::Gate(e.to_string()),
        RieszError::Dissociate(d) => from_dissociate(d),
        _ => usage(e),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).unwrap_or_default();
    s.push('\n');
    s
}

fn to_csv<R: Serialize>(header: Option<&[&str]>, rows: &[R]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(header.is_none())
        .from_writer(Vec::new());
    if let Some(h) = header {
        w.write_record(h).map_err(usage)?;
    }
    for r in rows {
        w.serialize(r).map_err(usage)?;
    }
    let bytes = w.into_inner().map_err(usage)?;
    String::from_utf8(bytes).map_err(usage)
}

fn display_letters(group: &DualGroup, letters: &[Letter]) -> Vec<String> {
    letters.iter().map(|l| group.display(l.element())).collect()
}

pub fn build_spec(
    group: &DualGroup,
    letters: Vec<Letter>,
    index: Vec<usize>,
    choice: CoeffChoice,
    level: usize,
) -> Result<RieszSpec, CliError> {
    match choice {
        CoeffChoice::Default => RieszSpec::default_family(group.clone(), letters, index, level),
        CoeffChoice::Constant(a) => RieszSpec::constant(group.clone(), letters, a, level),
    }
    .map_err(from_riesz)
}

pub fn cmd_dissociate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (group, letters) = cfg.resolve_letters()?;
    let outcome = is_dissociate(&group, &letters, cfg.level).map_err(usage)?;
    #[derive(Serialize)]
    struct Counterexample {
        first: String,
        second: String,
        element: String,
    }
    #[derive(Serialize)]
    struct Report {
        group: String,
        letters: Vec<String>,
        level: usize,
        verified: bool,
        words: Option<u128>,
        counterexample: Option<Counterexample>,
    }
    let verified = outcome == DissociateOutcome::Verified;
    let involutions = letters.iter().filter(|l| l.is_involution()).count();
    let counterexample = match &outcome {
        DissociateOutcome::Verified => None,
        DissociateOutcome::Counterexample {
            first,
            second,
            element,
        } => Some(Counterexample {
            first: first.describe(&group, &letters),
            second: second.describe(&group, &letters),
            element: group.display(element),
        }),
    };
    let report = Report {
        group: group.to_string(),
        letters: display_letters(&group, &letters),
        level: cfg.level,
        verified,
        words: verified.then(|| word_count(involutions, letters.len() - involutions, cfg.level)),
        counterexample,
    };
    let body = match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let ce = report.counterexample.as_ref();
            let row = (
                &report.group,
                report.letters.join(" "),
                report.level,
                report.verified,
                report.words.map(|w| w.to_string()).unwrap_or_default(),
                ce.map(|c| c.first.clone()).unwrap_or_default(),
                ce.map(|c| c.second.clone()).unwrap_or_default(),
                ce.map(|c| c.element.clone()).unwrap_or_default(),
            );
            to_csv(
                Some(&[
                    "group", "letters", "level", "verified", "words", "first", "second", "element",
                ]),
                &[row],
            )?
        }
    };
    Ok(Outcome::gate(verified, body))
}

pub fn cmd_words(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (group, letters) = cfg.resolve_letters()?;
    let words = enumerate_words(&group, &letters, cfg.level).map_err(from_dissociate)?;
    let body = match cfg.format {
        Format::Json => to_json(&json!({
            "group": group.to_string(),
            "level": cfg.level,
            "count": words.len(),
            "words": words,
        })),
        Format::Csv => {
            let rows: Vec<_> = words
                .entries()
                .iter()
                .map(|(el, w)| (group.display(el), w.len(), w.describe(&group, &letters)))
                .collect();
            to_csv(Some(&["element", "length", "word"]), &rows)?
        }
    };
    Ok(Outcome::ok(body))
}

fn family_for(
    seed: &BranchSeed,
    master: &[Letter],
    size: Option<usize>,
) -> Result<LetterFamily, CliError> {
    let n = size.unwrap_or_else(|| prefixes_within(seed, master.len() as u64));
    if n == 0 {
        return Err(CliError::Usage(format!(
            "seed {seed} selects no letter from a master list of {}",
            master.len()
        )));
    }
    let set = ad_set(seed, n).map_err(usage)?;
    letters_for(master, &set).map_err(usage)
}

fn require_seeds(cfg: &RunConfig, min: usize) -> Result<Vec<BranchSeed>, CliError> {
    let seeds = cfg.branch_seeds()?;
    if seeds.len() < min {
        return Err(CliError::Usage(format!(
            "need at least {min} seed(s), got {}",
            seeds.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for s in &seeds {
        if !seen.insert(s.to_string()) {
            return Err(CliError::Usage(format!("duplicate seed {s}")));
        }
    }
    Ok(seeds)
}

pub fn cmd_family(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (group, master) = cfg.resolve_letters()?;
    let seeds = require_seeds(cfg, 1)?;
    let families = seeds
        .iter()
        .map(|s| family_for(s, &master, cfg.size))
        .collect::<Result<Vec<_>, _>>()?;
    #[derive(Serialize)]
    struct Member {
        seed: String,
        size: usize,
        master_positions: Vec<u64>,
        letters: Vec<String>,
    }
    #[derive(Serialize)]
    struct Pair {
        alpha: String,
        beta: String,
        intersection_bound: usize,
        shared: usize,
    }
    let members: Vec<Member> = seeds
        .iter()
        .zip(&families)
        .map(|(s, f)| Member {
            seed: s.to_string(),
            size: f.letters.len(),
            master_positions: f.master_positions.clone(),
            letters: display_letters(&group, &f.letters),
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..seeds.len() {
        for j in i + 1..seeds.len() {
            let bound =
                intersection_bound(&seeds[i], &seeds[j], riesz_core::adfamily::DEFAULT_HORIZON)
                    .map_err(usage)?;
            let shared = families[i]
                .master_positions
                .iter()
                .filter(|p| families[j].master_positions.contains(p))
                .count();
            pairs.push(Pair {
                alpha: seeds[i].to_string(),
                beta: seeds[j].to_string(),
                intersection_bound: bound,
                shared,
            });
        }
    }
    let body = match cfg.format {
        Format::Json => to_json(&json!({
            "group": group.to_string(),
            "master_letters": master.len(),
            "members": members,
            "pairs": pairs,
        })),
        Format::Csv => {
            let rows: Vec<_> = members
                .iter()
                .map(|m| {
                    let pos: Vec<String> = m.master_positions.iter().map(u64::to_string).collect();
                    (&m.seed, m.size, pos.join(" "), m.letters.join(" "))
                })
                .collect();
            to_csv(
                Some(&["seed", "size", "master_positions", "letters"]),
                &rows,
            )?
        }
    };
    Ok(Outcome::ok(body))
}

pub fn cmd_coeffs(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (group, letters) = cfg.resolve_letters()?;
    let index: Vec<usize> = (1..=letters.len()).collect();
    let spec = build_spec(
        &group,
        letters,
        index.clone(),
        cfg.coeff_choice()?,
        cfg.level,
    )?;
    let violations = validate_spec(&spec);
    #[derive(Serialize)]
    struct Row {
        letter: String,
        index: usize,
        involution: bool,
        re: f64,
        im: f64,
    }
    let rows: Vec<Row> = spec
        .letters()
        .iter()
        .zip(spec.coeffs())
        .zip(&index)
        .map(|((l, a), &b)| Row {
            letter: group.display(l.element()),
            index: b,
            involution: l.is_involution(),
            re: a.re,
            im: a.im,
        })
        .collect();
    let body = match cfg.format {
        Format::Json => to_json(&json!({
            "group": group.to_string(),
            "rule": spec.rule(),
            "level": spec.level(),
            "hermitian": spec.is_hermitian(),
            "coefficients": rows,
            "violations": violations,
        })),
        Format::Csv => to_csv(None, &rows)?,
    };
    Ok(Outcome::gate(violations.is_empty(), body))
}

pub fn cmd_convolve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (group, master) = cfg.resolve_letters()?;
    let seeds = require_seeds(cfg, 2)?;
    let choice = cfg.coeff_choice()?;
    let mut transforms = Vec::new();
    for s in &seeds[..2] {
        let f = family_for(s, &master, cfg.size)?;
        let spec = build_spec(&group, f.letters, f.index, choice, cfg.level)?;
        transforms.push(spec.truncated_transform(cfg.level).map_err(from_riesz)?);
    }
    let product = convolve(&transforms[0], &transforms[1]).map_err(from_riesz)?;
    let body = match cfg.format {
        Format::Json => to_json(&product),
        Format::Csv => {
            let rows: Vec<_> = product
                .values()
                .iter()
                .map(|(el, v)| (group.display(el), v.re, v.im))
                .collect();
            to_csv(Some(&["element", "re", "im"]), &rows)?
        }
    };
    Ok(Outcome::ok(body))
}

pub fn cmd_profile(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.k_max > cfg.cap {
        return Err(CliError::Usage(format!(
            "level {} exceeds the cap {}",
            cfg.k_max, cfg.cap
        )));
    }
    let (group, mut letters) = cfg.resolve_letters()?;
    if letters.len() < cfg.k_max {
        return Err(CliError::Usage(format!(
            "level {} needs {} letters, master has {}",
            cfg.k_max,
            cfg.k_max,
            letters.len()
        )));
    }
    letters.truncate(cfg.k_max);
    let level = cfg.level.min(letters.len());
    let index: Vec<usize> = (1..=letters.len()).collect();
    let spec = build_spec(&group, letters, index, cfg.coeff_choice()?, level)?;
    let rows =
        singularity_profile(&spec, cfg.k_min..=cfg.k_max, cfg.n, cfg.m, cfg.cap).map_err(|e| {
            match e {
                ConcreteError::Riesz(r) => from_riesz(r),
                other => usage(other),
            }
        })?;
    #[derive(Serialize)]
    struct Row {
        k: usize,
        n: u32,
        m: u32,
        tv_distance: f64,
        ip_partial: f64,
    }
    let rows = rows
        .into_iter()
        .map(|r| {
            Ok(Row {
                k: r.k,
                n: r.n,
                m: r.m,
                tv_distance: r.tv_distance,
                ip_partial: ip_criterion_partial(&spec, r.k, cfg.n).map_err(from_riesz)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let body = match cfg.format {
        Format::Json => to_json(&json!({
            "group": group.to_string(),
            "rule": spec.rule(),
            "rows": rows,
        })),
        Format::Csv => to_csv(None, &rows)?,
    };
    Ok(Outcome::ok(body))
}

/// Certificates for every unordered seed pair, in `(i, j)` order with `i < j`.
pub fn witness_reports(cfg: &RunConfig) -> Result<Vec<WitnessReport>, CliError> {
    let seeds = require_seeds(cfg, 2)?;
    let params = cfg.witness_params();
    params.check().map_err(usage)?;
    let (group, master) = cfg.resolve_letters()?;
    if let DissociateOutcome::Counterexample { first, second, .. } =
        is_dissociate(&group, &master, cfg.level).map_err(usage)?
    {
        return Err(CliError::Gate(format!(
            "master list is not dissociate at length {}: {} = {}",
            cfg.level,
            first.describe(&group, &master),
            second.describe(&group, &master)
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..seeds.len())
        .flat_map(|i| (i + 1..seeds.len()).map(move |j| (i, j)))
        .collect();
    let results: Mutex<Vec<Option<Result<WitnessReport, WitnessError>>>> =
        Mutex::new(vec![None; pairs.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..cfg.jobs.min(pairs.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, j)) = pairs.get(k) else { break };
                let r = witness_pair(&seeds[i], &seeds[j], &group, &master, cfg.level, &params);
                if let Ok(mut slots) = results.lock() {
                    slots[k] = Some(r);
                }
            });
        }
    });
    let slots = results.into_inner().map_err(|_| usage("worker panicked"))?;
    slots
        .into_iter()
        .map(|r| match r {
            Some(Ok(rep)) => Ok(rep),
            Some(Err(WitnessError::Riesz(e))) => Err(from_riesz(e)),
            Some(Err(WitnessError::Dissociate(e))) => Err(from_dissociate(e)),
            Some(Err(e)) => Err(usage(e)),
            None => Err(usage("missing pair result")),
        })
        .collect()
}

pub fn cmd_witness(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let reports = witness_reports(cfg)?;
    let all = reports.iter().all(|r| r.conclusion.is_certified());
    let body = match cfg.format {
        Format::Json => to_json(&reports),
        Format::Csv => {
            let rows: Vec<_> = reports
                .iter()
                .map(|r| {
                    let (status, reason) = match &r.conclusion {
                        riesz_core::spectrum::Conclusion::Certified => ("certified", String::new()),
                        riesz_core::spectrum::Conclusion::Failed(why) => ("failed", why.clone()),
                    };
                    (
                        r.seed_alpha.to_string(),
                        r.seed_beta.to_string(),
                        r.level,
                        r.shared_letters,
                        r.product_support_size,
                        r.product_support_bound.to_string(),
                        r.gamma_min_distance,
                        status,
                        reason,
                        &r.content_hash,
                    )
                })
                .collect();
            to_csv(
                Some(&[
                    "seed_alpha",
                    "seed_beta",
                    "level",
                    "shared_letters",
                    "product_support_size",
                    "product_support_bound",
                    "gamma_min_distance",
                    "status",
                    "reason",
                    "content_hash",
                ]),
                &rows,
            )?
        }
    };
    Ok(Outcome::gate(all, body))
}

pub fn cmd_gap(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (group, master) = cfg.resolve_letters()?;
    let seeds = cfg.branch_seeds()?;
    let (letters, index) = match seeds.first() {
        Some(s) => {
            let f = family_for(s, &master, cfg.size)?;
            (f.letters, f.index)
        }
        None => {
            let n = master.len();
            (master, (1..=n).collect())
        }
    };
    let terms = letters.len();
    let spec = build_spec(&group, letters, index, cfg.coeff_choice()?, cfg.level)?;
    let transform = spec.truncated_transform(cfg.level).map_err(from_riesz)?;
    let estimate = natural_spectrum(&transform);
    let gap = naturalness_gap(&estimate);
    let premises = unit_disc_claim(&spec, terms, 3).map_err(from_riesz)?;
    let body = match cfg.format {
        Format::Json => to_json(&json!({
            "group": group.to_string(),
            "letters": terms,
            "level": cfg.level,
            "support_size": transform.len(),
            "points": estimate.points.len(),
            "includes_zero": estimate.includes_zero,
            "real": estimate.is_real(),
            "min": estimate.points.first().map(|p| p.re),
            "max": estimate.points.last().map(|p| p.re),
            "gap": gap,
            "premises": premises,
        })),
        Format::Csv => to_csv(
            Some(&[
                "letters",
                "level",
                "points",
                "includes_zero",
                "real",
                "gap",
                "claim",
            ]),
            &[(
                terms,
                cfg.level,
                estimate.points.len(),
                estimate.includes_zero,
                estimate.is_real(),
                gap,
                serde_json::to_value(premises.conclusion)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
            )],
        )?,
    };
    Ok(Outcome::ok(body))
}
