//! Spectral bookkeeping and separation certificates.
//!
//! Nothing here computes a spectrum or a multiplicative functional. The
//! operations collect finite, checkable facts: the range of a truncated
//! transform, its distance from a point off the real axis, the disc arithmetic
//! showing two small balls around `z₀` multiply into a ball around `z₀²`, and
//! the finiteness of the support of `μ̂_α · μ̂_β`. [`witness_pair`] bundles these
//! into a [`WitnessReport`] for one pair of branches.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::adfamily::{
    ad_set, intersection_bound, letters_for, prefixes_within, BranchSeed, FamilyError,
    DEFAULT_HORIZON,
};
use crate::concrete::{eval_cantor, eval_circle, singularity_profile, CircleGrid, ProfileRow};
use crate::dissociate::{
    enumerate_words, is_dissociate, shared_letters, union_letters, word_count,
    word_intersection_check, DissociateError, DissociateOutcome, IntersectionOutcome, Letter,
};
use crate::dualgroup::DualGroup;
use crate::riesz::{
    convolve, ip_criterion_partial, validate_spec, RieszError, RieszSpec, SparseTransform, Support,
};

/// Points on the boundary circle of the disc mesh.
pub const DISC_BOUNDARY_POINTS: usize = 4096;
/// Concentric rings of the disc mesh, not counting the centre.
pub const DISC_RINGS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("radius must be positive, got {0}")]
    Radius(f64),
    #[error("{0} lies outside the closed unit disc")]
    OutsideDisc(Complex64),
    #[error("{point} is not within {r} of {z0}")]
    OutsideBall {
        point: Complex64,
        z0: Complex64,
        r: f64,
    },
    #[error("transform takes the non-real value {0}")]
    NotReal(Complex64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Riesz(#[from] RieszError),
    #[error(transparent)]
    Dissociate(#[from] DissociateError),
    #[error("radius {r} must lie in (0, Im z0 = {im})")]
    RadiusGate { r: f64, im: f64 },
    #[error("z0 = {0} must lie in the closed unit disc")]
    CentreOutsideDisc(Complex64),
    #[error("seed {0} selects no letter from a master list of {1}")]
    EmptyFamily(String, usize),
    #[error("word length bound must be at least 1")]
    ZeroLevel,
}

/// Finite stand-in for a spectrum: the value set of a transform, plus 0 when
/// the transform is a truncation of an infinitely supported one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEstimate {
    pub points: Vec<Complex64>,
    pub includes_zero: bool,
}

impl SpectrumEstimate {
    pub fn is_real(&self) -> bool {
        self.points.iter().all(|p| p.im == 0.0)
    }
}

/// Distinct values of `t`, sorted by real then imaginary part.
pub fn natural_spectrum(t: &SparseTransform) -> SpectrumEstimate {
    let mut points: Vec<Complex64> = t.values().values().copied().collect();
    points.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    points.dedup();
    SpectrumEstimate {
        points,
        includes_zero: matches!(t.support(), Support::Truncated { .. }),
    }
}

/// `(1+i)/√2`, whose square is `i`.
pub fn default_z0() -> Complex64 {
    Complex64::new(
        std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::FRAC_1_SQRT_2,
    )
}

pub const DEFAULT_RADIUS: f64 = 0.1;

/// For `x, y` in the closed unit disc within `r` of `z₀`, checks `|xy − z₀²| < 2r`.
///
/// Precondition failures are errors; the returned boolean is the inequality.
pub fn disc_lemma_check(
    x: Complex64,
    y: Complex64,
    z0: Complex64,
    r: f64,
) -> Result<bool, SpectrumError> {
    if r.is_nan() || r <= 0.0 {
        return Err(SpectrumError::Radius(r));
    }
    for p in [x, y, z0] {
        if p.norm() > 1.0 {
            return Err(SpectrumError::OutsideDisc(p));
        }
    }
    for p in [x, y] {
        if (p - z0).norm() >= r {
            return Err(SpectrumError::OutsideBall { point: p, z0, r });
        }
    }
    Ok((x * y - z0 * z0).norm() < 2.0 * r)
}

/// A point drawn uniformly from the part of the open ball `B(z₀, r)` inside the closed unit disc.
pub fn sample_admissible<R: Rng>(rng: &mut R, z0: Complex64, r: f64) -> Complex64 {
    loop {
        let rho = r * rng.gen::<f64>().sqrt();
        let phi = rng.gen::<f64>() * std::f64::consts::TAU;
        let p = z0 + Complex64::from_polar(rho, phi);
        if p.norm() <= 1.0 && (p - z0).norm() < r {
            return p;
        }
    }
}

/// Smallest distance from `z0` to a value of the real-valued transform `t`.
pub fn gamma_avoidance(t: &SparseTransform, z0: Complex64) -> Result<f64, SpectrumError> {
    t.values().values().try_fold(f64::INFINITY, |m, v| {
        if v.im != 0.0 {
            Err(SpectrumError::NotReal(*v))
        } else {
            Ok(m.min((v - z0).norm()))
        }
    })
}

/// Hausdorff distance between `est ∪ {0}` and the closed unit disc, the disc
/// being sampled on a fixed polar mesh.
pub fn naturalness_gap(est: &SpectrumEstimate) -> f64 {
    let mut pts = est.points.clone();
    pts.push(Complex64::new(0.0, 0.0));
    let outside = pts
        .iter()
        .map(|p| (p.norm() - 1.0).max(0.0))
        .fold(0.0, f64::max);

    let real = pts.iter().all(|p| p.im == 0.0);
    let buckets = Buckets::new(if real { &[] } else { &pts });
    let mut reals: Vec<f64> = pts.iter().map(|p| p.re).collect();
    reals.sort_by(f64::total_cmp);
    let dist = |z: Complex64| -> f64 {
        if real {
            let i = reals.partition_point(|&x| x < z.re);
            let mut best = f64::INFINITY;
            for j in [i.wrapping_sub(1), i] {
                if let Some(&x) = reals.get(j) {
                    best = best.min((z.re - x).hypot(z.im));
                }
            }
            best
        } else {
            buckets.nearest(z)
        }
    };

    let mut cover = dist(Complex64::new(0.0, 0.0));
    for ring in 1..=DISC_RINGS {
        let rho = ring as f64 / DISC_RINGS as f64;
        for k in 0..DISC_BOUNDARY_POINTS {
            let theta = std::f64::consts::TAU * k as f64 / DISC_BOUNDARY_POINTS as f64;
            cover = cover.max(dist(Complex64::from_polar(rho, theta)));
        }
    }
    cover.max(outside)
}

/// Uniform grid of point buckets for nearest-point queries.
struct Buckets {
    origin: Complex64,
    cell: f64,
    side: usize,
    cells: Vec<Vec<Complex64>>,
}

impl Buckets {
    fn new(points: &[Complex64]) -> Self {
        let (mut lo, mut hi) = (Complex64::new(-1.0, -1.0), Complex64::new(1.0, 1.0));
        for p in points {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let side = ((points.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let cell = (hi.re - lo.re).max(hi.im - lo.im) / side as f64 * (1.0 + 1e-9);
        let mut cells = vec![Vec::new(); side * side];
        let mut b = Buckets {
            origin: lo,
            cell,
            side,
            cells: Vec::new(),
        };
        for p in points {
            let (i, j) = b.locate(*p);
            cells[i * side + j].push(*p);
        }
        b.cells = cells;
        b
    }

    fn locate(&self, z: Complex64) -> (usize, usize) {
        let clamp = |v: f64| (v.max(0.0) as usize).min(self.side - 1);
        (
            clamp(((z.re - self.origin.re) / self.cell).floor()),
            clamp(((z.im - self.origin.im) / self.cell).floor()),
        )
    }

    fn nearest(&self, z: Complex64) -> f64 {
        let (ci, cj) = self.locate(z);
        let mut best = f64::INFINITY;
        for ring in 0..self.side {
            // every unvisited point is at least (ring - 1) cells away
            if best <= (ring as f64 - 1.0).max(0.0) * self.cell {
                break;
            }
            let (i0, i1) = (ci.saturating_sub(ring), (ci + ring).min(self.side - 1));
            let (j0, j1) = (cj.saturating_sub(ring), (cj + ring).min(self.side - 1));
            for i in i0..=i1 {
                for j in j0..=j1 {
                    let on_ring = i.abs_diff(ci) == ring || j.abs_diff(cj) == ring;
                    if !on_ring {
                        continue;
                    }
                    for p in &self.cells[i * self.side + j] {
                        best = best.min((z - p).norm());
                    }
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscClaim {
    /// Premises hold on the evidence gathered; the spectrum is the closed
    /// unit disc provided the independent-powers criterion diverges.
    ClosedUnitDiscConditional,
    /// Criterion partial sums vanish, so independent powers are not evidenced.
    PremisesNotEvidenced,
    /// Transform is not real-valued or the spec is not a probability measure.
    Withheld,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionSums {
    pub n: u32,
    pub half_terms: usize,
    pub at_half: f64,
    pub terms: usize,
    pub at_full: f64,
}

/// Evidence for the premises of the full-disc spectrum statement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PremiseRecord {
    pub hermitian: bool,
    pub probability: bool,
    pub density_checked: bool,
    pub ip_partial: Vec<CriterionSums>,
    pub ip_increasing: bool,
    pub singularity_excerpt: Vec<ProfileRow>,
    pub conclusion: DiscClaim,
    pub statement: String,
}

/// Collects hermiticity, positivity and criterion evidence for `spec`. The
/// spectrum itself is never computed; the conclusion is conditional.
pub fn unit_disc_claim(
    spec: &RieszSpec,
    terms: usize,
    n_max: u32,
) -> Result<PremiseRecord, RieszError> {
    let hermitian = spec.is_hermitian();
    let valid = validate_spec(spec).is_empty();
    let mut density_checked = false;
    let mut nonnegative = true;
    let mut singularity_excerpt = Vec::new();
    let cantor = spec.group().is_sum_order_two()
        && spec
            .letters()
            .iter()
            .all(|l| l.element().basis_index().is_some());
    if valid && hermitian && cantor {
        let k = spec.letters().len().min(12);
        if let Ok(d) = eval_cantor(spec, k, 1, k) {
            density_checked = true;
            nonnegative = d.min() >= -1e-9;
        }
        if k >= 1 {
            singularity_excerpt = singularity_profile(spec, 1..=k, 1, 2, k).unwrap_or_default();
        }
    } else if valid && spec.group().is_integers() {
        let take: Vec<usize> = (0..spec.letters().len().min(4)).collect();
        let span: Option<u64> = take
            .iter()
            .map(|&i| spec.letters()[i].element().as_i64().map(i64::unsigned_abs))
            .sum();
        if let Some(span) = span.filter(|&s| s < 1 << 18) {
            let grid = CircleGrid::new(((2 * span + 2) as usize).next_power_of_two())
                .map_err(|_| RieszError::NotHermitian)?;
            if let Ok(d) = eval_circle(spec, &take, grid) {
                density_checked = true;
                nonnegative = d.min() >= -1e-9;
            }
        }
    }
    let probability = valid && nonnegative;

    let half = terms.div_ceil(2);
    let mut ip_partial = Vec::new();
    for n in 1..=n_max {
        ip_partial.push(CriterionSums {
            n,
            half_terms: half,
            at_half: ip_criterion_partial(spec, half, n)?,
            terms,
            at_full: ip_criterion_partial(spec, terms, n)?,
        });
    }
    let ip_increasing = !ip_partial.is_empty() && ip_partial.iter().all(|s| s.at_full > s.at_half);
    let vanishing = ip_partial.iter().all(|s| s.at_full == 0.0);

    let conclusion = if !hermitian || !probability {
        DiscClaim::Withheld
    } else if vanishing {
        DiscClaim::PremisesNotEvidenced
    } else {
        DiscClaim::ClosedUnitDiscConditional
    };
    let statement = match conclusion {
        DiscClaim::ClosedUnitDiscConditional => {
            "spectrum = closed unit disc, asserted conditionally on divergence of the independent-powers criterion"
        }
        DiscClaim::PremisesNotEvidenced => {
            "criterion partial sums vanish; premises of the full-disc statement not evidenced"
        }
        DiscClaim::Withheld => "claim withheld: transform is not real-valued or not a probability measure",
    };
    Ok(PremiseRecord {
        hermitian,
        probability,
        density_checked,
        ip_partial,
        ip_increasing,
        singularity_excerpt,
        conclusion,
        statement: statement.into(),
    })
}

/// Configuration shared by all witness pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessParams {
    pub z0: Complex64,
    pub r: f64,
    /// Random admissible pairs fed to [`disc_lemma_check`].
    pub samples: usize,
    pub sample_seed: u64,
    pub horizon: usize,
}

impl Default for WitnessParams {
    fn default() -> Self {
        WitnessParams {
            z0: default_z0(),
            r: DEFAULT_RADIUS,
            samples: 10_000,
            sample_seed: 0,
            horizon: DEFAULT_HORIZON,
        }
    }
}

impl WitnessParams {
    pub fn check(&self) -> Result<(), WitnessError> {
        if self.z0.norm() > 1.0 {
            return Err(WitnessError::CentreOutsideDisc(self.z0));
        }
        if !(self.r > 0.0 && self.r < self.z0.im.abs()) {
            return Err(WitnessError::RadiusGate {
                r: self.r,
                im: self.z0.im.abs(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscLemmaRecord {
    pub z0_re: f64,
    pub z0_im: f64,
    pub z0_on_unit_circle: bool,
    pub r: f64,
    pub samples: usize,
    pub sample_seed: u64,
    pub violations: usize,
    pub verified: bool,
}

/// Outcome of a witness; failures carry a machine-readable reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Conclusion {
    Certified,
    Failed(String),
}

impl Conclusion {
    pub fn is_certified(&self) -> bool {
        matches!(self, Conclusion::Certified)
    }
}

/// Finite facts certifying that the balls `{|μ̂_α(φ) − z₀| < r}` and
/// `{|μ̂_β(φ) − z₀| < r}` cannot meet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub seed_alpha: BranchSeed,
    pub seed_beta: BranchSeed,
    pub level: usize,
    pub master_letters: usize,
    pub master_positions_alpha: Vec<u64>,
    pub master_positions_beta: Vec<u64>,
    pub intersection_bound: usize,
    pub shared_letters: usize,
    pub union_dissociate: bool,
    pub word_sets_intersect_as_shared: bool,
    pub product_support_size: usize,
    pub product_support_bound: u128,
    pub product_mass: f64,
    pub hermitian: bool,
    pub gamma_min_distance: f64,
    pub disc_lemma: DiscLemmaRecord,
    pub ip_partial: f64,
    pub conclusion: Conclusion,
    pub content_hash: String,
}

impl WitnessReport {
    fn seal(mut self) -> Self {
        self.content_hash.clear();
        let bytes = serde_json::to_vec(&self).unwrap_or_default();
        self.content_hash = format!("{:x}", Sha256::digest(bytes));
        self
    }

    /// Recomputes the hash over every other field.
    pub fn hash_is_consistent(&self) -> bool {
        self.clone().seal().content_hash == self.content_hash
    }
}

/// Runs the disc-lemma sampler; returns the number of violations.
pub fn disc_lemma_sweep(
    z0: Complex64,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<usize, SpectrumError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = usize::from(!disc_lemma_check(z0, z0, z0, r)?);
    for _ in 0..samples {
        let x = sample_admissible(&mut rng, z0, r);
        let y = sample_admissible(&mut rng, z0, r);
        if !disc_lemma_check(x, y, z0, r)? {
            violations += 1;
        }
    }
    Ok(violations)
}

/// Builds the certificate for the branches `alpha` and `beta` over a master
/// enumeration assumed dissociate at word length `level`.
pub fn witness_pair(
    alpha: &BranchSeed,
    beta: &BranchSeed,
    group: &DualGroup,
    master: &[Letter],
    level: usize,
    params: &WitnessParams,
) -> Result<WitnessReport, WitnessError> {
    if level == 0 {
        return Err(WitnessError::ZeroLevel);
    }
    params.check()?;
    let bound = intersection_bound(alpha, beta, params.horizon)?;

    let family = |seed: &BranchSeed| -> Result<_, WitnessError> {
        let n = prefixes_within(seed, master.len() as u64);
        if n == 0 {
            return Err(WitnessError::EmptyFamily(seed.to_string(), master.len()));
        }
        Ok(letters_for(master, &ad_set(seed, n)?)?)
    };
    let fa = family(alpha)?;
    let fb = family(beta)?;

    let union = union_letters(&fa.letters, &fb.letters);
    let union_dissociate = is_dissociate(group, &union, level)? == DissociateOutcome::Verified;
    let shared = shared_letters(&fa.letters, &fb.letters);

    let mut report = WitnessReport {
        seed_alpha: alpha.clone(),
        seed_beta: beta.clone(),
        level,
        master_letters: master.len(),
        master_positions_alpha: fa.master_positions.clone(),
        master_positions_beta: fb.master_positions.clone(),
        intersection_bound: bound,
        shared_letters: shared.len(),
        union_dissociate,
        word_sets_intersect_as_shared: false,
        product_support_size: 0,
        product_support_bound: 0,
        product_mass: 0.0,
        hermitian: false,
        gamma_min_distance: 0.0,
        disc_lemma: DiscLemmaRecord {
            z0_re: params.z0.re,
            z0_im: params.z0.im,
            z0_on_unit_circle: (params.z0.norm() - 1.0).abs() < 1e-12,
            r: params.r,
            samples: params.samples,
            sample_seed: params.sample_seed,
            violations: 0,
            verified: false,
        },
        ip_partial: 0.0,
        conclusion: Conclusion::Certified,
        content_hash: String::new(),
    };
    if !union_dissociate {
        report.conclusion = Conclusion::Failed("union_not_dissociate".into());
        return Ok(report.seal());
    }

    report.word_sets_intersect_as_shared = matches!(
        word_intersection_check(group, &fa.letters, &fb.letters, level)?,
        IntersectionOutcome::Equal { .. }
    );

    let spec_a = RieszSpec::default_family(group.clone(), fa.letters, fa.index, level)?;
    let spec_b = RieszSpec::default_family(group.clone(), fb.letters, fb.index, level)?;
    let ta = spec_a.truncated_transform(level)?;
    let tb = spec_b.truncated_transform(level)?;
    let product = convolve(&ta, &tb)?;

    let involutions = shared.iter().filter(|l| l.is_involution()).count();
    report.product_support_bound = word_count(involutions, shared.len() - involutions, level);
    debug_assert_eq!(
        report.product_support_bound,
        enumerate_words(group, &shared, level)
            .map(|w| w.len() as u128)
            .unwrap_or(0)
    );
    report.product_support_size = product.len();
    report.product_mass = product.mass().re;
    report.hermitian = spec_a.is_hermitian() && spec_b.is_hermitian();
    report.gamma_min_distance = gamma_avoidance(&product, params.z0).unwrap_or(f64::NAN);
    let violations = disc_lemma_sweep(params.z0, params.r, params.samples, params.sample_seed)
        .unwrap_or(usize::MAX);
    report.disc_lemma.violations = violations;
    report.disc_lemma.verified = violations == 0;
    report.ip_partial = ip_criterion_partial(&spec_a, spec_a.letters().len(), 1)?
        .min(ip_criterion_partial(&spec_b, spec_b.letters().len(), 1)?);

    let gates: [(bool, &str); 6] = [
        (
            report.word_sets_intersect_as_shared,
            "word_set_intersection_mismatch",
        ),
        (
            report.product_support_size as u128 <= report.product_support_bound,
            "product_support_exceeds_bound",
        ),
        (
            report.shared_letters <= bound,
            "shared_letters_exceed_bound",
        ),
        (report.hermitian, "not_hermitian"),
        (report.gamma_min_distance > params.r, "gamma_within_radius"),
        (report.disc_lemma.verified, "disc_lemma_failed"),
    ];
    if let Some((_, reason)) = gates.iter().find(|(ok, _)| !ok) {
        report.conclusion = Conclusion::Failed((*reason).into());
    }
    Ok(report.seal())
}
