//! Concrete densities: trigonometric polynomials sampled on the circle, exact
//! atomic densities on finite levels of the Cantor group, total variation, and
//! piecewise-linear extension of transforms from ℤ to ℝ.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use thiserror::Error;

use crate::riesz::{transform_power, validate_spec, RieszError, RieszSpec, SparseTransform};

/// Default largest Cantor level (2^24 atoms).
pub const DEFAULT_CANTOR_CAP: usize = 24;

/// Grid coefficients below this modulus are dropped.
pub const COEFFICIENT_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConcreteError {
    #[error(transparent)]
    Riesz(#[from] RieszError),
    #[error("grid size {0} is not a power of two")]
    GridSize(usize),
    #[error("grid of {grid} points aliases frequencies up to {max_frequency}")]
    Aliasing { grid: usize, max_frequency: u64 },
    #[error("circle densities need letters in Z, got group {0}")]
    NotCircle(String),
    #[error("letter {0} does not fit a machine integer")]
    FrequencyOverflow(usize),
    #[error("Cantor densities need letters e_i in sumZ2; letter {0} is not one")]
    NotRademacher(usize),
    #[error("level {k} exceeds the cap {cap}")]
    LevelCap { k: usize, cap: usize },
    #[error("level {k} exceeds the {letters} available letters")]
    TooFewLetters { k: usize, letters: usize },
    #[error("powers must differ and be positive, got {0} and {1}")]
    Powers(u32, u32),
    #[error("density vectors differ in shape")]
    ShapeMismatch,
    #[error("coefficient bounds violated")]
    Invalid,
    #[error("transform lives on {0}, expected Z")]
    NotIntegers(String),
    #[error("knot {0} lies outside [-{1}, {1}]")]
    KnotOutOfRange(i64, u64),
}

/// `n` equispaced sample points `t_j = 2πj/n` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircleGrid {
    n: usize,
}

impl CircleGrid {
    pub fn new(n: usize) -> Result<Self, ConcreteError> {
        if !n.is_power_of_two() {
            return Err(ConcreteError::GridSize(n));
        }
        Ok(CircleGrid { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Sampled or atomic density with a uniform quadrature weight.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityVector {
    pub values: Vec<f64>,
    pub weight: f64,
}

impl DensityVector {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Fixed-order pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

fn frequencies(spec: &RieszSpec, subset: &[usize]) -> Result<Vec<i64>, ConcreteError> {
    if !spec.group().is_integers() {
        return Err(ConcreteError::NotCircle(spec.group().to_string()));
    }
    subset
        .iter()
        .map(|&i| {
            spec.letters()
                .get(i)
                .ok_or(RieszError::LetterOutOfRange(i))?
                .element()
                .as_i64()
                .ok_or(ConcreteError::FrequencyOverflow(i))
        })
        .collect()
}

/// Samples `P_Φ = ∏_{θ∈Φ} (1 + 2 Re(a(θ) e^{i f_θ t}))` on the grid.
pub fn eval_circle(
    spec: &RieszSpec,
    subset: &[usize],
    grid: CircleGrid,
) -> Result<DensityVector, ConcreteError> {
    if !validate_spec(spec).is_empty() {
        return Err(ConcreteError::Invalid);
    }
    let freqs = frequencies(spec, subset)?;
    let max_frequency: u64 = freqs.iter().map(|f| f.unsigned_abs()).sum();
    if (grid.n as u64) <= 2 * max_frequency + 1 {
        return Err(ConcreteError::Aliasing {
            grid: grid.n,
            max_frequency,
        });
    }
    let coeffs: Vec<Complex64> = subset.iter().map(|&i| spec.coeffs()[i]).collect();
    let step = std::f64::consts::TAU / grid.n as f64;
    let values = (0..grid.n)
        .map(|j| {
            freqs.iter().zip(&coeffs).fold(1.0, |acc, (&f, a)| {
                // f·j mod n keeps the angle argument small and exact
                let phase = ((f * j as i64).rem_euclid(grid.n as i64)) as f64 * step;
                acc * (1.0 + 2.0 * (a * Complex64::from_polar(1.0, phase)).re)
            })
        })
        .collect();
    Ok(DensityVector {
        values,
        weight: 1.0 / grid.n as f64,
    })
}

/// Discrete Fourier coefficients `(1/n) Σ_j d(t_j) e^{−i k t_j}` keyed by signed
/// frequency, keeping moduli above [`COEFFICIENT_FLOOR`].
pub fn grid_coefficients(d: &DensityVector) -> BTreeMap<i64, Complex64> {
    let n = d.values.len();
    let mut buf: Vec<Complex64> = d.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter()
        .enumerate()
        .filter_map(|(k, c)| {
            let c = c / n as f64;
            let f = if k > n / 2 {
                k as i64 - n as i64
            } else {
                k as i64
            };
            (c.norm() > COEFFICIENT_FLOOR).then_some((f, c))
        })
        .collect()
}

/// Real coefficients of the first `k` letters, which must be distinct
/// Rademacher characters `e_i` of ⊕ℤ₂.
fn rademacher_coeffs(spec: &RieszSpec, k: usize, cap: usize) -> Result<Vec<f64>, ConcreteError> {
    if k > cap {
        return Err(ConcreteError::LevelCap { k, cap });
    }
    if k > spec.letters().len() {
        return Err(ConcreteError::TooFewLetters {
            k,
            letters: spec.letters().len(),
        });
    }
    if !spec.group().is_sum_order_two() {
        return Err(ConcreteError::NotRademacher(0));
    }
    if !spec.is_hermitian() {
        return Err(RieszError::NotHermitian.into());
    }
    if !validate_spec(spec).is_empty() {
        return Err(ConcreteError::Invalid);
    }
    spec.letters()[..k]
        .iter()
        .zip(spec.coeffs())
        .enumerate()
        .map(|(i, (l, a))| {
            l.element()
                .basis_index()
                .map(|_| a.re)
                .ok_or(ConcreteError::NotRademacher(i))
        })
        .collect()
}

fn cantor_density(coeffs: &[f64]) -> DensityVector {
    let mut values = vec![1.0];
    for &a in coeffs {
        let mut next = Vec::with_capacity(values.len() * 2);
        next.extend(values.iter().map(|v| v * (1.0 + a)));
        next.extend(values.iter().map(|v| v * (1.0 - a)));
        values = next;
    }
    DensityVector {
        weight: 1.0 / values.len() as f64,
        values,
    }
}

/// Exact density of `P^{*n}` on the `2^k` atoms of level `k`: at atom `x`,
/// `∏_{i<k} (1 + a_iⁿ χ_i(x))` with `χ_i(x) = (−1)^{bit_i(x)}`.
pub fn eval_cantor(
    spec: &RieszSpec,
    k: usize,
    n: u32,
    cap: usize,
) -> Result<DensityVector, ConcreteError> {
    rademacher_coeffs(spec, k, cap)?;
    let powered = transform_power(spec, n)?;
    let coeffs: Vec<f64> = powered.coeffs()[..k].iter().map(|a| a.re).collect();
    Ok(cantor_density(&coeffs))
}

pub fn tv_norm(d: &DensityVector) -> f64 {
    let abs: Vec<f64> = d.values.iter().map(|v| v.abs()).collect();
    d.weight * pairwise_sum(&abs)
}

pub fn tv_distance(a: &DensityVector, b: &DensityVector) -> Result<f64, ConcreteError> {
    if a.values.len() != b.values.len() || a.weight != b.weight {
        return Err(ConcreteError::ShapeMismatch);
    }
    let diff: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .collect();
    Ok(a.weight * pairwise_sum(&diff))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub k: usize,
    pub n: u32,
    pub m: u32,
    pub tv_distance: f64,
}

/// Total variation distance between `P^{*n}` and `P^{*m}` at each level in `levels`.
pub fn singularity_profile<I>(
    spec: &RieszSpec,
    levels: I,
    n: u32,
    m: u32,
    cap: usize,
) -> Result<Vec<ProfileRow>, ConcreteError>
where
    I: IntoIterator<Item = usize>,
{
    if n == m || n == 0 || m == 0 {
        return Err(ConcreteError::Powers(n, m));
    }
    levels
        .into_iter()
        .map(|k| {
            let a = eval_cantor(spec, k, n, cap)?;
            let b = eval_cantor(spec, k, m, cap)?;
            Ok(ProfileRow {
                k,
                n,
                m,
                tv_distance: tv_distance(&a, &b)?,
            })
        })
        .collect()
}

/// Piecewise-linear function on ℝ through `(j, values[j + half_width])` for
/// `|j| ≤ half_width`, and zero at every other integer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlTransform {
    pub half_width: u64,
    pub values: Vec<Complex64>,
}

/// Extends transform values given on `ℤ ∩ [−N, N]` linearly across the gaps.
pub fn pl_extend<I>(half_width: u64, values: I) -> Result<PlTransform, ConcreteError>
where
    I: IntoIterator<Item = (i64, Complex64)>,
{
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * half_width as usize + 1];
    for (j, v) in values {
        if j.unsigned_abs() > half_width {
            return Err(ConcreteError::KnotOutOfRange(j, half_width));
        }
        out[(j + half_width as i64) as usize] = v;
    }
    Ok(PlTransform {
        half_width,
        values: out,
    })
}

/// [`pl_extend`] applied to a transform on ℤ, keeping frequencies in `[−N, N]`.
pub fn pl_from_transform(
    t: &SparseTransform,
    half_width: u64,
) -> Result<PlTransform, ConcreteError> {
    if !t.group().is_integers() {
        return Err(ConcreteError::NotIntegers(t.group().to_string()));
    }
    let knots = t
        .values()
        .iter()
        .filter_map(|(el, v)| el.as_i64().map(|j| (j, *v)))
        .filter(|(j, _)| j.unsigned_abs() <= half_width);
    pl_extend(half_width, knots)
}

impl PlTransform {
    pub fn knot(&self, j: i64) -> Complex64 {
        if j.unsigned_abs() > self.half_width {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[(j + self.half_width as i64) as usize]
        }
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        let j = xi.floor();
        let s = xi - j;
        let j = j as i64;
        let lo = self.knot(j);
        if s == 0.0 {
            return lo;
        }
        lo * (1.0 - s) + self.knot(j + 1) * s
    }

    /// Interior point of `[j, j+1]` where the segment vanishes, if any.
    fn crossing(&self, j: i64) -> Option<f64> {
        let (v0, v1) = (self.knot(j), self.knot(j + 1));
        let zero = Complex64::new(0.0, 0.0);
        if v0 == zero || v1 == zero {
            return None;
        }
        let d = v1 - v0;
        let s = -v0 * d.conj() / d.norm_sqr();
        let real = s.im.abs() <= 1e-12 * s.re.abs().max(1.0);
        (real && s.re > 0.0 && s.re < 1.0).then_some(j as f64 + s.re)
    }
}

/// Evaluates the PL function at `ξ` (alias of [`PlTransform::eval`]).
pub fn pl_eval(e: &PlTransform, xi: f64) -> Complex64 {
    e.eval(xi)
}

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Maximal open intervals on which both extensions are nonzero.
pub fn pl_product_support(a: &PlTransform, b: &PlTransform) -> Vec<Interval> {
    let reach = a.half_width.max(b.half_width) as i64 + 1;
    let zero = Complex64::new(0.0, 0.0);
    let mut points: Vec<(f64, bool)> = (-reach..=reach)
        .map(|j| (j as f64, a.knot(j) != zero && b.knot(j) != zero))
        .collect();
    for j in -reach..reach {
        for e in [a, b] {
            if let Some(x) = e.crossing(j) {
                points.push((x, false));
            }
        }
    }
    points.sort_by(|x, y| x.0.total_cmp(&y.0));
    points.dedup_by(|later, earlier| {
        if later.0 == earlier.0 {
            earlier.1 &= later.1;
            true
        } else {
            false
        }
    });

    let mut out: Vec<Interval> = Vec::new();
    let mut open: Option<f64> = None;
    for w in points.windows(2) {
        let (p, p_nonzero) = w[0];
        let q = w[1].0;
        let mid = 0.5 * (p + q);
        let inside = a.eval(mid) != zero && b.eval(mid) != zero;
        match (open, inside) {
            (None, true) => open = Some(p),
            (Some(lo), true) if !p_nonzero => {
                out.push(Interval { lo, hi: p });
                open = Some(p);
            }
            (Some(lo), false) => {
                out.push(Interval { lo, hi: p });
                open = None;
            }
            _ => {}
        }
    }
    if let (Some(lo), Some(&(last, _))) = (open, points.last()) {
        out.push(Interval { lo, hi: last });
    }
    out
}
