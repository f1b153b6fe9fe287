//! Converse bounds on the rate `t/n` of non-adaptive group testing, the
//! adaptive achievability rate, and the derived crossover and gap locations.

use rayon::prelude::*;

use crate::entropy::{self, g_dk, g_dk_inverse, h2, DefectModel};
use crate::error::{Error, Result};

/// `(3 − √5)/2`: above this defect rate individual testing is optimal both
/// for the converse and for the adaptive pairing scheme.
pub const DELTA_STAR: f64 = 0.381_966_011_250_105_1;

/// Threshold used when asking whether the main bound sits on its
/// individual-testing cap.
pub const CAP_TOLERANCE: f64 = 1e-9;

/// Bisection width for [`crossover_delta`].
pub const CROSSOVER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    pub model: DefectModel,
    pub epsilon: f64,
}

impl BoundQuery {
    pub fn new(delta: f64, epsilon: f64) -> Result<Self> {
        let model = DefectModel::new(delta)?;
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::domain("epsilon", epsilon, "0 <= epsilon < 1"));
        }
        Ok(BoundQuery { model, epsilon })
    }

    pub fn delta(&self) -> f64 {
        self.model.delta()
    }

    /// `H(δ) − ε`, the entropy the tests must carry.
    pub fn target(&self) -> f64 {
        self.model.entropy() - self.epsilon
    }

    fn check_target(&self) -> Result<f64> {
        let y = self.target();
        if y <= 0.0 {
            return Err(Error::DegenerateTarget {
                epsilon: self.epsilon,
                entropy: self.model.entropy(),
            });
        }
        Ok(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Counting,
    Individual,
    Quantization,
    PerK,
    Main,
    AdaptiveRate,
    BestLower,
    /// Main bound with the row weight relaxed to the real `k0(δ)`.
    RelaxedK0,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Counting => "counting",
            BoundKind::Individual => "individual",
            BoundKind::Quantization => "quantization",
            BoundKind::PerK => "per_k",
            BoundKind::Main => "main",
            BoundKind::AdaptiveRate => "adaptive_rate",
            BoundKind::BestLower => "best_lower",
            BoundKind::RelaxedK0 => "relaxed_k0",
        }
    }
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A rate `t/n` with whatever diagnostics the bound produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub kind: BoundKind,
    /// `None` only for an inapplicable individual-testing bound.
    pub value: Option<f64>,
    pub argmin_k: Option<u32>,
    /// Row weight at which the main-bound scan was certified complete.
    pub k_scan_limit: Option<u32>,
    pub applicable: bool,
}

impl BoundResult {
    fn plain(kind: BoundKind, value: f64) -> Self {
        BoundResult {
            kind,
            value: Some(value),
            argmin_k: None,
            k_scan_limit: None,
            applicable: true,
        }
    }

    /// The value, or 0 when the bound does not apply.
    pub fn rate(&self) -> f64 {
        self.value.unwrap_or(0.0)
    }
}

pub fn counting_bound(q: &BoundQuery) -> BoundResult {
    BoundResult::plain(BoundKind::Counting, q.target().max(0.0))
}

/// Individual testing is forced for `δ ≥ δ*`; below it the bound is not
/// applicable.
pub fn individual_testing_bound(q: &BoundQuery) -> BoundResult {
    if q.delta() < DELTA_STAR {
        return BoundResult {
            kind: BoundKind::Individual,
            value: None,
            argmin_k: None,
            k_scan_limit: None,
            applicable: false,
        };
    }
    let v = (1.0 - q.epsilon / q.model.entropy()).max(0.0);
    BoundResult::plain(BoundKind::Individual, v)
}

/// `max_k H((1−δ)^k)` and its maximizing integer weight.
///
/// `H((1−δ)^k)` is unimodal in `k` with its peak at `k0`, so only the two
/// integers around `k0` need checking.
pub fn quantization_denominator(model: &DefectModel) -> (u32, f64) {
    let k0 = entropy::k0(model);
    let lo = k0.floor().max(1.0) as u32;
    let hi = k0.ceil().max(1.0) as u32;
    let at = |k: u32| h2(model.zeta().powi(k as i32));
    let (a, b) = (at(lo), at(hi));
    if b > a {
        (hi, b)
    } else {
        (lo, a)
    }
}

pub fn quantization_bound(q: &BoundQuery) -> BoundResult {
    let (k, den) = quantization_denominator(&q.model);
    BoundResult {
        argmin_k: Some(k),
        ..BoundResult::plain(BoundKind::Quantization, q.target().max(0.0) / den)
    }
}

/// Converse for designs whose tests all have weight `k`.
pub fn per_k_bound(q: &BoundQuery, k: u32) -> Result<BoundResult> {
    if k == 0 {
        return Err(Error::domain("k", 0.0, "k >= 1"));
    }
    let y = q.check_target()?;
    let t = g_dk_inverse(&q.model, k, y)?;
    Ok(BoundResult {
        argmin_k: Some(k),
        ..BoundResult::plain(BoundKind::PerK, t)
    })
}

/// Lower envelope of `per_k_bound(k)` obtained by dropping `f ≥ 0`.
fn per_k_envelope(q: &BoundQuery, k: u32, y: f64) -> f64 {
    let zeta = q.model.zeta();
    let slope = zeta * h2(zeta.powi(k as i32 - 1));
    let num = y - q.model.entropy() / k as f64;
    if slope <= 0.0 {
        return if num > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
    }
    num / slope
}

/// Hard ceiling on the row-weight scan.
pub fn k_scan_ceiling(model: &DefectModel) -> u32 {
    10 * entropy::k0(model).ceil() as u32 + 50
}

/// General converse: the smallest per-weight bound over all row weights.
///
/// The scan stops once the envelope `(H(δ) − ε − H(δ)/k) / ((1−δ) H((1−δ)^{k−1}))`,
/// which is increasing for `k ≥ k0 + 2`, exceeds the best value found.
pub fn main_bound(q: &BoundQuery) -> Result<BoundResult> {
    let y = q.check_target()?;
    let k0 = entropy::k0(&q.model);
    let monotone_from = k0.ceil() as u32 + 3;
    let ceiling = k_scan_ceiling(&q.model);

    let mut best = y / q.model.entropy();
    let mut argmin = 1;
    let mut k = 2;
    loop {
        if k >= monotone_from && per_k_envelope(q, k, y) > best {
            break;
        }
        if k > ceiling {
            break;
        }
        let t = g_dk_inverse(&q.model, k, y)?;
        if t < best {
            best = t;
            argmin = k;
        }
        k += 1;
    }
    Ok(BoundResult {
        kind: BoundKind::Main,
        value: Some(best),
        argmin_k: Some(argmin),
        k_scan_limit: Some(k),
        applicable: true,
    })
}

/// Main bound evaluated at the single real row weight `k0(δ)` (capped at 1).
///
/// Not a valid converse for integer designs; kept to compare against the
/// continuous-weight curve.
pub fn relaxed_k0_bound(q: &BoundQuery) -> Result<BoundResult> {
    let y = q.check_target()?;
    let cap = y / q.model.entropy();
    let w = entropy::k0(&q.model);
    let t = if w > 1.0 {
        entropy::g_real_weight_inverse(&q.model, w, y)?.min(cap)
    } else {
        cap
    };
    Ok(BoundResult::plain(BoundKind::RelaxedK0, t))
}

/// Expected tests per item of the adaptive pairing scheme,
/// `min{1, (3 − ζ − ζ²)/2}`.
pub fn adaptive_rate(model: &DefectModel) -> BoundResult {
    let v = if model.delta() >= DELTA_STAR {
        1.0
    } else {
        let z = model.zeta();
        (0.5 * (3.0 - z - z * z)).min(1.0)
    };
    BoundResult::plain(BoundKind::AdaptiveRate, v)
}

/// The largest of the lower bounds. A vacuous main bound contributes 0.
pub fn best_lower_bound(q: &BoundQuery) -> BoundResult {
    let main = main_bound(q).map(|r| r.rate()).unwrap_or(0.0);
    let v = [
        counting_bound(q).rate(),
        quantization_bound(q).rate(),
        individual_testing_bound(q).rate(),
        main,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    BoundResult::plain(BoundKind::BestLower, v)
}

/// Whether the main bound is attained by individual testing (the `k = 1`
/// term). At `ε = 0` this is `main ≥ 1 − 1e−9`.
pub fn main_at_cap(q: &BoundQuery) -> bool {
    match main_bound(q) {
        Ok(r) => r.rate() >= q.target() / q.model.entropy() - CAP_TOLERANCE,
        Err(_) => false,
    }
}

fn at_cap(delta: f64, epsilon: f64) -> Result<bool> {
    Ok(main_at_cap(&BoundQuery::new(delta, epsilon)?))
}

/// Smallest `δ ∈ (0, 0.5]` at which the main bound reaches its
/// individual-testing cap.
pub fn crossover_delta(epsilon: f64) -> Result<f64> {
    locate_crossover(epsilon, at_cap)
}

/// [`crossover_delta`] for the relaxed-weight curve of [`relaxed_k0_bound`].
pub fn relaxed_crossover_delta(epsilon: f64) -> Result<f64> {
    locate_crossover(epsilon, |d, e| {
        let q = BoundQuery::new(d, e)?;
        Ok(match relaxed_k0_bound(&q) {
            Ok(r) => r.rate() >= q.target() / q.model.entropy() - CAP_TOLERANCE,
            Err(_) => false,
        })
    })
}

fn locate_crossover(epsilon: f64, qualifies: impl Fn(f64, f64) -> Result<bool>) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::domain("epsilon", epsilon, "0 <= epsilon < 1"));
    }
    // coarse scan for the first qualifying grid point, then bisect the
    // one-sided bracket below it
    const STEPS: usize = 200;
    let grid = |i: usize| 0.5 * i as f64 / STEPS as f64;
    let mut first = None;
    for i in 1..=STEPS {
        if qualifies(grid(i), epsilon)? {
            first = Some(i);
            break;
        }
    }
    let first = first.ok_or(Error::NotFound { epsilon })?;
    if first == 1 {
        return Ok(grid(1));
    }
    let (mut lo, mut hi) = (grid(first - 1), grid(first));
    while hi - lo > CROSSOVER_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if qualifies(mid, epsilon)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Interval of `δ` on which non-adaptive testing must test individually
/// while the adaptive pairing scheme needs fewer than `n` tests.
pub fn adaptivity_gap(epsilon: f64) -> Result<(f64, f64)> {
    let lo = match crossover_delta(epsilon) {
        Ok(lo) => lo,
        Err(Error::NotFound { .. }) => {
            return Err(Error::EmptyInterval {
                lo: f64::NAN,
                hi: DELTA_STAR,
            })
        }
        Err(e) => return Err(e),
    };
    if lo >= DELTA_STAR {
        return Err(Error::EmptyInterval { lo, hi: DELTA_STAR });
    }
    Ok((lo, DELTA_STAR))
}

/// One δ of a bound sweep. `None` marks an inapplicable or failed
/// column.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub delta: f64,
    pub epsilon: f64,
    pub counting: Option<f64>,
    pub quantization: Option<f64>,
    pub individual: Option<f64>,
    pub main: Option<f64>,
    pub main_argmin_k: Option<u32>,
    pub adaptive_rate: Option<f64>,
    pub best_lower: Option<f64>,
    /// Main bound on its individual-testing cap while the adaptive scheme is
    /// strictly cheaper.
    pub gap_flag: bool,
    /// Set when the main bound was vacuous (`ε ≥ H(δ)`) and reported as 0.
    pub vacuous: bool,
    pub error: Option<String>,
}

impl CurveRow {
    pub fn evaluate(delta: f64, epsilon: f64) -> CurveRow {
        let q = match BoundQuery::new(delta, epsilon) {
            Ok(q) => q,
            Err(e) => {
                return CurveRow {
                    delta,
                    epsilon,
                    counting: None,
                    quantization: None,
                    individual: None,
                    main: None,
                    main_argmin_k: None,
                    adaptive_rate: None,
                    best_lower: None,
                    gap_flag: false,
                    vacuous: false,
                    error: Some(e.to_string()),
                }
            }
        };
        let counting = counting_bound(&q).rate();
        let quantization = quantization_bound(&q).rate();
        let individual = individual_testing_bound(&q).value;
        let (main, argmin, vacuous, error) = match main_bound(&q) {
            Ok(r) => (r.rate(), r.argmin_k, false, None),
            Err(Error::DegenerateTarget { .. }) => (0.0, None, true, None),
            Err(e) => (0.0, None, false, Some(e.to_string())),
        };
        let adaptive = adaptive_rate(&q.model).rate();
        let best = [Some(counting), Some(quantization), individual, Some(main)]
            .into_iter()
            .flatten()
            .fold(0.0, f64::max);
        let on_cap =
            !vacuous && error.is_none() && main >= q.target() / q.model.entropy() - CAP_TOLERANCE;
        CurveRow {
            delta,
            epsilon,
            counting: Some(counting),
            quantization: Some(quantization),
            individual,
            main: error.is_none().then_some(main),
            main_argmin_k: argmin,
            adaptive_rate: Some(adaptive),
            best_lower: Some(best),
            gap_flag: on_cap && adaptive < main,
            vacuous,
            error,
        }
    }
}

/// Evaluates every grid point independently; rows come back in grid order.
pub fn sweep(delta_grid: &[f64], epsilon: f64) -> Vec<CurveRow> {
    delta_grid
        .par_iter()
        .map(|&d| CurveRow::evaluate(d, epsilon))
        .collect()
}

/// Outcome of [`simplex_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexProbe {
    pub vertex_max: f64,
    pub vertex_k: u32,
    pub simplex_max: f64,
    pub gap: f64,
    /// Weight on row weights `1..=kmax`.
    pub argmax_weights: Vec<f64>,
}

/// Compares `max_k g_k(T)` with `max Σ_k g_k(α_k T)` over the probability
/// simplex on `k = 1..=kmax`.
///
/// The simplex maximum is found by pairwise coordinate ascent: mass is moved
/// between two coordinates along a grid of `resolution` points, refined
/// around the best point, until no move improves the objective. The search
/// starts at the best vertex, so `gap ≥ 0`.
pub fn simplex_probe(
    model: &DefectModel,
    rate: f64,
    kmax: u32,
    resolution: u32,
) -> Result<SimplexProbe> {
    if kmax == 0 {
        return Err(Error::domain("kmax", 0.0, "kmax >= 1"));
    }
    if resolution < 10 {
        return Err(Error::domain(
            "resolution",
            resolution as f64,
            "resolution >= 10",
        ));
    }
    if !(rate >= 0.0) {
        return Err(Error::domain("T", rate, "T >= 0"));
    }
    let dims = kmax as usize;
    let term = |i: usize, a: f64| g_dk(model, i as u32 + 1, a * rate);
    let objective = |w: &[f64]| w.iter().enumerate().map(|(i, &a)| term(i, a)).sum::<f64>();

    let (vertex_idx, vertex_max) =
        (0..dims)
            .map(|i| (i, term(i, 1.0)))
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );

    let mut w = vec![0.0; dims];
    w[vertex_idx] = 1.0;
    let mut best = vertex_max;

    const MAX_SWEEPS: usize = 200;
    const REFINEMENTS: usize = 4;
    for _ in 0..MAX_SWEEPS {
        let before = best;
        for i in 0..dims {
            for j in (i + 1)..dims {
                let total = w[i] + w[j];
                if total <= 0.0 {
                    continue;
                }
                let pair = |x: f64| term(i, x) + term(j, total - x);
                let current = pair(w[i]);
                // grid over [lo, hi], then shrink around the winner
                let (mut lo, mut hi) = (0.0, total);
                let mut arg = w[i];
                let mut val = current;
                for _ in 0..REFINEMENTS {
                    let step = (hi - lo) / resolution as f64;
                    for s in 0..=resolution {
                        let x = (lo + step * s as f64).min(total);
                        let v = pair(x);
                        if v > val {
                            val = v;
                            arg = x;
                        }
                    }
                    lo = (arg - step).max(0.0);
                    hi = (arg + step).min(total);
                }
                if val > current {
                    w[i] = arg;
                    w[j] = total - arg;
                }
            }
        }
        best = objective(&w);
        if best - before <= 1e-13 {
            break;
        }
    }
    // a pair move can lose a few ulps when re-summed; never report below the vertex
    if best < vertex_max {
        best = vertex_max;
        w.iter_mut().for_each(|x| *x = 0.0);
        w[vertex_idx] = 1.0;
    }
    Ok(SimplexProbe {
        vertex_max,
        vertex_k: vertex_idx as u32 + 1,
        simplex_max: best,
        gap: best - vertex_max,
        argmax_weights: w,
    })
}
