//! Scalar function family behind the converse bounds.
//!
//! All logarithms are base 2. Row weights are integers in the public API;
//! the `*_real_weight` variants evaluate the same closed forms at a real
//! weight and exist for the continuous-weight diagnostic in [`crate::bounds`].

use crate::error::{Error, Result};

/// Below this, `x log x` is taken at its limit 0.
const ENTROPY_FLOOR: f64 = 1e-300;

/// Absolute accuracy of [`g_dk_inverse`] in the entropy argument.
pub const INVERSE_TOLERANCE: f64 = 1e-10;

/// Independent Bernoulli defect model: each item is defective with
/// probability `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectModel {
    delta: f64,
    zeta: f64,
}

impl DefectModel {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::domain("delta", delta, "0 < delta < 1"));
        }
        Ok(DefectModel {
            delta,
            zeta: 1.0 - delta,
        })
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Probability that an item is clean, `1 − δ`.
    #[inline]
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// `H(δ)`, the per-item source entropy.
    #[inline]
    pub fn entropy(&self) -> f64 {
        h2(self.delta)
    }
}

/// A point at which the weight-`k` functions are evaluated: row weight,
/// multiplicity of a shared item, and rate in tests per item.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestProfile {
    pub k: u32,
    pub s: f64,
    pub rate: f64,
}

impl TestProfile {
    pub fn new(k: u32, s: f64, rate: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("k", 0.0, "k >= 1"));
        }
        if !(s >= 0.0) {
            return Err(Error::domain("s", s, "s >= 0"));
        }
        if !(rate >= 0.0) {
            return Err(Error::domain("T", rate, "T >= 0"));
        }
        Ok(TestProfile { k, s, rate })
    }

    pub fn f(&self, model: &DefectModel) -> f64 {
        f_dk(model, self.k, self.s)
    }

    pub fn g(&self, model: &DefectModel) -> f64 {
        g_dk(model, self.k, self.rate)
    }
}

/// Binary entropy in bits, checked.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("x", x, "0 <= x <= 1"));
    }
    Ok(h2(x))
}

/// Binary entropy without the domain check. Arguments are clamped to [0, 1].
#[inline]
pub fn h2(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let y = 1.0 - x;
    xlog(x) + xlog(y)
}

#[inline]
fn xlog(x: f64) -> f64 {
    if x < ENTROPY_FLOOR {
        0.0
    } else {
        -x * x.log2()
    }
}

/// The real row weight at which a test is unbiased: `(1 − δ)^{k0} = 1/2`.
pub fn k0(model: &DefectModel) -> f64 {
    std::f64::consts::LN_2 / -(-model.delta).ln_1p()
}

/// `1 − (1 − δ)^{k−1}`: probability that a weight-`k` test is positive
/// after one of its items has been removed.
pub fn p_dk(model: &DefectModel, k: u32) -> f64 {
    p_real_weight(model, k as f64)
}

pub fn p_real_weight(model: &DefectModel, w: f64) -> f64 {
    if w <= 1.0 {
        return 0.0;
    }
    -((w - 1.0) * (-model.delta).ln_1p()).exp_m1()
}

/// Lower bound on `H(X | Y_S)` for an item shared by `s` weight-`k` tests.
///
/// Uses `0⁰ = 1`, so `f(0) = H(δ)` for every `k`. For `k = 1` the value
/// drops to 0 for every `s > 0`.
pub fn f_dk(model: &DefectModel, k: u32, s: f64) -> f64 {
    f_real_weight(model, k as f64, s)
}

pub fn f_real_weight(model: &DefectModel, w: f64, s: f64) -> f64 {
    let p = p_real_weight(model, w);
    let ps = if s == 0.0 { 1.0 } else { p.powf(s) };
    let mass = model.delta + model.zeta * ps;
    mass * h2(model.delta / mass)
}

/// Per-item upper bound on the test-outcome entropy of a weight-`k` design
/// at rate `t` tests per item. `k = 1` is the linear `t · H(δ)`.
pub fn g_dk(model: &DefectModel, k: u32, t: f64) -> f64 {
    if k <= 1 {
        return t * model.entropy();
    }
    g_real_weight(model, k as f64, t)
}

pub fn g_real_weight(model: &DefectModel, w: f64, t: f64) -> f64 {
    let zeta = model.zeta;
    let per_test = zeta * h2(zeta.powf(w - 1.0));
    t * per_test + (model.entropy() - f_real_weight(model, w, w * t)) / w
}

/// Rate `T` with `g_dk(T) = y`, by bracket doubling and bisection.
pub fn g_dk_inverse(model: &DefectModel, k: u32, y: f64) -> Result<f64> {
    if k <= 1 {
        if !(y >= 0.0) {
            return Err(Error::domain("y", y, "y >= 0"));
        }
        return Ok(y / model.entropy());
    }
    invert_increasing(|t| g_dk(model, k, t), y)
}

pub fn g_real_weight_inverse(model: &DefectModel, w: f64, y: f64) -> Result<f64> {
    invert_increasing(|t| g_real_weight(model, w, t), y)
}

/// Inverts a continuous, strictly increasing, unbounded `g` with `g(0) = 0`.
fn invert_increasing(g: impl Fn(f64) -> f64, y: f64) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::domain("y", y, "y >= 0"));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while g(hi) < y {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::domain("y", y, "target reachable at finite rate"));
        }
    }
    // bisect to adjacent floats; the residual is then far below INVERSE_TOLERANCE
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (glo, ghi) = (g(lo), g(hi));
    let t = if (y - glo).abs() <= (ghi - y).abs() {
        lo
    } else {
        hi
    };
    debug_assert!(
        (g(t) - y).abs() <= INVERSE_TOLERANCE,
        "residual {}",
        g(t) - y
    );
    Ok(t)
}
