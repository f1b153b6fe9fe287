//! The adaptive pairing scheme for linear-regime group testing, and its
//! Monte Carlo simulation.
//!
//! Below `δ*` items are tested in fixed pairs `(0,1), (2,3), ...`:
//! a negative pair test clears both items; otherwise the first item is
//! tested, and the second is tested only if the first was defective (a clean
//! first item in a positive pair implies a defective second item). An odd
//! leftover item is tested alone. At `δ ≥ δ*` every item is tested alone.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::DELTA_STAR;
use crate::entropy::DefectModel;
use crate::error::{Error, Result};
use crate::oracle::{CheckRecord, Relation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectVector {
    bits: Vec<bool>,
}

impl DefectVector {
    pub fn new(bits: Vec<bool>) -> Self {
        DefectVector { bits }
    }

    pub fn from_defectives(n: usize, defectives: &[usize]) -> Result<Self> {
        let mut bits = vec![false; n];
        for &i in defectives {
            *bits
                .get_mut(i)
                .ok_or_else(|| Error::Structure(format!("item {i} >= n = {n}")))? = true;
        }
        Ok(DefectVector { bits })
    }

    /// A Bernoulli(δ) draw.
    pub fn sample(n: usize, model: &DefectModel, rng: &mut impl Rng) -> Self {
        DefectVector {
            bits: (0..n).map(|_| rng.random_bool(model.delta())).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn is_defective(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn defectives(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.bits[i]).collect()
    }
}

/// Tests spent and the recovered defective set, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UngarOutcome {
    pub tests_used: u64,
    pub recovered: Vec<usize>,
}

/// Counts the tests as they are issued against the hidden vector.
struct Oracle<'a> {
    x: &'a DefectVector,
    tests: u64,
}

impl Oracle<'_> {
    fn test(&mut self, items: &[usize]) -> bool {
        self.tests += 1;
        items.iter().any(|&i| self.x.is_defective(i))
    }
}

pub fn run_ungar(x: &DefectVector, model: &DefectModel) -> UngarOutcome {
    let n = x.n();
    let mut oracle = Oracle { x, tests: 0 };
    let mut found = Vec::new();

    if model.delta() >= DELTA_STAR {
        for i in 0..n {
            if oracle.test(&[i]) {
                found.push(i);
            }
        }
    } else {
        for first in (0..n - n % 2).step_by(2) {
            let second = first + 1;
            if !oracle.test(&[first, second]) {
                continue;
            }
            if oracle.test(&[first]) {
                found.push(first);
                if oracle.test(&[second]) {
                    found.push(second);
                }
            } else {
                found.push(second);
            }
        }
        if n % 2 == 1 && oracle.test(&[n - 1]) {
            found.push(n - 1);
        }
    }
    UngarOutcome {
        tests_used: oracle.tests,
        recovered: found,
    }
}

/// Expected tests per item, `min{1, (1 + (1−ζ²) + (1−ζ))/2}`.
pub fn expected_tests_formula(model: &DefectModel) -> f64 {
    if model.delta() >= DELTA_STAR {
        return 1.0;
    }
    let z = model.zeta();
    (0.5 * (1.0 + (1.0 - z * z) + (1.0 - z))).min(1.0)
}

/// Expected tests for one pair by weighting its four outcomes.
pub fn pair_expectation_exact(model: &DefectModel) -> f64 {
    let (d, z) = (model.delta(), model.zeta());
    let mut e = 0.0;
    for first in [false, true] {
        for second in [false, true] {
            let p = if first { d } else { z } * if second { d } else { z };
            let x = DefectVector::new(vec![first, second]);
            e += p * run_ungar(&x, model).tests_used as f64;
        }
    }
    e
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub model: DefectModel,
    pub trials: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(n: usize, delta: f64, trials: u64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n", 0.0, "n >= 1"));
        }
        if trials == 0 {
            return Err(Error::domain("trials", 0.0, "trials >= 1"));
        }
        Ok(SimConfig {
            n,
            model: DefectModel::new(delta)?,
            trials,
            seed,
        })
    }

    /// Generator for one trial: the seed's ChaCha stream numbered by trial.
    pub fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    pub trials: u64,
    pub total_tests: u64,
    pub mean_tests_per_item: f64,
    pub stderr: f64,
    pub error_count: u64,
    pub formula_value: f64,
}

impl SimReport {
    /// `(mean − formula) / stderr`; 0 when both the deviation and the
    /// standard error vanish.
    pub fn z_score(&self) -> f64 {
        let dev = self.mean_tests_per_item - self.formula_value;
        if self.stderr == 0.0 {
            if dev == 0.0 {
                0.0
            } else {
                dev.signum() * f64::INFINITY
            }
        } else {
            dev / self.stderr
        }
    }

    pub fn records(&self) -> Vec<CheckRecord> {
        let inputs = format!(
            "n={} delta={} trials={} seed={}",
            self.n, self.delta, self.trials, self.seed
        );
        vec![
            CheckRecord::new(
                "sim.decoding_errors",
                &inputs,
                self.error_count as f64,
                0.0,
                Relation::Equal,
                0.0,
            ),
            CheckRecord::new(
                "sim.mean_vs_formula",
                &inputs,
                (self.mean_tests_per_item - self.formula_value).abs(),
                4.0 * self.stderr,
                Relation::AtMost,
                0.0,
            ),
        ]
    }
}

impl fmt::Display for SimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "delta = {}", self.delta)?;
        writeln!(f, "trials = {}", self.trials)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "mean_tests_per_item = {:.9}", self.mean_tests_per_item)?;
        writeln!(f, "stderr = {:.9}", self.stderr)?;
        writeln!(f, "formula_value = {:.9}", self.formula_value)?;
        writeln!(f, "z_score = {:.6}", self.z_score())?;
        writeln!(f, "error_count = {}", self.error_count)?;
        for r in self.records() {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Runs independent trials in parallel. Per-trial results are integers, so
/// the aggregate does not depend on scheduling.
pub fn simulate(cfg: &SimConfig) -> SimReport {
    let per_trial: Vec<(u64, bool)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = cfg.trial_rng(trial);
            let x = DefectVector::sample(cfg.n, &cfg.model, &mut rng);
            let out = run_ungar(&x, &cfg.model);
            (out.tests_used, out.recovered == x.defectives())
        })
        .collect();

    let total: u128 = per_trial.iter().map(|&(t, _)| t as u128).sum();
    let total_sq: u128 = per_trial
        .iter()
        .map(|&(t, _)| (t as u128) * (t as u128))
        .sum();
    let errors = per_trial.iter().filter(|&&(_, ok)| !ok).count() as u64;

    let trials = cfg.trials as f64;
    let n = cfg.n as f64;
    let mean_tests = total as f64 / trials;
    let stderr = if cfg.trials > 1 {
        let ss = total_sq as f64 - (total as f64) * mean_tests;
        let var = (ss / (trials - 1.0)).max(0.0) / (n * n);
        (var / trials).sqrt()
    } else {
        0.0
    };
    SimReport {
        n: cfg.n,
        delta: cfg.model.delta(),
        seed: cfg.seed,
        trials: cfg.trials,
        total_tests: total as u64,
        mean_tests_per_item: mean_tests / n,
        stderr,
        error_count: errors,
        formula_value: expected_tests_formula(&cfg.model),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn model(d: f64) -> DefectModel {
        DefectModel::new(d).unwrap()
    }

    #[test]
    fn all_clean() {
        let x = DefectVector::new(vec![false; 4]);
        let out = run_ungar(&x, &model(0.2));
        assert_eq!(out.tests_used, 2);
        assert!(out.recovered.is_empty());
    }

    #[test]
    fn first_item_defective() {
        let x = DefectVector::from_defectives(4, &[0]).unwrap();
        let out = run_ungar(&x, &model(0.2));
        assert_eq!(out.tests_used, 4);
        assert_eq!(out.recovered, vec![0]);
    }

    #[test]
    fn individual_branch() {
        let x = DefectVector::from_defectives(7, &[1, 4, 5]).unwrap();
        let out = run_ungar(&x, &model(0.5));
        assert_eq!(out.tests_used, 7);
        assert_eq!(out.recovered, vec![1, 4, 5]);
    }

    #[test]
    fn per_pair_counts() {
        let m = model(0.1);
        let cases = [
            ([false, false], 1),
            ([false, true], 2),
            ([true, false], 3),
            ([true, true], 3),
        ];
        for (bits, tests) in cases {
            let out = run_ungar(&DefectVector::new(bits.to_vec()), &m);
            assert_eq!(out.tests_used, tests, "{bits:?}");
        }
    }

    #[test]
    fn odd_leftover() {
        let x = DefectVector::from_defectives(5, &[4]).unwrap();
        let out = run_ungar(&x, &model(0.2));
        assert_eq!(out.tests_used, 3);
        assert_eq!(out.recovered, vec![4]);
        let one = DefectVector::from_defectives(1, &[]).unwrap();
        assert_eq!(run_ungar(&one, &model(0.2)).tests_used, 1);
    }

    #[test]
    fn exhaustive_small_vectors_decode() {
        for n in 1usize..=8 {
            for mask in 0u32..(1 << n) {
                let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                let x = DefectVector::new(bits);
                for d in [0.1, 0.45] {
                    let out = run_ungar(&x, &model(d));
                    assert_eq!(out.recovered, x.defectives());
                    let t = out.tests_used as usize;
                    assert!(t >= n.div_ceil(2) && t <= (3 * n).div_ceil(2));
                }
            }
        }
    }

    #[test]
    fn formula_values() {
        assert_eq!(expected_tests_formula(&model(DELTA_STAR)), 1.0);
        assert_abs_diff_eq!(expected_tests_formula(&model(0.2)), 0.78, epsilon = 1e-15);
        assert_abs_diff_eq!(expected_tests_formula(&model(1e-9)), 0.5, epsilon = 1e-8);
    }

    #[test]
    fn pair_expectation_matches_formula() {
        for i in 1..38 {
            let m = model(i as f64 / 100.0);
            let z = m.zeta();
            assert_abs_diff_eq!(
                pair_expectation_exact(&m),
                1.0 + (1.0 - z * z) + (1.0 - z),
                epsilon = 1e-14
            );
            assert_abs_diff_eq!(
                pair_expectation_exact(&m) / 2.0,
                expected_tests_formula(&m),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn simulate_individual_branch() {
        let r = simulate(&SimConfig::new(1000, 0.5, 10, 3).unwrap());
        assert_eq!(r.mean_tests_per_item, 1.0);
        assert_eq!(r.error_count, 0);
        assert_eq!(r.z_score(), 0.0);
    }

    #[test]
    fn simulate_is_deterministic() {
        let cfg = SimConfig::new(300, 0.25, 50, 11).unwrap();
        assert_eq!(simulate(&cfg), simulate(&cfg));
        let other = SimConfig { seed: 12, ..cfg };
        assert_ne!(simulate(&cfg).total_tests, simulate(&other).total_tests);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0, 0.2, 1, 0).is_err());
        assert!(SimConfig::new(10, 0.2, 0, 0).is_err());
        assert!(SimConfig::new(10, 1.2, 1, 0).is_err());
    }
}
