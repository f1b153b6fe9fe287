//! The full verification run behind `gtbounds verify`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::entropy::DefectModel;
use crate::error::{Error, Result};

use super::checks::{
    canonical_placements, verify_appendix_identities, verify_cond_entropy_lb, verify_lemma1_min,
    verify_mt_weak, verify_thm3, EXACT_TOLERANCE,
};
use super::dist::{enumerate_distribution, prob_all_positive_incl_excl};
use super::matrix::TestMatrix;
use super::report::{CheckRecord, Relation, Report};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    /// Upper bound on the item count of every generated instance.
    pub max_n: usize,
    pub seed: u64,
    /// Tolerance for identities and inequalities.
    pub tolerance: f64,
    /// Random matrices in the inclusion-exclusion fuzz.
    pub fuzz_cases: usize,
    /// Random weight-3 matrices per defect rate in the weak-form fuzz.
    pub mt_cases: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            max_n: 12,
            seed: 0x5eed,
            tolerance: EXACT_TOLERANCE,
            fuzz_cases: 500,
            mt_cases: 20,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_n == 0 {
            return Err(Error::domain("max_n", 0.0, "max_n >= 1"));
        }
        if !(self.tolerance >= 0.0) || !self.tolerance.is_finite() {
            return Err(Error::domain("tolerance", self.tolerance, "tolerance >= 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Family {
    Distribution = 1,
    InclExcl = 2,
    MtWeak = 3,
    Appendix = 4,
}

/// Generator for case `case` of a family: one ChaCha stream per case.
fn case_rng(seed: u64, family: Family, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((family as u64) << 32) | case as u64);
    rng
}

/// A random matrix on items `0..pool` (`pool ≤ n`) with `t` tests of weight
/// in `1..=max_weight`.
fn random_matrix(
    rng: &mut impl Rng,
    n: usize,
    pool: usize,
    t: usize,
    weight: Option<usize>,
) -> TestMatrix {
    let rows = (0..t)
        .map(|_| {
            let w = weight
                .unwrap_or_else(|| rng.random_range(1..=pool))
                .min(pool);
            sample(rng, pool, w).into_vec()
        })
        .collect();
    TestMatrix::new(n, rows).expect("generated rows are valid")
}

fn retol(mut records: Vec<CheckRecord>, tol: f64) -> Vec<CheckRecord> {
    for r in &mut records {
        if r.tolerance == EXACT_TOLERANCE {
            r.tolerance = tol;
        }
    }
    records
}

pub fn distribution_checks(cfg: &SuiteConfig, cases: usize) -> Result<Vec<CheckRecord>> {
    let n_max = cfg.max_n.min(12);
    let per_case = |case: usize| -> Result<Vec<CheckRecord>> {
        let mut rng = case_rng(cfg.seed, Family::Distribution, case);
        let n = rng.random_range(1..=n_max);
        let t = rng.random_range(1..=6);
        let m = random_matrix(&mut rng, n, n, t, None);
        let model = DefectModel::new(rng.random_range(0.05..0.95))?;
        let d = enumerate_distribution(&m, &model)?;
        let worst = (0..t)
            .map(|l| {
                (d.marginal_positive(l) - (1.0 - model.zeta().powi(m.row(l).len() as i32))).abs()
            })
            .fold(0.0, f64::max);
        let inputs = format!("{m} delta={}", model.delta());
        Ok(vec![
            CheckRecord::new(
                "dist.sum",
                &inputs,
                d.total(),
                1.0,
                Relation::Equal,
                cfg.tolerance,
            ),
            CheckRecord::new(
                "dist.marginals",
                &inputs,
                worst,
                0.0,
                Relation::Equal,
                cfg.tolerance,
            ),
        ])
    };
    collect((0..cases).into_par_iter().map(per_case).collect())
}

pub fn incl_excl_fuzz(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let n_max = cfg.max_n.min(12);
    let per_case = |case: usize| -> Result<Vec<CheckRecord>> {
        let mut rng = case_rng(cfg.seed, Family::InclExcl, case);
        let n = rng.random_range(1..=n_max);
        let t = rng.random_range(1..=6);
        let m = random_matrix(&mut rng, n, n, t, None);
        let model = DefectModel::new(rng.random_range(0.05..0.95))?;
        let size = rng.random_range(1..=t);
        let mut subset = sample(&mut rng, t, size).into_vec();
        subset.sort_unstable();
        let ie = prob_all_positive_incl_excl(&m, &subset, &model)?;
        let en = enumerate_distribution(&m, &model)?.prob_all_positive(&subset);
        let inputs = format!("{m} S={subset:?} delta={}", model.delta());
        Ok(vec![CheckRecord::new(
            "incl_excl.vs_enumeration",
            &inputs,
            ie,
            en,
            Relation::Equal,
            cfg.tolerance,
        )])
    };
    collect((0..cfg.fuzz_cases).into_par_iter().map(per_case).collect())
}

/// Nondecreasing weight tuples with 1 to 3 rows and entries in `1..=3`.
pub fn lemma1_weight_tuples() -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for a in 1..=3 {
        out.push(vec![a]);
        for b in a..=3 {
            out.push(vec![a, b]);
            for c in b..=3 {
                out.push(vec![a, b, c]);
            }
        }
    }
    out
}

pub fn lemma1_exhaustive(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let n_max = cfg.max_n.min(9);
    let mut jobs = Vec::new();
    for weights in lemma1_weight_tuples() {
        let total: usize = weights.iter().sum();
        for n in total..=n_max {
            for &delta in &[0.1, 0.3, 0.5] {
                jobs.push((weights.clone(), n, delta));
            }
        }
    }
    collect(
        jobs.par_iter()
            .map(|(w, n, d)| {
                Ok(retol(
                    verify_lemma1_min(*n, w, &DefectModel::new(*d)?)?.records(),
                    cfg.tolerance,
                ))
            })
            .collect(),
    )
}

/// Every constant-weight design whose tests all contain item 0, with
/// weight `k ≤ 3` and `|S| ≤ 4` tests, up to relabeling.
pub fn common_item_family(max_n: usize) -> Vec<TestMatrix> {
    let mut out = Vec::new();
    for k in 1..=3usize {
        for s in 1..=4usize {
            let n = max_n.min(12).min(1 + s * (k - 1)).max(k);
            if n > max_n {
                continue;
            }
            for reduced in canonical_placements(n - 1, &vec![k - 1; s]) {
                let rows = reduced
                    .into_iter()
                    .map(|r| {
                        std::iter::once(0)
                            .chain(r.into_iter().map(|i| i + 1))
                            .collect()
                    })
                    .collect();
                out.push(TestMatrix::new(n, rows).expect("family rows are valid"));
            }
        }
    }
    out
}

pub fn thm3_family(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let family = common_item_family(cfg.max_n);
    let jobs: Vec<(&TestMatrix, f64)> = family
        .iter()
        .flat_map(|m| [0.1, 0.3, 0.5].map(|d| (m, d)))
        .collect();
    collect(
        jobs.par_iter()
            .map(|&(m, d)| {
                let model = DefectModel::new(d)?;
                let r = verify_thm3(m, &model)?;
                let mut recs = r.records();
                recs.push(CheckRecord::new(
                    "thm3.equality_iff_disjoint",
                    &format!("{m} delta={d}"),
                    r.equality as u8 as f64,
                    r.reduced_disjoint as u8 as f64,
                    Relation::Equal,
                    0.0,
                ));
                recs.extend(verify_cond_entropy_lb(m, 0, &model)?.records());
                Ok(retol(recs, cfg.tolerance))
            })
            .collect(),
    )
}

pub fn mt_weak_fuzz(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let n = cfg.max_n.min(9);
    let k = n.min(3);
    let t = 6;
    let deltas = [0.2, 0.3, 0.4];
    let jobs: Vec<(usize, f64)> = deltas
        .iter()
        .enumerate()
        .flat_map(|(j, &d)| (0..cfg.mt_cases).map(move |c| (j * cfg.mt_cases + c, d)))
        .collect();
    let mut out = collect(
        jobs.par_iter()
            .map(|&(case, d)| {
                let mut rng = case_rng(cfg.seed, Family::MtWeak, case);
                let m = random_matrix(&mut rng, n, n, t, Some(k));
                Ok(retol(
                    verify_mt_weak(&m, &DefectModel::new(d)?)?.records(),
                    cfg.tolerance,
                ))
            })
            .collect(),
    )?;
    if cfg.max_n >= 3 {
        let worked = TestMatrix::new(3, vec![vec![0, 1], vec![1, 2]])?;
        out.extend(retol(
            verify_mt_weak(&worked, &DefectModel::new(0.5)?)?.records(),
            cfg.tolerance,
        ));
    }
    Ok(out)
}

pub fn appendix_checks(cfg: &SuiteConfig, cases: usize) -> Result<Vec<CheckRecord>> {
    let n_max = cfg.max_n.min(10);
    let per_case = |case: usize| -> Result<Vec<CheckRecord>> {
        let mut rng = case_rng(cfg.seed, Family::Appendix, case);
        let n = rng.random_range(1..=n_max);
        // keep the last item out of every test so that a fresh item exists
        let pool = if n >= 2 { n - 1 } else { n };
        let t = rng.random_range(1..=6);
        let m = random_matrix(&mut rng, n, pool, t, None);
        // plant an item shared by a leading block of tests
        let a_plant = rng.random_range(1..=t);
        let shared = rng.random_range(0..pool);
        let rows: Vec<Vec<usize>> = m
            .rows()
            .iter()
            .enumerate()
            .map(|(l, r)| {
                let mut r: Vec<usize> = r.iter().copied().filter(|&i| i != shared).collect();
                if l < a_plant || r.is_empty() {
                    r.push(shared);
                }
                r
            })
            .collect();
        let m = TestMatrix::new(n, rows)?;
        let model = DefectModel::new(rng.random_range(0.05..0.95))?;
        let mut recs = Vec::new();
        for a in 1..=t {
            recs.extend(verify_appendix_identities(&m, a, &model)?.records());
        }
        Ok(retol(recs, cfg.tolerance))
    };
    collect((0..cases).into_par_iter().map(per_case).collect())
}

fn collect(parts: Vec<Result<Vec<CheckRecord>>>) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Runs every oracle family. Records come back in a fixed order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::default();
    report.extend(distribution_checks(cfg, 100)?);
    report.extend(incl_excl_fuzz(cfg)?);
    report.extend(lemma1_exhaustive(cfg)?);
    report.extend(thm3_family(cfg)?);
    report.extend(mt_weak_fuzz(cfg)?);
    report.extend(appendix_checks(cfg, 100)?);
    Ok(report)
}
