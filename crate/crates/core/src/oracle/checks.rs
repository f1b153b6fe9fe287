//! Exact verification of the identities and inequalities behind the
//! weight-`k` entropy bound on small instances.

use itertools::Itertools;

use crate::entropy::{f_dk, h2, DefectModel};
use crate::error::{Error, Result};

use super::dist::{
    bitset, conditional_item_entropy, enumerate_distribution, joint_entropy,
    prob_all_positive_incl_excl, MAX_ENUM_ITEMS,
};
use super::matrix::TestMatrix;
use super::report::{CheckRecord, Relation};

/// Tolerance for exact identities and inequalities.
pub const EXACT_TOLERANCE: f64 = 1e-12;
/// Distance below which an entropy bound counts as attained.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;

pub const MAX_APPENDIX_TESTS: usize = 12;
pub const MAX_LEMMA1_ITEMS: usize = 10;
pub const MAX_LEMMA1_ROWS: usize = 3;
pub const MAX_MT_ITEMS: usize = 20;
pub const MAX_MT_TESTS: usize = 16;

fn inputs(m: &TestMatrix, model: &DefectModel) -> String {
    format!("{m} delta={}", model.delta())
}

fn need_items(m: &TestMatrix, limit: usize) -> Result<()> {
    if m.n() > limit {
        return Err(Error::Size {
            what: "n",
            got: m.n(),
            limit,
        });
    }
    Ok(())
}

/// Signed sum `Σ (−1)^{|U|} ζ^{|base ∪ ⋃_{l∈U} R_l|}` over the subsets `U`
/// of `tests` (as bitmasks over positions in `tests`) accepted by `keep`.
fn filtered_signed_sum(
    m: &TestMatrix,
    tests: &[usize],
    base: &[usize],
    zeta: f64,
    keep: impl Fn(u32) -> bool,
) -> f64 {
    let sets: Vec<Vec<u64>> = tests.iter().map(|&l| bitset(m.n(), m.row(l))).collect();
    let base = bitset(m.n(), base);
    let mut acc = 0.0;
    for mask in 0u32..(1 << tests.len()) {
        if !keep(mask) {
            continue;
        }
        let mut union = base.clone();
        for (pos, set) in sets.iter().enumerate() {
            if mask >> pos & 1 == 1 {
                union.iter_mut().zip(set).for_each(|(a, b)| *a |= b);
            }
        }
        let size: u32 = union.iter().map(|w| w.count_ones()).sum();
        let term = zeta.powi(size as i32);
        if mask.count_ones() % 2 == 1 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    acc
}

/// Results of the inclusion-exclusion steps for a split index `a`
/// (tests `0..a` share the first block, `a..t` the second).
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixReport {
    pub split: usize,
    /// `P(Y_0 = 0, Y_{1..a} ≠ 1, Y_{a..t} = 1)` by enumeration.
    pub event_enumerated: f64,
    /// The same probability as the signed sum over `U ⊆ 1..t` meeting `1..a`.
    pub event_signed_sum: f64,
    /// `P(Y = 1)` by enumeration.
    pub all_positive: f64,
    /// Signed-sum terms with `0 ∉ U` or `U ∩ 1..a = ∅`.
    pub complementary_terms: f64,
    /// `P(Y* = 1)` after moving the shared item of tests `0..a` out of test 0,
    /// when a shared item and a fresh item exist.
    pub moved: Option<MovedItem>,
    inputs: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovedItem {
    pub shared: usize,
    pub fresh: usize,
    pub all_positive: f64,
}

impl AppendixReport {
    pub fn records(&self) -> Vec<CheckRecord> {
        let mut out = vec![
            CheckRecord::new(
                "appendix.sublemma",
                &self.inputs,
                self.event_enumerated,
                self.event_signed_sum,
                Relation::Equal,
                EXACT_TOLERANCE,
            ),
            CheckRecord::new(
                "appendix.decomposition",
                &self.inputs,
                self.complementary_terms + self.event_enumerated,
                self.all_positive,
                Relation::Equal,
                EXACT_TOLERANCE,
            ),
        ];
        if let Some(mv) = self.moved {
            out.push(CheckRecord::new(
                "appendix.moved_item",
                &format!("{} shared={} fresh={}", self.inputs, mv.shared, mv.fresh),
                self.all_positive,
                mv.all_positive,
                Relation::AtLeast,
                EXACT_TOLERANCE,
            ));
        }
        out
    }
}

/// Checks the inclusion-exclusion sub-lemma at split `a` (1-based, as the
/// number of leading tests in the first block) and the item-moving step.
pub fn verify_appendix_identities(
    m: &TestMatrix,
    a: usize,
    model: &DefectModel,
) -> Result<AppendixReport> {
    let s = m.t();
    if s > MAX_APPENDIX_TESTS {
        return Err(Error::Size {
            what: "t",
            got: s,
            limit: MAX_APPENDIX_TESTS,
        });
    }
    need_items(m, MAX_ENUM_ITEMS)?;
    if a == 0 || a > s {
        return Err(Error::Structure(format!("split {a} outside 1..={s}")));
    }
    let dist = enumerate_distribution(m, model)?;
    let head: usize = (1 << a) - 2; // bits 1..a
    let tail: usize = ((1 << s) - 1) & !((1 << a) - 1);
    let event_enumerated =
        dist.sum_where(|p| p & 1 == 0 && (p & head) != head && (p & tail) == tail);

    // positions in `rest` are tests 1..s; the first a-1 of them form the head block
    let rest: Vec<usize> = (1..s).collect();
    let head_mask: u32 = (1 << (a - 1)) - 1;
    let event_signed_sum =
        -filtered_signed_sum(m, &rest, m.row(0), model.zeta(), |u| u & head_mask != 0);

    let all: Vec<usize> = (0..s).collect();
    let all_positive = dist.prob_all_positive(&all);
    let complementary_terms = filtered_signed_sum(m, &all, &[], model.zeta(), |u| {
        u & 1 == 0 || (u >> 1) & head_mask == 0
    });

    let moved = if a >= 2 {
        let shared = m
            .common_items(&(0..a).collect::<Vec<_>>())
            .into_iter()
            .find(|i| (a..s).all(|l| m.row(l).binary_search(i).is_err()));
        match (shared, m.unused_items().first()) {
            (Some(shared), Some(&fresh)) => {
                let star = m.with_substitution(0, shared, fresh)?;
                let p = enumerate_distribution(&star, model)?.prob_all_positive(&all);
                Some(MovedItem {
                    shared,
                    fresh,
                    all_positive: p,
                })
            }
            _ => None,
        }
    } else {
        None
    };

    Ok(AppendixReport {
        split: a,
        event_enumerated,
        event_signed_sum,
        all_positive,
        complementary_terms,
        moved,
        inputs: format!("{} a={a}", inputs(m, model)),
    })
}

/// Exhaustive minimum of `P(all tests positive)` over placements of tests
/// with prescribed weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Report {
    pub placements: usize,
    pub exhaustive_min: f64,
    pub disjoint_value: f64,
    pub product: f64,
    inputs: String,
}

impl Lemma1Report {
    pub fn records(&self) -> Vec<CheckRecord> {
        vec![
            CheckRecord::new(
                "lemma1.min_is_product",
                &self.inputs,
                self.exhaustive_min,
                self.product,
                Relation::Equal,
                EXACT_TOLERANCE,
            ),
            CheckRecord::new(
                "lemma1.disjoint_is_product",
                &self.inputs,
                self.disjoint_value,
                self.product,
                Relation::Equal,
                EXACT_TOLERANCE,
            ),
        ]
    }
}

/// Every placement of tests with the given weights on `n` items, up to
/// relabeling of items: new items enter in increasing label order.
pub fn canonical_placements(n: usize, weights: &[usize]) -> Vec<Vec<Vec<usize>>> {
    fn extend(
        n: usize,
        weights: &[usize],
        used: usize,
        rows: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        let Some((&w, rest)) = weights.split_first() else {
            out.push(rows.clone());
            return;
        };
        for fresh in 0..=w {
            let old = w - fresh;
            if used + fresh > n || old > used {
                continue;
            }
            for combo in (0..used).combinations(old) {
                let mut row = combo;
                row.extend(used..used + fresh);
                rows.push(row);
                extend(n, rest, used + fresh, rows, out);
                rows.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(n, weights, 0, &mut Vec::new(), &mut out);
    out
}

pub fn verify_lemma1_min(n: usize, weights: &[usize], model: &DefectModel) -> Result<Lemma1Report> {
    if weights.is_empty() || weights.len() > MAX_LEMMA1_ROWS {
        return Err(Error::Size {
            what: "rows",
            got: weights.len(),
            limit: MAX_LEMMA1_ROWS,
        });
    }
    if n > MAX_LEMMA1_ITEMS {
        return Err(Error::Size {
            what: "n",
            got: n,
            limit: MAX_LEMMA1_ITEMS,
        });
    }
    if weights.contains(&0) {
        return Err(Error::Structure("row weights must be positive".into()));
    }
    let total: usize = weights.iter().sum();
    if total > n {
        return Err(Error::Structure(format!(
            "weights sum to {total} > n = {n}"
        )));
    }
    let tests: Vec<usize> = (0..weights.len()).collect();
    let prob = |rows: Vec<Vec<usize>>| -> Result<f64> {
        prob_all_positive_incl_excl(&TestMatrix::new(n, rows)?, &tests, model)
    };

    let placements = canonical_placements(n, weights);
    let mut min = f64::INFINITY;
    for rows in &placements {
        min = min.min(prob(rows.clone())?);
    }
    let mut next = 0;
    let disjoint: Vec<Vec<usize>> = weights
        .iter()
        .map(|&w| {
            next += w;
            (next - w..next).collect()
        })
        .collect();
    let disjoint_value = prob(disjoint)?;
    let product = weights
        .iter()
        .map(|&w| 1.0 - model.zeta().powi(w as i32))
        .product();
    Ok(Lemma1Report {
        placements: placements.len(),
        exhaustive_min: min,
        disjoint_value,
        product,
        inputs: format!("n={n} weights={weights:?} delta={}", model.delta()),
    })
}

/// Exact joint entropy of tests sharing an item against the closed-form
/// upper bound `(1−δ)|S| H((1−δ)^{k−1}) + H(δ) − f_{δ,k}(|S|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Thm3Report {
    pub k: usize,
    pub exact: f64,
    pub bound: f64,
    /// Bound attained within [`EQUALITY_TOLERANCE`].
    pub equality: bool,
    /// Some common item leaves pairwise disjoint tests when removed.
    pub reduced_disjoint: bool,
    inputs: String,
}

impl Thm3Report {
    pub fn records(&self) -> Vec<CheckRecord> {
        vec![CheckRecord::new(
            "thm3.entropy_bound",
            &self.inputs,
            self.exact,
            self.bound,
            Relation::AtMost,
            EXACT_TOLERANCE,
        )]
    }
}

pub fn shared_test_entropy_bound(model: &DefectModel, k: usize, s: usize) -> f64 {
    let z = model.zeta();
    z * s as f64 * h2(z.powi(k as i32 - 1)) + model.entropy() - f_dk(model, k as u32, s as f64)
}

pub fn verify_thm3(m: &TestMatrix, model: &DefectModel) -> Result<Thm3Report> {
    need_items(m, MAX_ENUM_ITEMS)?;
    let k = m
        .constant_weight()
        .ok_or_else(|| Error::Structure("row weights differ".into()))?;
    let all: Vec<usize> = (0..m.t()).collect();
    let common = m.common_items(&all);
    if common.is_empty() {
        return Err(Error::Structure("tests share no item".into()));
    }
    let exact = joint_entropy(m, model, None)?;
    let bound = shared_test_entropy_bound(model, k, m.t());
    let reduced_disjoint = common.iter().any(|&c| {
        let mut seen = vec![false; m.n()];
        m.rows()
            .iter()
            .flatten()
            .filter(|&&i| i != c)
            .all(|&i| !std::mem::replace(&mut seen[i], true))
    });
    Ok(Thm3Report {
        k,
        exact,
        bound,
        equality: (exact - bound).abs() <= EQUALITY_TOLERANCE,
        reduced_disjoint,
        inputs: inputs(m, model),
    })
}

/// `H(X_i | Y_{S_i})` against `f_{δ,k}(|S_i|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondEntropyReport {
    pub item: usize,
    pub k: usize,
    pub multiplicity: usize,
    pub exact: f64,
    pub bound: f64,
    inputs: String,
}

impl CondEntropyReport {
    pub fn records(&self) -> Vec<CheckRecord> {
        vec![CheckRecord::new(
            "cond_entropy.lower_bound",
            &self.inputs,
            self.exact,
            self.bound,
            Relation::AtLeast,
            EXACT_TOLERANCE,
        )]
    }
}

pub fn verify_cond_entropy_lb(
    m: &TestMatrix,
    item: usize,
    model: &DefectModel,
) -> Result<CondEntropyReport> {
    need_items(m, MAX_ENUM_ITEMS)?;
    if item >= m.n() {
        return Err(Error::Structure(format!("item {item} >= n = {}", m.n())));
    }
    let support = m.column_support().of(item).to_vec();
    let Some(&first) = support.first() else {
        return Err(Error::Structure(format!("item {item} is in no test")));
    };
    let k = m.row(first).len();
    if support.iter().any(|&l| m.row(l).len() != k) {
        return Err(Error::Structure(format!(
            "tests containing item {item} differ in weight"
        )));
    }
    let exact = conditional_item_entropy(m, item, &support, model)?;
    let bound = f_dk(model, k as u32, support.len() as f64);
    Ok(CondEntropyReport {
        item,
        k,
        multiplicity: support.len(),
        exact,
        bound,
        inputs: format!("{} item={item}", inputs(m, model)),
    })
}

/// `H(Y) ≤ (1/k) Σ_i H(Y_{S_i})` for a constant-weight design.
#[derive(Debug, Clone, PartialEq)]
pub struct MtReport {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    inputs: String,
}

impl MtReport {
    pub fn records(&self) -> Vec<CheckRecord> {
        vec![CheckRecord::new(
            "mt_weak",
            &self.inputs,
            self.lhs,
            self.rhs,
            Relation::AtMost,
            EXACT_TOLERANCE,
        )]
    }
}

pub fn verify_mt_weak(m: &TestMatrix, model: &DefectModel) -> Result<MtReport> {
    need_items(m, MAX_MT_ITEMS)?;
    if m.t() > MAX_MT_TESTS {
        return Err(Error::Size {
            what: "t",
            got: m.t(),
            limit: MAX_MT_TESTS,
        });
    }
    let k = m
        .constant_weight()
        .ok_or_else(|| Error::Structure("row weights differ".into()))?;
    let lhs = joint_entropy(m, model, None)?;
    let mut rhs = 0.0;
    for support in m.column_support().iter() {
        rhs += joint_entropy(m, model, Some(support))?;
    }
    rhs /= k as f64;
    Ok(MtReport {
        k,
        lhs,
        rhs,
        inputs: inputs(m, model),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn model(d: f64) -> DefectModel {
        DefectModel::new(d).unwrap()
    }

    fn mat(n: usize, rows: &[&[usize]]) -> TestMatrix {
        TestMatrix::new(n, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn all_pass(rs: &[CheckRecord]) {
        for r in rs {
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn appendix_identical_singletons() {
        let r = verify_appendix_identities(&mat(1, &[&[0], &[0]]), 2, &model(0.5)).unwrap();
        // Y_0 = 0 forces Y_1 = 0, so the event has probability P(X_0 = 0)
        assert_abs_diff_eq!(r.event_enumerated, 0.5, epsilon = 1e-15);
        assert!(r.moved.is_none());
        all_pass(&r.records());
    }

    #[test]
    fn appendix_shared_pair() {
        let r =
            verify_appendix_identities(&mat(4, &[&[0, 1], &[0, 2], &[3]]), 2, &model(0.5)).unwrap();
        assert_abs_diff_eq!(r.event_enumerated, r.event_signed_sum, epsilon = 1e-12);
        all_pass(&r.records());
        let r =
            verify_appendix_identities(&mat(5, &[&[0, 1], &[0, 2], &[3]]), 2, &model(0.5)).unwrap();
        let mv = r.moved.unwrap();
        assert_eq!((mv.shared, mv.fresh), (0, 4));
        assert!(r.all_positive > mv.all_positive);
        all_pass(&r.records());
    }

    #[test]
    fn appendix_disjoint_rows_unchanged() {
        let r =
            verify_appendix_identities(&mat(6, &[&[0, 1], &[2, 3], &[4]]), 2, &model(0.3)).unwrap();
        assert!(r.moved.is_none());
        all_pass(&r.records());
    }

    #[test]
    fn appendix_errors() {
        let m = mat(3, &[&[0], &[1]]);
        assert!(verify_appendix_identities(&m, 0, &model(0.3)).is_err());
        assert!(verify_appendix_identities(&m, 3, &model(0.3)).is_err());
        let big = TestMatrix::new(13, (0..13).map(|i| vec![i]).collect()).unwrap();
        assert!(matches!(
            verify_appendix_identities(&big, 1, &model(0.3)),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn placements_cover_sharing_patterns() {
        let p = canonical_placements(2, &[1, 1]);
        assert_eq!(p, vec![vec![vec![0], vec![0]], vec![vec![0], vec![1]]]);
        assert_eq!(canonical_placements(3, &[2]).len(), 1);
    }

    #[test]
    fn lemma1_examples() {
        let r = verify_lemma1_min(2, &[1, 1], &model(0.5)).unwrap();
        assert_abs_diff_eq!(r.exhaustive_min, 0.25, epsilon = 1e-15);
        assert_eq!(r.placements, 2);
        let shared =
            prob_all_positive_incl_excl(&mat(2, &[&[0], &[0]]), &[0, 1], &model(0.5)).unwrap();
        assert_abs_diff_eq!(shared, 0.5, epsilon = 1e-15);

        let r = verify_lemma1_min(4, &[2, 2], &model(0.5)).unwrap();
        assert_abs_diff_eq!(r.exhaustive_min, 0.5625, epsilon = 1e-15);
        let r = verify_lemma1_min(6, &[2, 2, 2], &model(0.3)).unwrap();
        assert_abs_diff_eq!(r.exhaustive_min, 0.51f64.powi(3), epsilon = 1e-14);
        all_pass(&r.records());
    }

    #[test]
    fn lemma1_errors() {
        assert!(verify_lemma1_min(3, &[2, 2], &model(0.5)).is_err());
        assert!(verify_lemma1_min(11, &[1], &model(0.5)).is_err());
        assert!(verify_lemma1_min(9, &[1, 1, 1, 1], &model(0.5)).is_err());
        assert!(verify_lemma1_min(9, &[], &model(0.5)).is_err());
    }

    #[test]
    fn thm3_examples() {
        let r = verify_thm3(&mat(3, &[&[0, 1], &[0, 2]]), &model(0.5)).unwrap();
        assert_abs_diff_eq!(r.exact, 1.5487949406953985, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound, 1.5487949406953985, epsilon = 1e-12);
        assert!(r.equality && r.reduced_disjoint);

        let r = verify_thm3(&mat(2, &[&[0, 1], &[0, 1]]), &model(0.5)).unwrap();
        assert_abs_diff_eq!(r.exact, 0.8112781244591328, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound, 1.5487949406953985, epsilon = 1e-12);
        assert!(!r.equality && !r.reduced_disjoint);

        let r = verify_thm3(&mat(2, &[&[1], &[1], &[1]]), &model(0.3)).unwrap();
        assert_abs_diff_eq!(r.exact, h2(0.3), epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound, h2(0.3), epsilon = 1e-12);
        all_pass(&r.records());
    }

    #[test]
    fn thm3_structure_errors() {
        assert!(verify_thm3(&mat(3, &[&[0, 1], &[2]]), &model(0.5)).is_err());
        assert!(verify_thm3(&mat(4, &[&[0, 1], &[2, 3]]), &model(0.5)).is_err());
    }

    #[test]
    fn cond_entropy_examples() {
        let r = verify_cond_entropy_lb(&mat(1, &[&[0]]), 0, &model(0.4)).unwrap();
        assert_abs_diff_eq!(r.exact, 0.0, epsilon = 1e-15);
        assert_eq!(r.bound, 0.0);

        let r = verify_cond_entropy_lb(&mat(3, &[&[0, 1], &[0, 2]]), 0, &model(0.5)).unwrap();
        assert_abs_diff_eq!(r.exact, 0.451205059304601, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound, 0.451205059304601, epsilon = 1e-12);

        let r = verify_cond_entropy_lb(&mat(2, &[&[0, 1], &[0, 1]]), 0, &model(0.5)).unwrap();
        assert!(r.exact > r.bound + 1e-3);
        all_pass(&r.records());

        assert!(verify_cond_entropy_lb(&mat(3, &[&[0, 1], &[2]]), 2, &model(0.5)).is_ok());
        assert!(verify_cond_entropy_lb(&mat(3, &[&[0, 1], &[1]]), 1, &model(0.5)).is_err());
        assert!(verify_cond_entropy_lb(&mat(3, &[&[0, 1]]), 2, &model(0.5)).is_err());
    }

    #[test]
    fn mt_examples() {
        let r = verify_mt_weak(&mat(4, &[&[0], &[1], &[2], &[3]]), &model(0.2)).unwrap();
        assert_abs_diff_eq!(r.lhs, 4.0 * h2(0.2), epsilon = 1e-12);
        assert_abs_diff_eq!(r.rhs, 4.0 * h2(0.2), epsilon = 1e-12);

        let r = verify_mt_weak(&mat(3, &[&[0, 1], &[1, 2]]), &model(0.5)).unwrap();
        assert_abs_diff_eq!(r.lhs, 1.5487949406953985, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rhs, 1.5856755948068321, epsilon = 1e-12);
        all_pass(&r.records());

        assert!(verify_mt_weak(&mat(3, &[&[0, 1], &[2]]), &model(0.5)).is_err());
    }
}
