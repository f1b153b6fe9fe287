//! Exact laws of test outcomes by enumerating defect vectors.
//!
//! A test outcome is 1 when the test contains at least one defective item.
//! Only items that appear in some test are enumerated; the rest marginalize
//! out.

use crate::entropy::DefectModel;
use crate::error::{Error, Result};

use super::matrix::TestMatrix;

/// Largest item count accepted by the enumeration oracles.
pub const MAX_ENUM_ITEMS: usize = 24;
/// Largest test count whose full outcome law is materialized.
pub const MAX_ENUM_TESTS: usize = 24;
/// Largest test subset accepted by the inclusion-exclusion sum.
pub const MAX_INCL_EXCL_TESTS: usize = 20;

/// Probability of every outcome pattern of `t` tests. Bit `l` of the
/// pattern index is the outcome of test `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    t: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, pattern: usize) -> f64 {
        self.probs[pattern]
    }

    /// Probability of the outcome given as a 0/1 slice, test 0 first.
    pub fn prob_of(&self, outcome: &[u8]) -> f64 {
        assert_eq!(outcome.len(), self.t);
        let idx = outcome
            .iter()
            .enumerate()
            .fold(0usize, |acc, (l, &y)| acc | ((y as usize & 1) << l));
        self.probs[idx]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn entropy(&self) -> f64 {
        shannon(&self.probs)
    }

    pub fn marginal_positive(&self, l: usize) -> f64 {
        self.sum_where(|p| p >> l & 1 == 1)
    }

    pub fn prob_all_positive(&self, tests: &[usize]) -> f64 {
        let mask = tests.iter().fold(0usize, |m, &l| m | 1 << l);
        self.sum_where(|p| p & mask == mask)
    }

    pub fn sum_where(&self, pred: impl Fn(usize) -> bool) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|&(p, _)| pred(p))
            .map(|(_, &q)| q)
            .sum()
    }
}

pub(crate) fn shannon(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

fn check_items(m: &TestMatrix) -> Result<()> {
    if m.n() > MAX_ENUM_ITEMS {
        return Err(Error::Size {
            what: "n",
            got: m.n(),
            limit: MAX_ENUM_ITEMS,
        });
    }
    Ok(())
}

/// Law of `(Y_rows, X_tracked)`: outcome bits first, then the defect bits of
/// the tracked items.
fn enumerate_raw(rows: &[&[usize]], tracked: &[usize], model: &DefectModel) -> Result<Vec<f64>> {
    let width = rows.len() + tracked.len();
    if width > MAX_ENUM_TESTS {
        return Err(Error::Size {
            what: "t",
            got: width,
            limit: MAX_ENUM_TESTS,
        });
    }
    let mut local: Vec<usize> = rows
        .iter()
        .flat_map(|r| r.iter().copied())
        .chain(tracked.iter().copied())
        .collect();
    local.sort_unstable();
    local.dedup();
    if local.len() > MAX_ENUM_ITEMS {
        return Err(Error::Size {
            what: "items",
            got: local.len(),
            limit: MAX_ENUM_ITEMS,
        });
    }
    let bit = |i: usize| 1u32 << local.binary_search(&i).expect("item was collected");
    let row_masks: Vec<u32> = rows
        .iter()
        .map(|r| r.iter().fold(0, |m, &i| m | bit(i)))
        .collect();
    let tracked_masks: Vec<u32> = tracked.iter().map(|&i| bit(i)).collect();

    let m = local.len();
    let (d, z) = (model.delta(), model.zeta());
    let by_weight: Vec<f64> = (0..=m)
        .map(|w| d.powi(w as i32) * z.powi((m - w) as i32))
        .collect();

    let mut probs = vec![0.0; 1 << width];
    for x in 0u32..(1u32 << m) {
        let mut pattern = 0usize;
        for (l, &rm) in row_masks.iter().enumerate() {
            if rm & x != 0 {
                pattern |= 1 << l;
            }
        }
        for (j, &tm) in tracked_masks.iter().enumerate() {
            if tm & x != 0 {
                pattern |= 1 << (rows.len() + j);
            }
        }
        probs[pattern] += by_weight[x.count_ones() as usize];
    }
    Ok(probs)
}

/// Exact law of all test outcomes of `m`.
pub fn enumerate_distribution(m: &TestMatrix, model: &DefectModel) -> Result<JointDistribution> {
    check_items(m)?;
    let rows: Vec<&[usize]> = m.rows().iter().map(Vec::as_slice).collect();
    Ok(JointDistribution {
        t: m.t(),
        probs: enumerate_raw(&rows, &[], model)?,
    })
}

/// Entropy in bits of the outcomes of the listed tests (all tests when
/// `subset` is `None`). An empty subset has entropy 0.
pub fn joint_entropy(m: &TestMatrix, model: &DefectModel, subset: Option<&[usize]>) -> Result<f64> {
    check_items(m)?;
    let rows: Vec<&[usize]> = match subset {
        None => m.rows().iter().map(Vec::as_slice).collect(),
        Some(s) => s
            .iter()
            .map(|&l| {
                m.rows()
                    .get(l)
                    .map(Vec::as_slice)
                    .ok_or_else(|| Error::Structure(format!("test index {l} out of range")))
            })
            .collect::<Result<_>>()?,
    };
    if rows.is_empty() {
        return Ok(0.0);
    }
    Ok(shannon(&enumerate_raw(&rows, &[], model)?))
}

/// `H(X_item | Y_tests)` in bits.
pub fn conditional_item_entropy(
    m: &TestMatrix,
    item: usize,
    tests: &[usize],
    model: &DefectModel,
) -> Result<f64> {
    check_items(m)?;
    if item >= m.n() {
        return Err(Error::Structure(format!("item {item} >= n = {}", m.n())));
    }
    let rows: Vec<&[usize]> = tests.iter().map(|&l| m.row(l)).collect();
    let joint = shannon(&enumerate_raw(&rows, &[item], model)?);
    let outcomes = if rows.is_empty() {
        0.0
    } else {
        shannon(&enumerate_raw(&rows, &[], model)?)
    };
    Ok(joint - outcomes)
}

/// `P(Y_S = 1)` as the signed sum over `U ⊆ S` of `(1−δ)^{|∪_{l∈U} R_l|}`.
///
/// Works on set unions directly, so the item count is unrestricted.
pub fn prob_all_positive_incl_excl(
    m: &TestMatrix,
    tests: &[usize],
    model: &DefectModel,
) -> Result<f64> {
    if tests.len() > MAX_INCL_EXCL_TESTS {
        return Err(Error::Size {
            what: "|S|",
            got: tests.len(),
            limit: MAX_INCL_EXCL_TESTS,
        });
    }
    let words = m.n().div_ceil(64);
    let sets: Vec<Vec<u64>> = tests
        .iter()
        .map(|&l| {
            let row = m
                .rows()
                .get(l)
                .ok_or_else(|| Error::Structure(format!("test index {l} out of range")))?;
            let mut b = vec![0u64; words];
            for &i in row {
                b[i / 64] |= 1 << (i % 64);
            }
            Ok(b)
        })
        .collect::<Result<_>>()?;
    Ok(signed_union_sum(&sets, &vec![0u64; words], model.zeta()))
}

/// `Σ_{U ⊆ sets} (−1)^{|U|} ζ^{|base ∪ ⋃U|}`.
pub(crate) fn signed_union_sum(sets: &[Vec<u64>], base: &[u64], zeta: f64) -> f64 {
    fn go(sets: &[Vec<u64>], union: &[u64], negative: bool, zeta: f64) -> f64 {
        match sets.split_first() {
            None => {
                let size: u32 = union.iter().map(|w| w.count_ones()).sum();
                let v = zeta.powi(size as i32);
                if negative {
                    -v
                } else {
                    v
                }
            }
            Some((head, rest)) => {
                let with: Vec<u64> = union.iter().zip(head).map(|(a, b)| a | b).collect();
                go(rest, union, negative, zeta) + go(rest, &with, !negative, zeta)
            }
        }
    }
    go(sets, base, false, zeta)
}

pub(crate) fn bitset(n: usize, items: &[usize]) -> Vec<u64> {
    let mut b = vec![0u64; n.div_ceil(64)];
    for &i in items {
        b[i / 64] |= 1 << (i % 64);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::h2;
    use approx::assert_abs_diff_eq;

    fn model(d: f64) -> DefectModel {
        DefectModel::new(d).unwrap()
    }

    fn mat(n: usize, rows: &[&[usize]]) -> TestMatrix {
        TestMatrix::new(n, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn single_item_test() {
        let d = enumerate_distribution(&mat(1, &[&[0]]), &model(0.5)).unwrap();
        assert_eq!(d.prob_of(&[1]), 0.5);
    }

    #[test]
    fn overlapping_pair() {
        let d = enumerate_distribution(&mat(3, &[&[0, 1], &[1, 2]]), &model(0.5)).unwrap();
        assert_abs_diff_eq!(d.prob_of(&[1, 1]), 0.625, epsilon = 1e-15);
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fresh_items_test() {
        for r in 1..6 {
            let row: Vec<usize> = (0..r).collect();
            let m = TestMatrix::new(8, vec![row]).unwrap();
            let d = enumerate_distribution(&m, &model(0.3)).unwrap();
            assert_abs_diff_eq!(
                d.marginal_positive(0),
                1.0 - 0.7f64.powi(r as i32),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn entropy_examples() {
        let m = model(0.37);
        let singles = mat(4, &[&[0], &[1], &[2], &[3]]);
        assert_abs_diff_eq!(
            joint_entropy(&singles, &m, None).unwrap(),
            4.0 * h2(0.37),
            epsilon = 1e-12
        );

        let m5 = model(0.5);
        let shared = mat(3, &[&[0, 1], &[0, 2]]);
        assert_abs_diff_eq!(
            joint_entropy(&shared, &m5, None).unwrap(),
            1.5487949406953985,
            epsilon = 1e-12
        );
        let dup = mat(2, &[&[0, 1], &[0, 1]]);
        assert_abs_diff_eq!(
            joint_entropy(&dup, &m5, None).unwrap(),
            0.8112781244591328,
            epsilon = 1e-12
        );
        assert_eq!(joint_entropy(&dup, &m5, Some(&[])).unwrap(), 0.0);
        assert!(joint_entropy(&dup, &m5, Some(&[5])).is_err());
    }

    #[test]
    fn size_limits() {
        let big = TestMatrix::new(25, vec![vec![0, 24]]).unwrap();
        assert!(matches!(
            enumerate_distribution(&big, &model(0.2)),
            Err(Error::Size { .. })
        ));
        let many = TestMatrix::new(30, (0..21).map(|i| vec![i]).collect()).unwrap();
        let all: Vec<usize> = (0..21).collect();
        assert!(matches!(
            prob_all_positive_incl_excl(&many, &all, &model(0.2)),
            Err(Error::Size { .. })
        ));
        // inclusion-exclusion has no item limit
        let wide = TestMatrix::new(200, vec![(0..150).collect(), (100..200).collect()]).unwrap();
        assert!(prob_all_positive_incl_excl(&wide, &[0, 1], &model(0.01)).is_ok());
    }

    #[test]
    fn incl_excl_examples() {
        let m = model(0.5);
        let one = mat(5, &[&[0, 2, 4]]);
        assert_abs_diff_eq!(
            prob_all_positive_incl_excl(&one, &[0], &m).unwrap(),
            1.0 - 0.125,
            epsilon = 1e-15
        );
        let pair = mat(3, &[&[0, 1], &[1, 2]]);
        assert_abs_diff_eq!(
            prob_all_positive_incl_excl(&pair, &[0, 1], &m).unwrap(),
            0.625,
            epsilon = 1e-15
        );
        let disjoint = mat(6, &[&[0], &[1, 2], &[3, 4, 5]]);
        let m3 = model(0.3);
        let prod: f64 = [1, 2, 3].iter().map(|&r| 1.0 - 0.7f64.powi(r)).product();
        assert_abs_diff_eq!(
            prob_all_positive_incl_excl(&disjoint, &[0, 1, 2], &m3).unwrap(),
            prod,
            epsilon = 1e-15
        );
        assert_eq!(
            prob_all_positive_incl_excl(&disjoint, &[], &m3).unwrap(),
            1.0
        );
    }

    #[test]
    fn conditional_entropy_single_test() {
        let m = mat(1, &[&[0]]);
        assert_abs_diff_eq!(
            conditional_item_entropy(&m, 0, &[0], &model(0.3)).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            conditional_item_entropy(&m, 0, &[], &model(0.3)).unwrap(),
            h2(0.3),
            epsilon = 1e-15
        );
    }
}
