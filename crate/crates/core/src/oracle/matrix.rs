use std::fmt;

use crate::error::{Error, Result};

/// Non-adaptive design: `t` tests over `n` items, each test a nonempty
/// sorted set of item indices. Duplicate tests are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TestMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
}

impl TestMatrix {
    pub fn new(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structure("matrix needs at least one item".into()));
        }
        if rows.is_empty() {
            return Err(Error::Structure("matrix needs at least one test".into()));
        }
        let mut clean = Vec::with_capacity(rows.len());
        for (l, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable();
            row.dedup();
            if row.is_empty() {
                return Err(Error::Structure(format!("test {l} is empty")));
            }
            if let Some(&i) = row.iter().find(|&&i| i >= n) {
                return Err(Error::Structure(format!(
                    "test {l} contains item {i} >= n = {n}"
                )));
            }
            clean.push(row);
        }
        Ok(TestMatrix { n, rows: clean })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row(&self, l: usize) -> &[usize] {
        &self.rows[l]
    }

    /// The common row weight, if every test has the same number of items.
    pub fn constant_weight(&self) -> Option<usize> {
        let k = self.rows[0].len();
        self.rows.iter().all(|r| r.len() == k).then_some(k)
    }

    /// Items present in every listed test.
    pub fn common_items(&self, tests: &[usize]) -> Vec<usize> {
        let Some((&first, rest)) = tests.split_first() else {
            return Vec::new();
        };
        self.rows[first]
            .iter()
            .copied()
            .filter(|i| rest.iter().all(|&l| self.rows[l].binary_search(i).is_ok()))
            .collect()
    }

    /// Items not used by any test.
    pub fn unused_items(&self) -> Vec<usize> {
        let mut used = vec![false; self.n];
        for row in &self.rows {
            for &i in row {
                used[i] = true;
            }
        }
        (0..self.n).filter(|&i| !used[i]).collect()
    }

    pub fn column_support(&self) -> ColumnSupport {
        let mut supports = vec![Vec::new(); self.n];
        for (l, row) in self.rows.iter().enumerate() {
            for &i in row {
                supports[i].push(l);
            }
        }
        ColumnSupport { supports }
    }

    /// Same matrix restricted to the listed tests, in the given order.
    pub fn select(&self, tests: &[usize]) -> Result<TestMatrix> {
        let rows = tests
            .iter()
            .map(|&l| {
                self.rows
                    .get(l)
                    .cloned()
                    .ok_or_else(|| Error::Structure(format!("test index {l} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        TestMatrix::new(self.n, rows)
    }

    /// Replaces item `from` by `to` in test `l`.
    pub fn with_substitution(&self, l: usize, from: usize, to: usize) -> Result<TestMatrix> {
        let mut rows = self.rows.clone();
        let row = rows
            .get_mut(l)
            .ok_or_else(|| Error::Structure(format!("test index {l} out of range")))?;
        let pos = row
            .iter()
            .position(|&i| i == from)
            .ok_or_else(|| Error::Structure(format!("item {from} not in test {l}")))?;
        row[pos] = to;
        TestMatrix::new(self.n, rows)
    }
}

impl fmt::Display for TestMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} rows=", self.n)?;
        for (l, row) in self.rows.iter().enumerate() {
            if l > 0 {
                f.write_str("|")?;
            }
            let items: Vec<String> = row.iter().map(|i| i.to_string()).collect();
            f.write_str(&items.join(","))?;
        }
        Ok(())
    }
}

/// For each item, the tests that contain it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSupport {
    supports: Vec<Vec<usize>>,
}

impl ColumnSupport {
    pub fn of(&self, item: usize) -> &[usize] {
        &self.supports[item]
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.supports.iter().map(Vec::as_slice)
    }
}
