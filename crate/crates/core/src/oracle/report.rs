use std::fmt;

use sha2::{Digest, Sha256};

/// How `lhs` must relate to `rhs` for a check to pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `lhs ≤ rhs + tol`
    AtMost,
    /// `lhs ≥ rhs − tol`
    AtLeast,
    /// `|lhs − rhs| ≤ tol`
    Equal,
}

/// One line of a verification report:
/// `CHECK <name>@<digest> lhs=<v> rhs=<v> slack=<v> PASS|FAIL`.
///
/// `slack` is the signed margin: nonnegative when the relation holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub digest: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub tolerance: f64,
}

impl CheckRecord {
    pub fn new(
        name: impl Into<String>,
        inputs: &str,
        lhs: f64,
        rhs: f64,
        relation: Relation,
        tolerance: f64,
    ) -> Self {
        CheckRecord {
            name: name.into(),
            digest: digest(inputs),
            lhs,
            rhs,
            relation,
            tolerance,
        }
    }

    pub fn slack(&self) -> f64 {
        match self.relation {
            Relation::AtMost => self.rhs - self.lhs,
            Relation::AtLeast => self.lhs - self.rhs,
            Relation::Equal => -(self.lhs - self.rhs).abs(),
        }
    }

    pub fn passed(&self) -> bool {
        self.slack() >= -self.tolerance
    }
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CHECK {}@{} lhs={:e} rhs={:e} slack={:e} {}",
            self.name,
            self.digest,
            self.lhs,
            self.rhs,
            self.slack(),
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// First 8 bytes of SHA-256, hex.
pub fn digest(inputs: &str) -> String {
    let h = Sha256::digest(inputs.as_bytes());
    h[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// A set of checks produced by one verification run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    pub fn extend(&mut self, rs: impl IntoIterator<Item = CheckRecord>) {
        self.records.extend(rs);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(CheckRecord::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.passed())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
