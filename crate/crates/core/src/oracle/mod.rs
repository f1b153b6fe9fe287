//! Exact ground truth on small instances: outcome laws by enumeration,
//! inclusion-exclusion, and the entropy inequalities checked against them.

mod checks;
mod dist;
mod matrix;
mod report;
mod suite;

pub use checks::{
    canonical_placements, shared_test_entropy_bound, verify_appendix_identities,
    verify_cond_entropy_lb, verify_lemma1_min, verify_mt_weak, verify_thm3, AppendixReport,
    CondEntropyReport, Lemma1Report, MovedItem, MtReport, Thm3Report, EQUALITY_TOLERANCE,
    EXACT_TOLERANCE, MAX_APPENDIX_TESTS, MAX_LEMMA1_ITEMS, MAX_LEMMA1_ROWS, MAX_MT_ITEMS,
    MAX_MT_TESTS,
};
pub use dist::{
    conditional_item_entropy, enumerate_distribution, joint_entropy, prob_all_positive_incl_excl,
    JointDistribution, MAX_ENUM_ITEMS, MAX_ENUM_TESTS, MAX_INCL_EXCL_TESTS,
};
pub use matrix::{ColumnSupport, TestMatrix};
pub use report::{digest, CheckRecord, Relation, Report};
pub use suite::{
    appendix_checks, common_item_family, distribution_checks, incl_excl_fuzz, lemma1_exhaustive,
    lemma1_weight_tuples, mt_weak_fuzz, run_suite, thm3_family, SuiteConfig,
};
