//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails or exceeds its time budget.

// `!(a < b)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gt_converse::adaptive::{simulate, SimConfig};
use gt_converse::bounds::{
    adaptivity_gap, counting_bound, crossover_delta, individual_testing_bound, main_bound,
    quantization_bound, relaxed_crossover_delta, BoundQuery, DELTA_STAR,
};
use gt_converse::cli;
use gt_converse::entropy::{f_dk, g_dk, g_dk_inverse, h2, DefectModel};
use gt_converse::oracle::{
    incl_excl_fuzz, lemma1_exhaustive, mt_weak_fuzz, thm3_family, verify_mt_weak, verify_thm3,
    CheckRecord, SuiteConfig, TestMatrix,
};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, "delta* cutoff", 1, delta_star_cutoff),
    (2, "crossover", 10, crossover),
    (3, "adaptivity gap", 10, gap),
    (4, "bound curve shape", 60, curve_shape),
    (5, "oracle identity suite", 60, oracle_identities),
    (6, "common-item entropy bound", 60, thm3),
    (7, "weak Madiman-Tetali", 30, mt_weak),
    (8, "f and g calculus", 10, calculus),
    (9, "adaptive simulation", 30, adaptive_sim),
    (10, "determinism", 60, determinism),
];

fn main() -> ExitCode {
    let mut failed = 0;
    for (id, name, budget, check) in CRITERIA {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(budget);
        let ok = outcome.passed && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {name:<30} {} ({}; {:.3}s of {budget}s)",
            if ok { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        CRITERIA.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn query(delta: f64, epsilon: f64) -> BoundQuery {
    BoundQuery::new(delta, epsilon).expect("valid query")
}

fn all_pass(records: &[CheckRecord]) -> (bool, String) {
    let failures: Vec<&CheckRecord> = records.iter().filter(|r| !r.passed()).collect();
    let worst = records
        .iter()
        .map(CheckRecord::slack)
        .fold(f64::INFINITY, f64::min);
    (
        failures.is_empty() && !records.is_empty(),
        format!(
            "{} checks, {} failed, min slack {worst:e}",
            records.len(),
            failures.len()
        ),
    )
}

fn delta_star_cutoff() -> Outcome {
    let exact = (3.0 - 5f64.sqrt()) / 2.0;
    let mut ok = (DELTA_STAR - exact).abs() <= 1e-9;
    ok &= individual_testing_bound(&query(exact + 1e-9, 0.0)).applicable;
    ok &= !individual_testing_bound(&query(exact - 1e-9, 0.0)).applicable;
    let mut worst: f64 = f64::NEG_INFINITY;
    for i in 0..=1000 {
        let d = exact + (0.999 - exact) * i as f64 / 1000.0;
        let diff = h2((1.0 - d).powi(2)) - h2(d);
        worst = worst.max(diff);
        ok &= diff <= 1e-9;
    }
    let d = exact - 1e-3;
    let below = h2((1.0 - d).powi(2)) - h2(d);
    ok &= below > 0.0;
    Outcome::new(
        ok,
        format!("max H((1-d)^2)-H(d) above cutoff {worst:.3e}, at cutoff-1e-3 {below:.3e}"),
    )
}

fn crossover() -> Outcome {
    match crossover_delta(0.0) {
        Ok(c) => {
            let relaxed = relaxed_crossover_delta(0.0).map_or(f64::NAN, |r| r);
            Outcome::new(
                (c - 0.3471).abs() <= 5e-4,
                format!("crossover {c:.6}, expected 0.3471 +- 5e-4; real row weight k0 diagnostic {relaxed:.6}"),
            )
        }
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

fn gap() -> Outcome {
    match adaptivity_gap(0.0) {
        Ok((lo, hi)) => Outcome::new(
            (lo - 0.3471).abs() <= 5e-4 && (hi - 0.381966).abs() <= 1e-6,
            format!("({lo:.6}, {hi:.6}), expected (0.3471 +- 5e-4, 0.381966 +- 1e-6)"),
        ),
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

fn curve_shape() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for i in 0..=88 {
        let d = 0.05 + 0.005 * i as f64;
        let q = query(d, 0.0);
        let c = counting_bound(&q).rate();
        let qz = quantization_bound(&q).rate();
        let m = match main_bound(&q) {
            Ok(r) => r.rate(),
            Err(e) => {
                notes.push(format!("main at {d}: {e}"));
                ok = false;
                continue;
            }
        };
        if !(m >= qz - 1e-9 && qz >= c - 1e-9) {
            ok = false;
            notes.push(format!("order broken at {d:.3}"));
        }
        if d >= 0.348 && (m - 1.0).abs() > 1e-6 {
            ok = false;
            notes.push(format!("main {m} != 1 at {d:.3}"));
        }
    }
    for k in 2..=6 {
        let d = 1.0 - 2f64.powf(-1.0 / k as f64);
        let q = query(d, 0.0);
        let (c, qz) = (counting_bound(&q).rate(), quantization_bound(&q).rate());
        if (qz - c).abs() > 1e-9 {
            ok = false;
            notes.push(format!("quantization != counting at k={k}"));
        }
        let off = query(d + 0.01, 0.0);
        if quantization_bound(&off).rate() <= counting_bound(&off).rate() {
            ok = false;
            notes.push(format!("quantization not above counting near k={k}"));
        }
    }
    let detail = if notes.is_empty() {
        "89 grid points, 5 unbiased-weight points".to_string()
    } else {
        notes.join("; ")
    };
    Outcome::new(ok, detail)
}

fn oracle_identities() -> Outcome {
    let cfg = SuiteConfig {
        max_n: 12,
        fuzz_cases: 500,
        tolerance: 1e-12,
        ..SuiteConfig::default()
    };
    let mut records = match incl_excl_fuzz(&cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let fuzz = records.len();
    match lemma1_exhaustive(&SuiteConfig { max_n: 9, ..cfg }) {
        Ok(r) => records.extend(r),
        Err(e) => return Outcome::new(false, e.to_string()),
    }
    let (ok, detail) = all_pass(&records);
    Outcome::new(
        ok && fuzz >= 500,
        format!("{fuzz} incl-excl cases; {detail}"),
    )
}

fn thm3() -> Outcome {
    let cfg = SuiteConfig {
        max_n: 12,
        tolerance: 1e-12,
        ..SuiteConfig::default()
    };
    let records = match thm3_family(&cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let (mut ok, detail) = all_pass(&records);
    let m = TestMatrix::new(3, vec![vec![0, 1], vec![0, 2]]).expect("matrix");
    let r = verify_thm3(&m, &DefectModel::new(0.5).expect("delta")).expect("thm3");
    ok &= (r.exact - 1.5487950).abs() <= 1e-6 && (r.bound - 1.5487950).abs() <= 1e-6;
    Outcome::new(
        ok,
        format!("{detail}; equality case {:.7} vs {:.7}", r.exact, r.bound),
    )
}

fn mt_weak() -> Outcome {
    let cfg = SuiteConfig {
        tolerance: 1e-12,
        ..SuiteConfig::default()
    };
    let records = match mt_weak_fuzz(&cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let (mut ok, detail) = all_pass(&records);
    let m = TestMatrix::new(3, vec![vec![0, 1], vec![1, 2]]).expect("matrix");
    let r = verify_mt_weak(&m, &DefectModel::new(0.5).expect("delta")).expect("mt");
    ok &= (r.lhs - 1.5487950).abs() <= 1e-6 && (r.rhs - 1.5856756).abs() <= 1e-6 && r.lhs <= r.rhs;
    Outcome::new(
        ok,
        format!("{detail}; worked example {:.7} <= {:.7}", r.lhs, r.rhs),
    )
}

fn calculus() -> Outcome {
    let deltas = [0.1, 0.2, 0.3, 0.38];
    let h = 1e-3;
    let mut bad_f = 0;
    let mut bad_g = 0;
    let mut worst_round_trip: f64 = 0.0;
    for &d in &deltas {
        let model = DefectModel::new(d).expect("delta");
        for k in 2..=12 {
            for i in 1..8000 {
                let s = i as f64 * h;
                let (a, b, c) = (
                    f_dk(&model, k, s - h),
                    f_dk(&model, k, s),
                    f_dk(&model, k, s + h),
                );
                if !(c < b) || a - 2.0 * b + c <= -1e-8 {
                    bad_f += 1;
                }
            }
        }
        for k in 1..=12 {
            let dt = 1e-3;
            for i in 1..3000 {
                let t = i as f64 * dt;
                let (a, b, c) = (
                    g_dk(&model, k, t - dt),
                    g_dk(&model, k, t),
                    g_dk(&model, k, t + dt),
                );
                if !(c > b) || a - 2.0 * b + c > 1e-8 {
                    bad_g += 1;
                }
            }
            for j in 0..=200 {
                let y = 2.0 * j as f64 / 200.0;
                match g_dk_inverse(&model, k, y) {
                    Ok(t) => {
                        worst_round_trip = worst_round_trip.max((g_dk(&model, k, t) - y).abs())
                    }
                    Err(_) => worst_round_trip = f64::INFINITY,
                }
            }
        }
    }
    Outcome::new(
        bad_f == 0 && bad_g == 0 && worst_round_trip <= 1e-9,
        format!(
            "f violations {bad_f}, g violations {bad_g}, worst round trip {worst_round_trip:.2e}"
        ),
    )
}

fn adaptive_sim() -> Outcome {
    let r = simulate(&SimConfig::new(1000, 0.2, 400, 7).expect("config"));
    let half = simulate(&SimConfig::new(1000, 0.5, 50, 7).expect("config"));
    let ok = r.error_count == 0
        && (r.mean_tests_per_item - 0.78).abs() <= 4.0 * r.stderr
        && half.mean_tests_per_item == 1.0
        && half.error_count == 0;
    Outcome::new(
        ok,
        format!(
            "mean {:.6} stderr {:.2e} z {:.3} errors {}; delta=0.5 mean {}",
            r.mean_tests_per_item,
            r.stderr,
            r.z_score(),
            r.error_count,
            half.mean_tests_per_item
        ),
    )
}

fn capture(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(
        std::iter::once("gtbounds").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, out)
}

fn determinism() -> Outcome {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let mut files = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("sweep{run}.csv"));
        let p = path.to_str().expect("utf8 path").to_string();
        let (code, _) = capture(&[
            "sweep", "--min", "0.01", "--max", "0.5", "--step", "0.001", "--out", &p, "--format",
            "svg",
        ]);
        if code != 0 {
            return Outcome::new(false, format!("sweep exited {code}"));
        }
        let csv = std::fs::read(&path).unwrap_or_default();
        let svg = std::fs::read(path.with_extension("svg")).unwrap_or_default();
        files.push((csv, svg));
    }
    let stdout_sweep = (
        capture(&["sweep", "--step", "0.01"]),
        capture(&["sweep", "--step", "0.01"]),
    );
    let sim_args = [
        "simulate", "--n", "1000", "--delta", "0.2", "--trials", "400", "--seed", "7",
    ];
    let (sim_a, sim_b) = (capture(&sim_args), capture(&sim_args));
    let ok = !files[0].0.is_empty()
        && !files[0].1.is_empty()
        && files[0] == files[1]
        && stdout_sweep.0 == stdout_sweep.1
        && sim_a.0 == 0
        && sim_a == sim_b;
    Outcome::new(
        ok,
        format!(
            "csv {} bytes, svg {} bytes, simulate {} bytes",
            files[0].0.len(),
            files[0].1.len(),
            sim_a.1.len()
        ),
    )
}
