//! Acceptance suite: every gate criterion as one test, each printing a
//! PASS/FAIL line with its elapsed time. Tolerances and depths are pinned
//! here, in code.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hcops::cli;
use hcops::coeffring::{PiCoefficient, Rational};
use hcops::combinatorics::{newton_elementary, power_sums_from_elementary};
use hcops::ncalgebra::{reference, Generator, Operator, Word};
use hcops::radialgeom::{
    compute_b, compute_b_with_margin, BValue, RadialGeometry, JET_ORDER_MARGIN,
};
use hcops::report;
use hcops::schemes::SchemeCache;
use hcops::spectral;

fn report_criterion(number: u32, label: &str, pass: bool, elapsed: Duration, budget: Duration) {
    let within = elapsed <= budget;
    println!(
        "criterion {number} ({label}): {} in {:.2?} (budget {:?})",
        if pass && within { "PASS" } else { "FAIL" },
        elapsed,
        budget,
    );
    assert!(pass, "criterion {number} ({label}) failed");
    assert!(
        within,
        "criterion {number} ({label}) exceeded its runtime budget: {elapsed:.2?}"
    );
}

#[test]
fn criterion_1_operator_table_reproduction() {
    let start = Instant::now();
    let mut cache = SchemeCache::new();
    let mut pass = true;
    for (i, expected) in reference::d_table().iter().enumerate() {
        let k = i as u64 + 1;
        let computed = cache.compute_d(k);
        if &computed != expected {
            eprintln!("D_{k} mismatch: computed {computed}");
            pass = false;
        }
    }
    report_criterion(
        1,
        "operator table k=1..6",
        pass,
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_2_weight_theorems() {
    let start = Instant::now();
    let lines = cli::weight_suite(25, 12, 10, 6).expect("suite runs");
    if let Some(failure) = report::first_failure(&lines) {
        eprintln!("first failing weight check: {failure:?}");
    }
    report_criterion(
        2,
        "weight closed forms k<=25, alpha/Z n<=10",
        report::all_pass(&lines),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_3_integer_table_suite() {
    let start = Instant::now();
    let lines = cli::tu_suite(30, 20, 8).expect("suite runs");
    if let Some(failure) = report::first_failure(&lines) {
        eprintln!("first failing integer check: {failure:?}");
    }
    report_criterion(
        3,
        "T/U sums n<=30, matrix identities n<=20, cross-link n,j<=8",
        report::all_pass(&lines),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_4_hankel_and_orthogonal_suite() {
    let start = Instant::now();
    let mut lines = cli::hankel_suite(20, 10, 8, 8);
    lines.extend(cli::ortho_suite(40, 8));
    if let Some(failure) = report::first_failure(&lines) {
        eprintln!("first failing hankel/ortho check: {failure:?}");
    }
    report_criterion(
        4,
        "hankel determinants n<=20, transform n,k<=8, evaluations n<=40",
        report::all_pass(&lines),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num = rng.gen_range(1..=50i64);
    let den = rng.gen_range(1..=20i64);
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[test]
fn criterion_5_euclidean_3ball_nullity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0005);
    let mut cache = SchemeCache::new();
    let mut pass = true;
    for _ in 0..3 {
        let radius = random_rational(&mut rng);
        let geometry = RadialGeometry::EuclideanBall {
            dim: 3,
            radius: radius.clone(),
        };
        let b2 = compute_b(2, &geometry, &mut cache).expect("pipeline runs");
        let expected = BValue::Exact(PiCoefficient::from_rational(-radius.clone().recip()));
        if b2 != expected {
            eprintln!("B_2 at radius {radius}: {b2} instead of {expected}");
            pass = false;
        }
        for k in 3..=10 {
            let b = compute_b(k, &geometry, &mut cache).expect("pipeline runs");
            if b != BValue::Exact(PiCoefficient::zero()) {
                eprintln!("B_{k} at radius {radius}: {b} instead of 0");
                pass = false;
            }
        }
    }
    report_criterion(
        5,
        "3-ball B_2 = -1/R and B_3..B_10 = 0, exactly",
        pass,
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_6_spectral_cross_check() {
    let start = Instant::now();
    let mut cache = SchemeCache::new();
    let mut weights = hcops::schemes::ScalarWeights::new(8).expect("tables build");
    let report = spectral::standard_cross_check(30, &mut weights, &mut cache).expect("runs");
    if !report.all_pass() {
        for line in cli::spectral_lines(&report) {
            if !line.pass {
                eprintln!("failing spectral check: {line:?}");
            }
        }
    }
    report_criterion(
        6,
        "interval beta extraction, ball/cap flow constants, descent identity",
        report.all_pass(),
        start.elapsed(),
        Duration::from_secs(300),
    );
}

const PROPERTY_INSTANCES: usize = 120;

fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word::new(
        (0..len)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Generator::N
                } else {
                    Generator::Lap
                }
            })
            .collect(),
    )
}

fn random_operator(rng: &mut ChaCha8Rng, max_words: usize, max_len: usize) -> Operator {
    let words = rng.gen_range(0..=max_words);
    let mut out = Operator::zero();
    for _ in 0..words {
        let q = Rational::new(
            BigInt::from(rng.gen_range(-9..=9i64)),
            BigInt::from(rng.gen_range(1..=5i64)),
        );
        out = out.add(&Operator::from_term(
            random_word(rng, max_len),
            PiCoefficient::from_rational(q),
        ));
    }
    out
}

fn strip_identity(op: &Operator) -> Operator {
    let mut out = Operator::zero();
    for (w, c) in op.terms() {
        if !w.is_identity() {
            out = out.add(&Operator::from_term(w.clone(), c.clone()));
        }
    }
    out
}

#[test]
fn criterion_7_property_suites() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0007);
    let n = Operator::generator(Generator::N);
    let lap = Operator::generator(Generator::Lap);

    // Bar right-module law and reconstruction.
    for _ in 0..PROPERTY_INSTANCES {
        let a = random_operator(&mut rng, 4, 5);
        let b = strip_identity(&random_operator(&mut rng, 4, 5));
        assert_eq!(
            a.mul(&b).bar_part().unwrap(),
            a.mul(&b.bar_part().unwrap()),
            "right-module law"
        );
        let rebuilt = b
            .bar_part()
            .unwrap()
            .mul(&n)
            .add(&b.tilde_part().unwrap().mul(&lap));
        assert_eq!(rebuilt, b, "bar/tilde reconstruction");
    }

    // Weight multiplicativity.
    for _ in 0..PROPERTY_INSTANCES {
        let a = random_operator(&mut rng, 4, 5);
        let b = random_operator(&mut rng, 4, 5);
        assert_eq!(a.mul(&b).weight(), a.weight().mul(&b.weight()));
    }

    // Newton identity round-trip.
    for _ in 0..PROPERTY_INSTANCES {
        let len = rng.gen_range(1..=6);
        let sums: Vec<Rational> = (0..len)
            .map(|_| {
                Rational::new(
                    BigInt::from(rng.gen_range(-20..=20i64)),
                    BigInt::from(rng.gen_range(1..=6i64)),
                )
            })
            .collect();
        assert_eq!(
            power_sums_from_elementary(&newton_elementary(&sums)),
            sums,
            "newton round-trip"
        );
    }

    // Jet truncation stability: widening the truncation margin never moves
    // an exact boundary invariant.
    let mut cache = SchemeCache::new();
    for _ in 0..PROPERTY_INSTANCES {
        let k = rng.gen_range(2..=8u64);
        let dim = rng.gen_range(2..=5u32);
        let geometry = RadialGeometry::EuclideanBall {
            dim,
            radius: random_rational(&mut rng),
        };
        let narrow = compute_b_with_margin(k, &geometry, &mut cache, JET_ORDER_MARGIN).unwrap();
        let wide = compute_b_with_margin(k, &geometry, &mut cache, JET_ORDER_MARGIN + 5).unwrap();
        assert_eq!(narrow, wide, "truncation stability k={k} dim={dim}");
    }

    report_criterion(
        7,
        "randomized property suites, 120 instances each",
        true,
        start.elapsed(),
        Duration::from_secs(300),
    );
}

/// The rigidity statements themselves have no computational surface; this
/// suite is their acceptance stand-in, so the full identity battery must
/// also pass end to end through the command interface.
#[test]
fn verify_all_command_passes() {
    let cli = cli::Cli {
        format: cli::OutputFormat::Records,
        precision: 30,
        jobs: 0,
        command: cli::Command::VerifyAll,
    };
    let mut out = Vec::new();
    let pass = cli::run(&cli, &mut out).expect("verify-all runs");
    assert!(pass, "verify-all reported a failing check");
    // Every record parses and carries a verdict.
    for line in out.split(|&b| b == b'\n').filter(|l| !l.is_empty()) {
        let value: serde_json::Value = serde_json::from_slice(line).expect("valid JSON record");
        assert!(value.get("pass").is_some());
    }
}
