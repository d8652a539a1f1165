mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use privjourney::coding::{cohen_kappa, read_label_pairs};
use privjourney::fixtures::DOUBLE_CODED_TSV;

use common::brute_kappa;

const LABELS: [&str; 5] = ["L1", "L2", "L3", "L4", "L5"];

fn random_table(rng: &mut ChaCha8Rng) -> (Vec<&'static str>, Vec<&'static str>) {
    let n = rng.random_range(2..60);
    let k = rng.random_range(2..=LABELS.len());
    let agree = rng.random_range(0.0..1.0);
    let a: Vec<&str> = (0..n).map(|_| LABELS[rng.random_range(0..k)]).collect();
    let b = a.iter().map(|&x| if rng.random_bool(agree) { x } else { LABELS[rng.random_range(0..k)] }).collect();
    (a, b)
}

#[test]
fn matches_brute_force_on_random_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut checked = 0;
    while checked < 100 {
        let (a, b) = random_table(&mut rng);
        let expected = brute_kappa(&a, &b);
        if !expected.is_finite() {
            continue;
        }
        let got = cohen_kappa(&a, &b).unwrap();
        assert!((got - expected).abs() < 1e-9, "{a:?} {b:?}: {got} vs {expected}");
        checked += 1;
    }
}

#[test]
fn identical_sequences_are_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let (a, _) = random_table(&mut rng);
        assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
    }
}

#[test]
fn hand_computed_table_is_zero() {
    // p_o = 2/4, p_e = (2/4)(2/4) + (2/4)(2/4) = 1/2, so kappa = 0
    let (a, b) = read_label_pairs(DOUBLE_CODED_TSV.as_bytes(), None, None).unwrap();
    assert_eq!(a, ["X", "X", "Y", "Y"]);
    assert_eq!(b, ["X", "Y", "X", "Y"]);
    assert_eq!(cohen_kappa(&a, &b).unwrap(), 0.0);
}

#[test]
fn symmetric_and_label_blind() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let (a, b) = random_table(&mut rng);
        let Ok(k) = cohen_kappa(&a, &b) else { continue };
        assert!((k - cohen_kappa(&b, &a).unwrap()).abs() < 1e-12);
        let rename = |v: &[&str]| v.iter().map(|x| format!("renamed-{x}")).collect::<Vec<_>>();
        assert!((k - cohen_kappa(&rename(&a), &rename(&b)).unwrap()).abs() < 1e-12);
        assert!((-1.0..=1.0).contains(&k));
    }
}

#[test]
fn error_cases() {
    assert_eq!(cohen_kappa(&["a"], &["a", "b"]).unwrap_err().name(), "LengthMismatch");
    assert_eq!(cohen_kappa::<&str>(&[], &[]).unwrap_err().name(), "EmptySequences");
    // one rater always says X: p_e = p_o, so kappa is 0, not an error
    assert_eq!(cohen_kappa(&["X", "X"], &["X", "Y"]).unwrap(), 0.0);
}
