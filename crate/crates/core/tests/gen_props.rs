use std::collections::BTreeSet;

use wsp_core::gen::{generate, generate_suite, GenParams, Grid};
use wsp_core::model::serialize_instance;
use wsp_core::{Constraint, StepId};

#[test]
fn authorization_sizes_stay_in_bounds() {
    for seed in 0..1000u64 {
        let k = 1 + (seed % 30) as usize;
        let mut p = GenParams::new(k, 20, (seed % 101) as u32, 0, seed);
        if k >= 5 {
            p.b = 2;
        }
        let inst = generate(&p).unwrap();
        let cap = k.div_ceil(2);
        for u in inst.users() {
            let size = inst.auth(u).len();
            assert!((1..=cap).contains(&size), "seed {seed}: |A({u})| = {size}");
        }
        for c in inst.constraints() {
            c.check_well_formed(k).unwrap();
        }
    }
}

#[test]
fn not_equals_pairs_are_distinct_and_counted() {
    for seed in 0..300u64 {
        let k = 2 + (seed % 25) as usize;
        let d = (seed * 13 % 101) as u32;
        let p = GenParams::new(k, 5, d, 0, seed);
        let inst = generate(&p).unwrap();
        let pairs: Vec<(StepId, StepId)> = inst
            .constraints()
            .iter()
            .filter_map(|c| match *c {
                Constraint::NotEquals(s, t) => Some((s.min(t), s.max(t))),
                _ => None,
            })
            .collect();
        let distinct: BTreeSet<_> = pairs.iter().collect();
        assert_eq!(distinct.len(), pairs.len());
        assert!(pairs.iter().all(|(s, t)| s != t));
        let all = k * (k - 1) / 2;
        let expected = (d as usize * all * 2 + 100) / 200;
        assert_eq!(pairs.len(), expected, "k {k} d {d}");
    }
    assert_eq!(GenParams::new(20, 1, 10, 0, 0).not_equals_count(), 19);
}

#[test]
fn counting_scopes_have_the_requested_shape() {
    let p = GenParams::new(15, 150, 20, 12, 3);
    let inst = generate(&p).unwrap();
    let (mut most, mut least) = (0, 0);
    for c in inst.constraints() {
        match *c {
            Constraint::AtMost { r, scope } => {
                most += 1;
                assert_eq!((r, scope.len()), (3, 5));
            }
            Constraint::AtLeast { r, scope } => {
                least += 1;
                assert_eq!((r, scope.len()), (3, 5));
            }
            _ => {}
        }
    }
    assert_eq!((most, least), (12, 12));
}

#[test]
fn step_frequency_in_at_most_scopes_is_uniform() {
    let (k, t, b) = (10usize, 5usize, 4usize);
    let mut counts = [0u64; 10];
    let mut scopes = 0u64;
    for seed in 0..2000u64 {
        let inst = generate(&GenParams::new(k, 10, 0, b, seed)).unwrap();
        for c in inst.constraints() {
            if let Constraint::AtMost { scope, .. } = *c {
                scopes += 1;
                for s in scope {
                    counts[s.index()] += 1;
                }
            }
        }
    }
    let p = t as f64 / k as f64;
    let mean = scopes as f64 * p;
    let sigma = (scopes as f64 * p * (1.0 - p)).sqrt();
    for (s, &c) in counts.iter().enumerate() {
        assert!(
            (c as f64 - mean).abs() <= 3.0 * sigma,
            "step {s}: {c} vs {mean} ± {}",
            3.0 * sigma
        );
    }
}

#[test]
fn generation_is_deterministic_per_seed() {
    let p = GenParams::new(20, 200, 10, 10, 1);
    assert_eq!(
        serialize_instance(&generate(&p).unwrap()),
        serialize_instance(&generate(&p).unwrap())
    );
    let grid = Grid::parse("k=8:d=10,20:b=2..4..2").unwrap();
    let a: Vec<String> = generate_suite(&grid, 5)
        .unwrap()
        .iter()
        .map(|e| serialize_instance(&e.instance))
        .collect();
    let b: Vec<String> = generate_suite(&grid, 5)
        .unwrap()
        .iter()
        .map(|e| serialize_instance(&e.instance))
        .collect();
    assert_eq!(a, b);
}

#[test]
fn grid_suites_have_the_expected_sizes() {
    for (text, len) in [
        ("k=20:d=10,20,30:b=10..38..2", 45),
        ("k=15:d=10,20,30:b=2..32..2", 48),
        ("k=25:d=10,20,30:b=22..36..2", 24),
    ] {
        let grid = Grid::parse(text).unwrap();
        assert_eq!(grid.len(), len);
    }
    let suite = generate_suite(&Grid::parse("k=15:d=10,20,30:b=2..32..2").unwrap(), 7).unwrap();
    assert_eq!(suite.len(), 48);
    assert_eq!(suite[0].label, "15-2.10");
    assert_eq!(suite[47].label, "15-32.30");
    assert!(suite
        .iter()
        .all(|e| e.instance.n() == 150 && e.instance.k() == 15));
    let labels: BTreeSet<&str> = suite.iter().map(|e| e.label.as_str()).collect();
    assert_eq!(labels.len(), 48);
}
