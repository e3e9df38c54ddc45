//! Classification against exhaustive orbit enumeration at desk scale.

use pgcm::action::{apply, orbit_partition, CharMatrix, ExponentType, IsoTransform};
use pgcm::classify::{classify, classify_tiny, verify_transversal};
use pgcm::family::{enumerate_families, representative, FamilyLabel, Series};
use pgcm::field::Fp;
use pgcm::mat::{space_size, Mat3};
use pgcm::{CaseTag, PrimeContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx(p: u32) -> PrimeContext {
    PrimeContext::new(p).unwrap()
}

fn et(m: (u32, u32, u32)) -> ExponentType {
    ExponentType::new(m.0, m.1, m.2).unwrap()
}

#[test]
fn classify_examples_from_tables() {
    let f3 = ctx(3);
    // I3 at the equal type is (J1).
    let w = CharMatrix::new(f3, et((1, 1, 1)), Mat3::identity());
    assert_eq!(classify(&w).unwrap().0.to_string(), "J1");
    // Zero matrix in the strict case is (C10).
    let f5 = ctx(5);
    let w = CharMatrix::new(f5, et((3, 2, 1)), Mat3::zero());
    assert_eq!(classify(&w).unwrap().0.to_string(), "C10");
    // (B18) with t = 2.
    let w = CharMatrix::new(
        f3,
        et((3, 2, 1)),
        Mat3::parse(&f3, "0,0,0;0,0,1;0,2,0").unwrap(),
    );
    assert_eq!(classify(&w).unwrap().0.to_string(), "B18[t=2]");
    // Tiny case: zero matrix is (S1).
    let f2 = ctx(2);
    let w = CharMatrix::new(f2, et((1, 1, 1)), Mat3::zero());
    assert_eq!(classify_tiny(&w).unwrap().to_string(), "S1");
}

#[test]
fn idempotent_on_representatives() {
    for (p, m) in [
        (2u32, (3u32, 2u32, 1u32)),
        (2, (3, 2, 2)),
        (2, (2, 2, 1)),
        (2, (2, 1, 1)),
        (2, (2, 2, 2)),
        (3, (3, 2, 1)),
        (3, (2, 1, 1)),
        (3, (2, 2, 1)),
        (3, (1, 1, 1)),
        (5, (3, 2, 1)),
        (5, (2, 1, 1)),
        (5, (2, 2, 1)),
        (5, (1, 1, 1)),
        (7, (3, 2, 1)),
        (7, (2, 1, 1)),
        (7, (2, 2, 1)),
        (7, (1, 1, 1)),
    ] {
        let c = ctx(p);
        let e = et(m);
        for label in enumerate_families(&c, &e).unwrap() {
            let rep = representative(&c, &e, &label).unwrap();
            let (got, witness) = classify(&rep).unwrap();
            assert_eq!(got, label, "p={p} m={m:?}");
            // The witness fixes the representative.
            assert_eq!(apply(&witness, &rep).unwrap().w, rep.w);
        }
    }
}

#[test]
fn transversal_p2_all_action_tags() {
    for (m, want) in [
        ((3u32, 2u32, 1u32), 34usize),
        ((3, 2, 2), 22),
        ((2, 2, 1), 22),
        ((2, 1, 1), 23),
        ((2, 2, 2), 12),
    ] {
        let c = ctx(2);
        let report = verify_transversal(&c, &et(m)).unwrap();
        assert!(report.passed(), "m={m:?}: {:?}", &report.violations[..report.violations.len().min(5)]);
        assert_eq!(report.orbit_count, want, "m={m:?}");
        assert_eq!(report.total() as u64, space_size(2));
    }
}

#[test]
fn transversal_p3_all_tags() {
    for (m, want) in [
        ((3u32, 2u32, 1u32), 46usize),
        ((2, 1, 1), 30),
        ((2, 2, 1), 30),
        ((1, 1, 1), 16),
    ] {
        let c = ctx(3);
        let report = verify_transversal(&c, &et(m)).unwrap();
        assert!(report.passed(), "m={m:?}: {:?}", &report.violations[..report.violations.len().min(5)]);
        assert_eq!(report.orbit_count, want, "m={m:?}");
        assert_eq!(report.total() as u64, space_size(3));
    }
}

#[test]
fn orbit_invariance_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (p, m) in [
        (2u32, (3u32, 2u32, 1u32)),
        (2, (2, 1, 1)),
        (2, (2, 2, 2)),
        (3, (3, 2, 1)),
        (3, (2, 1, 1)),
        (3, (2, 2, 1)),
        (3, (1, 1, 1)),
        (5, (3, 2, 1)),
    ] {
        let c = ctx(p);
        let e = et(m);
        let tag = pgcm::action::case_tag(&c, &e);
        for _ in 0..300 {
            let idx = rng.gen_range(0..space_size(p) as u32);
            let w = CharMatrix::new(c, e, Mat3::from_index(p, idx));
            let t = loop {
                let params: [Fp; 9] = std::array::from_fn(|i| {
                    if i == 0 && tag == CaseTag::P2Special {
                        Fp(1)
                    } else {
                        Fp(rng.gen_range(0..p))
                    }
                });
                if let Ok(t) = IsoTransform::from_params(c, e, params) {
                    break t;
                }
            };
            let moved = apply(&t, &w).unwrap();
            assert_eq!(
                classify(&w).unwrap().0,
                classify(&moved).unwrap().0,
                "p={p} m={m:?} idx={idx}"
            );
        }
    }
}

#[test]
fn bottom_duality_matches_top() {
    // Transpose-flip duality: the Bottom label mirrors the Top label of the
    // conjugated transpose, series-for-series, index-for-index.
    let c = ctx(3);
    let bottom = et((2, 2, 1));
    let top = et((2, 1, 1));
    let perm = Mat3::parse(&c, "0,0,1;1,0,0;0,1,0").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..400 {
        let idx = rng.gen_range(0..space_size(3) as u32);
        let w = Mat3::from_index(3, idx);
        let b_label = classify(&CharMatrix::new(c, bottom, w)).unwrap().0;
        let v = perm.mul(&w.transpose(), &c).mul(&perm.transpose(), &c);
        let t_label = classify(&CharMatrix::new(c, top, v)).unwrap().0;
        let mirrored = match t_label.series {
            Series::D => Series::G,
            Series::E => Series::H,
            Series::F => Series::I,
            s => panic!("unexpected series {s}"),
        };
        assert_eq!(
            b_label,
            FamilyLabel { series: mirrored, index: t_label.index, params: t_label.params }
        );
    }
}

#[test]
fn tiny_partition_has_ten_classes() {
    let c = ctx(2);
    let e = et((1, 1, 1));
    let mut counts = std::collections::BTreeMap::new();
    for idx in 0..space_size(2) as u32 {
        let w = CharMatrix::new(c, e, Mat3::from_index(2, idx));
        let label = classify_tiny(&w).unwrap();
        *counts.entry(label.to_string()).or_insert(0usize) += 1;
    }
    assert_eq!(counts.len(), 10, "{counts:?}");
    assert_eq!(counts.values().sum::<usize>(), 512);
    // Each reference matrix lands on its own label.
    for k in 1..=10u8 {
        let rep = representative(&c, &e, &FamilyLabel::plain(Series::S, k)).unwrap();
        assert_eq!(classify_tiny(&rep).unwrap(), FamilyLabel::plain(Series::S, k));
    }
}
