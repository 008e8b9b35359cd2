//! Sampling laws against brute-force enumeration of ordered draws.

use std::collections::BTreeMap;

use definetti_core::suite::urn_grid;
use definetti_core::urn::{
    hypergeom_composition, hypergeom_sequence, multinom_composition, multinom_sequence, to_sequence_level,
    DrawComposition, UrnComposition,
};
use definetti_core::ExactRational;

/// Composition counts over every ordered draw of `k` labelled balls,
/// without (`replace = false`) or with replacement.
fn brute_force(urn: &UrnComposition, k: u64, replace: bool) -> BTreeMap<Vec<u64>, u64> {
    let balls: Vec<usize> = urn
        .counts()
        .iter()
        .enumerate()
        .flat_map(|(j, &l)| std::iter::repeat_n(j, l as usize))
        .collect();
    let mut out = BTreeMap::new();
    let mut used = vec![false; balls.len()];
    let mut counts = vec![0u64; urn.colours()];
    fn rec(
        depth: u64,
        k: u64,
        replace: bool,
        balls: &[usize],
        used: &mut [bool],
        counts: &mut [u64],
        out: &mut BTreeMap<Vec<u64>, u64>,
    ) {
        if depth == k {
            *out.entry(counts.to_vec()).or_insert(0) += 1;
            return;
        }
        for i in 0..balls.len() {
            if !replace && used[i] {
                continue;
            }
            used[i] = true;
            counts[balls[i]] += 1;
            rec(depth + 1, k, replace, balls, used, counts, out);
            counts[balls[i]] -= 1;
            used[i] = false;
        }
    }
    rec(0, k, replace, &balls, &mut used, &mut counts, &mut out);
    out
}

fn normalize(counts: BTreeMap<Vec<u64>, u64>) -> BTreeMap<DrawComposition, ExactRational> {
    let total: u64 = counts.values().sum();
    counts
        .into_iter()
        .map(|(s, m)| (DrawComposition::new(s), ExactRational::ratio(m as i64, total as i64)))
        .collect()
}

#[test]
fn composition_laws_match_ordered_draws() {
    for urn in urn_grid(3, 7) {
        for k in 1..=urn.size() {
            let h = hypergeom_composition(&urn, k).unwrap();
            let got: BTreeMap<_, _> = h.iter().map(|(s, p)| (s.clone(), p.clone())).collect();
            assert_eq!(got, normalize(brute_force(&urn, k, false)), "H for {urn:?}, k={k}");

            let b = multinom_composition(&urn, k).unwrap();
            let got: BTreeMap<_, _> = b.iter().map(|(s, p)| (s.clone(), p.clone())).collect();
            assert_eq!(got, normalize(brute_force(&urn, k, true)), "B for {urn:?}, k={k}");
        }
    }
}

#[test]
fn supports_and_normalization() {
    for urn in urn_grid(3, 8) {
        for k in 0..=urn.size() {
            let h = hypergeom_composition(&urn, k).unwrap();
            let b = multinom_composition(&urn, k).unwrap();
            for (s, _) in h.iter() {
                assert!(s.counts().iter().zip(urn.counts()).all(|(sj, lj)| sj <= lj));
            }
            for (s, _) in b.iter() {
                assert!(s.counts().iter().zip(urn.counts()).all(|(&sj, &lj)| sj == 0 || lj > 0));
            }
            let one = ExactRational::one();
            assert_eq!(h.iter().map(|(_, p)| p.clone()).sum::<ExactRational>(), one);
            assert_eq!(b.iter().map(|(_, p)| p.clone()).sum::<ExactRational>(), one);
        }
    }
}

#[test]
fn single_draw_laws_coincide() {
    for urn in urn_grid(4, 6) {
        assert_eq!(
            hypergeom_composition(&urn, 1).unwrap(),
            multinom_composition(&urn, 1).unwrap()
        );
    }
}

#[test]
fn falling_factorial_route_matches_relabelling() {
    for urn in urn_grid(3, 8) {
        for k in 0..=urn.size() {
            let direct = hypergeom_sequence(&urn, k).unwrap();
            let relabelled = to_sequence_level(&hypergeom_composition(&urn, k).unwrap());
            assert_eq!(direct, relabelled, "{urn:?}, k={k}");
            let direct = multinom_sequence(&urn, k).unwrap();
            let relabelled = to_sequence_level(&multinom_composition(&urn, k).unwrap());
            assert_eq!(direct, relabelled, "{urn:?}, k={k}");
        }
    }
}

#[test]
fn draws_beyond_the_urn_are_rejected() {
    let urn = UrnComposition::new(vec![2, 1]).unwrap();
    assert!(hypergeom_composition(&urn, 4).is_err());
    assert!(multinom_composition(&urn, 4).is_ok());
}
