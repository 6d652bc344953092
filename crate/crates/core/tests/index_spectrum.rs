mod common;

use proptest::prelude::*;
use unirec::alpha::{intermediate_spectrum, AlphaClass, AlphaSequence};
use unirec::index_set::{dyadic_block, hyperbolic_cross, hyperbolic_cross_cardinality, IndexOrdering, IndexSet, MultiIndex};
use unirec::spectrum::{SpectrumSequence, TailRule, WeightRule};
use unirec::RkhsSpec;

use common::{brute_cross_count, loglog_slope};

fn mi(v: &[i64]) -> MultiIndex {
    MultiIndex::new(v.to_vec())
}

#[test]
fn hyperbolic_cross_small_cases() {
    let s = hyperbolic_cross(2, 1).unwrap();
    assert_eq!(s.len(), 7);
    let mut comps: Vec<i64> = s.iter().map(|k| k.components()[0]).collect();
    comps.sort();
    assert_eq!(comps, (-3..=3).collect::<Vec<_>>());
    assert_eq!(hyperbolic_cross(2, 2).unwrap().len(), 33);
    assert_eq!(brute_cross_count(2, 2), 33);
}

#[test]
fn hyperbolic_cross_matches_enumeration_and_growth() {
    let mut ratios = Vec::new();
    for l in 1..=10u32 {
        let set = hyperbolic_cross(l, 2).unwrap();
        let brute = brute_cross_count(l, 2);
        assert_eq!(set.len(), brute, "level {l}");
        assert_eq!(hyperbolic_cross_cardinality(l, 2), brute as u128);
        ratios.push(brute as f64 / ((1u64 << l) as f64 * l as f64));
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(hi / lo < 4.0, "ratio band {lo}..{hi}");
}

#[test]
fn dyadic_blocks_small_cases() {
    let b0 = dyadic_block(&[0]).unwrap();
    assert_eq!(b0.indices(), &[mi(&[0])]);
    let mut b1: Vec<i64> = dyadic_block(&[1]).unwrap().iter().map(|k| k.components()[0]).collect();
    b1.sort();
    assert_eq!(b1, vec![-1, 1]);
    let b11 = dyadic_block(&[1, 1]).unwrap();
    assert_eq!(b11.len(), 4);
    for k in b11.iter() {
        assert!(k.components().iter().all(|c| c.abs() == 1));
    }
}

#[test]
fn dyadic_blocks_partition_the_cross_in_one_dimension() {
    assert!(hyperbolic_cross(0, 1).unwrap().is_empty());
    for l in 1..8u32 {
        let mut union: Vec<MultiIndex> = (0..=l).flat_map(|s| dyadic_block(&[s]).unwrap().into_indices()).collect();
        union.sort_by_key(|k| k.components()[0]);
        let mut cross = hyperbolic_cross(l, 1).unwrap().into_indices();
        cross.sort_by_key(|k| k.components()[0]);
        assert_eq!(union, cross);
    }
}

#[test]
fn weight_values_and_rearrangement() {
    let rule = WeightRule::sobolev_mixed(1.0, 2).unwrap();
    assert_eq!(rule.weight_value(&mi(&[1, 2])).unwrap(), 6.0);
    for s in [0.75, 1.0, 2.5] {
        let r = WeightRule::sobolev_mixed(s, 3).unwrap();
        assert_eq!(r.weight_value(&mi(&[0, 0, 0])).unwrap(), 1.0);
    }
    let leg = WeightRule::legendre_sobolev(2.0).unwrap();
    assert_eq!(leg.weight_flat(1).unwrap(), 1.0);

    let set = IndexSet::new(1, (-2..=2).map(|k| mi(&[k])).collect(), IndexOrdering::Custom).unwrap();
    let sp = SpectrumSequence::rearrange(&WeightRule::sobolev_mixed(1.0, 1).unwrap(), &set).unwrap();
    let expect = [1.0, 0.5, 0.5, 1.0 / 3.0, 1.0 / 3.0];
    for (a, b) in sp.values().iter().zip(expect) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn invalid_classes_are_rejected() {
    assert!(WeightRule::sobolev_mixed(0.5, 1).is_err());
    assert!(WeightRule::legendre_sobolev(0.8).is_err());
    assert!(AlphaSequence::new(AlphaClass::Wiener { r: 0.4 }, 1).is_err());
    assert!(AlphaSequence::new(AlphaClass::Korobov { r: 1.0 }, 2).is_err());
}

#[test]
fn geometric_tail_and_gelfand_floor() {
    let values: Vec<f64> = (1..=10).map(|k| 0.5f64.powi(k)).collect();
    let sp = SpectrumSequence::from_values(values, TailRule::Geometric { c: 1.0, q: 0.5 }, "geometric").unwrap();
    for m in [0usize, 1, 2, 5, 9, 10, 14] {
        let t = sp.tail_sum(m).unwrap().total();
        let exact = 0.25f64.powi(m as i32) / 3.0;
        assert!((t - exact).abs() <= 1e-15 * exact.max(1e-300) * 10.0, "m = {m}: {t} vs {exact}");
    }
    let g = sp.gelfand_lower(2, 1.0).unwrap();
    assert!((g - 1.0 / (4.0 * 3f64.sqrt())).abs() < 1e-15);

    let single = SpectrumSequence::from_values(vec![1.0], TailRule::Finite, "unit").unwrap();
    assert_eq!(single.gelfand_lower(1, 1.0).unwrap(), 0.0);

    let missing = SpectrumSequence::from_values(vec![1.0, 0.5], TailRule::Missing, "bare").unwrap();
    assert!(missing.tail_sum(1).is_err());
}

#[test]
fn trig_total_matches_kernel_diagonal() {
    let spec = RkhsSpec::sobolev_mixed(1.0, 1, 256).unwrap();
    let total = spec.tail_sum(0).unwrap().total();
    let direct = 1.0 + 2.0 * (std::f64::consts::PI.powi(2) / 6.0 - 1.0);
    assert!((total - direct).abs() < 1e-13);
    let lat = spec.lattice().expect("lattice kernel");
    assert!((lat.diag() - total).abs() <= lat.eval_error() + 1e-13);
}

#[test]
fn legendre_tail_slopes() {
    let spec = RkhsSpec::legendre_sobolev(2.0, 4096).unwrap();
    let ms = [16usize, 32, 64, 128, 256, 512];
    let tails: Vec<f64> = ms.iter().map(|&m| spec.tail_sum(m).unwrap().total()).collect();
    let diag: Vec<f64> = ms.iter().map(|&m| spec.tail_kernel_diag(m, &[1.0], 4096).unwrap().total()).collect();
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let slope_tail = loglog_slope(&xs, &tails);
    let slope_diag = loglog_slope(&xs, &diag);
    assert!((slope_tail + 3.0).abs() < 0.15, "tail slope {slope_tail}");
    assert!((slope_diag + 2.0).abs() < 0.15, "diagonal slope {slope_diag}");
}

#[test]
fn alpha_examples() {
    for d in 1..=3 {
        let w = AlphaSequence::new(AlphaClass::Wiener { r: 1.0 }, d).unwrap();
        assert!((w.alpha_value(3).unwrap() - 0.125).abs() < 1e-15);
    }
    let k = AlphaSequence::new(AlphaClass::Korobov { r: 2.0 }, 2).unwrap();
    assert!((k.alpha_value(4).unwrap() - 1.0 / 32.0).abs() < 1e-15);
    let h = AlphaSequence::new(AlphaClass::NikolskiiBesov { r: 1.5, p: 2.0 }, 1).unwrap();
    for l in 0..10 {
        assert!((h.alpha_raw(l).unwrap() - 2f64.powf(-1.5 * l as f64)).abs() < 1e-15);
    }
    let ones = AlphaSequence::new(AlphaClass::Table { values: vec![1.0; 16] }, 1).unwrap();
    let s4 = intermediate_spectrum(&ones, 4).unwrap();
    assert!((s4 * s4 - 0.5).abs() < 1e-15);
}

#[test]
fn alpha_values_are_non_increasing() {
    for class in [
        AlphaClass::Korobov { r: 1.2 },
        AlphaClass::NikolskiiBesov { r: 0.8, p: 1.5 },
        AlphaClass::Wiener { r: 0.6 },
    ] {
        let a = AlphaSequence::new(class, 3).unwrap();
        let vals: Vec<f64> = (0..2000).map(|m| a.alpha_at(m).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cross_is_nested_and_enumerated(l in 0u32..7, d in 1usize..4) {
        let small = hyperbolic_cross(l, d).unwrap();
        let big = hyperbolic_cross(l + 1, d).unwrap();
        prop_assert_eq!(small.len(), brute_cross_count(l, d));
        prop_assert!(small.iter().all(|k| big.contains(k)));
        prop_assert!(small.is_prefix_of(&big));
    }

    #[test]
    fn dyadic_blocks_are_disjoint(a in prop::collection::vec(0u32..4, 2), b in prop::collection::vec(0u32..4, 2)) {
        prop_assume!(a != b);
        let ba = dyadic_block(&a).unwrap();
        let bb = dyadic_block(&b).unwrap();
        prop_assert!(ba.iter().all(|k| !bb.contains(k)));
    }

    #[test]
    fn spectra_are_monotone_with_consistent_tails(s in 0.6f64..3.0, d in 1usize..3, m in 0usize..200) {
        let sp = SpectrumSequence::from_rule(&WeightRule::sobolev_mixed(s, d).unwrap(), 256).unwrap();
        prop_assert!(sp.values().windows(2).all(|w| w[1] <= w[0]));
        let a = sp.tail_sum(m).unwrap().total();
        let b = sp.tail_sum(m + 1).unwrap().total();
        let sig = sp.sigma(m + 1).unwrap();
        prop_assert!((a - b - sig * sig).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn legendre_tail_remainder_dominates(s in 1.1f64..3.0, m in 1usize..100) {
        let short = SpectrumSequence::from_rule(&WeightRule::legendre_sobolev(s).unwrap(), 128).unwrap();
        let long = SpectrumSequence::from_rule(&WeightRule::legendre_sobolev(s).unwrap(), 8192).unwrap();
        let t_short = short.tail_sum(m).unwrap();
        let t_long = long.tail_sum(m).unwrap();
        prop_assert!(t_short.total() >= t_long.value * (1.0 - 1e-12));
    }
}
