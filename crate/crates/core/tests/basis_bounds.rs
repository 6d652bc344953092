mod common;

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use proptest::prelude::*;
use unirec::alpha::{AlphaClass, AlphaSequence};
use unirec::bounds::{bound_rhs, BoundInputs, BoundName};
use unirec::christoffel::{christoffel_exact, christoffel_grid, ChristoffelRule};
use unirec::grid::{GridSpec, Refinement};
use unirec::index_set::hyperbolic_cross;
use unirec::spectrum::{SpectrumSequence, TailRule};
use unirec::{BasisFamily, BasisSystem, RkhsSpec, C64};

use common::{golub_welsch, legendre_normalized};

#[test]
fn trig_basis_has_unit_modulus_and_is_orthonormal() {
    let set = hyperbolic_cross(3, 2).unwrap();
    let sys = BasisSystem::trigonometric_from_set(&set).unwrap();
    let n = sys.len();
    let max_freq = set.iter().map(|k| k.sup_norm()).max().unwrap() as usize;
    let per_axis = 2 * max_freq + 2;
    let mut gram = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..per_axis {
        for j in 0..per_axis {
            let x = [2.0 * PI * i as f64 / per_axis as f64, 2.0 * PI * j as f64 / per_axis as f64];
            let v = sys.eval_prefix(&x, n).unwrap();
            for a in 0..n {
                assert!((v[a].norm() - 1.0).abs() < 1e-14);
                for b in 0..n {
                    gram[a * n + b] += v[a] * v[b].conj();
                }
            }
        }
    }
    let w = 1.0 / (per_axis * per_axis) as f64;
    for a in 0..n {
        for b in 0..n {
            let target = if a == b { 1.0 } else { 0.0 };
            assert!((gram[a * n + b] * w - target).norm() < 1e-12);
        }
    }
}

#[test]
fn legendre_basis_matches_recurrence_and_is_orthonormal() {
    let n = 64;
    let sys = BasisSystem::legendre(n).unwrap();
    for x in [-1.0, -0.3, 0.0, 0.71, 1.0] {
        assert!((sys.eval(1, &[x]).unwrap().re - 1.0 / SQRT_2).abs() < 1e-15);
        let lib = sys.eval_prefix(&[x], n).unwrap();
        let oracle = legendre_normalized(x, n);
        for k in 0..n {
            assert!((lib[k].re - oracle[k]).abs() < 1e-11 * oracle[k].abs().max(1.0));
            assert_eq!(lib[k].im, 0.0);
        }
    }
    let (nodes, weights) = golub_welsch(n + 4);
    for a in 0..n {
        for b in 0..n {
            let mut acc = 0.0;
            for (x, w) in nodes.iter().zip(&weights) {
                acc += w * sys.eval(a + 1, &[*x]).unwrap().re * sys.eval(b + 1, &[*x]).unwrap().re;
            }
            let target = if a == b { 1.0 } else { 0.0 };
            assert!((acc - target).abs() < 1e-11, "({a}, {b}): {acc}");
        }
    }
}

#[test]
fn christoffel_closed_forms() {
    let spec = RkhsSpec::sobolev_mixed(1.0, 1, 64).unwrap();
    assert!((christoffel_exact(spec.basis(), 9).unwrap() - 3.0).abs() < 1e-15);
    let leg = BasisSystem::legendre(64).unwrap();
    assert!((christoffel_exact(&leg, 4).unwrap() - 2.0 * SQRT_2).abs() < 1e-15);
    let trig_rule = ChristoffelRule::for_family(BasisFamily::Trigonometric);
    let leg_rule = ChristoffelRule::for_family(BasisFamily::Legendre);
    assert!((trig_rule.value(16) - 4.0).abs() < 1e-15);
    assert!((leg_rule.value(6) - 6.0 / SQRT_2).abs() < 1e-14);
}

#[test]
fn christoffel_grid_examples() {
    let spec = RkhsSpec::sobolev_mixed(1.0, 1, 64).unwrap();
    let grid = GridSpec::new(1024, Refinement::Local { factor: 16 }).unwrap();
    let g5 = christoffel_grid(spec.basis(), 5, &grid).unwrap();
    assert!((g5.value - 5f64.sqrt()).abs() < 1e-9);
    let g1 = christoffel_grid(spec.basis(), 1, &grid).unwrap();
    assert!((g1.value - 1.0).abs() < 1e-12);
    let leg = BasisSystem::legendre(16).unwrap();
    let g6 = christoffel_grid(&leg, 6, &GridSpec::default_for(1)).unwrap();
    assert!((g6.value - 6.0 / SQRT_2).abs() < 1e-6);
    assert!((g6.argmax[0].abs() - 1.0).abs() < 1e-12);
}

#[test]
fn christoffel_grid_sweep_matches_closed_forms_quickly() {
    let start = Instant::now();
    let spec = RkhsSpec::sobolev_mixed(1.0, 1, 128).unwrap();
    let leg = BasisSystem::legendre(64).unwrap();
    let grid = GridSpec::default_for(1);
    for n in 1..=64 {
        let t = christoffel_grid(spec.basis(), n, &grid).unwrap().value;
        assert!((t - (n as f64).sqrt()).abs() < 1e-6, "trig n = {n}: {t}");
        let l = christoffel_grid(&leg, n, &grid).unwrap().value;
        assert!((l - n as f64 / SQRT_2).abs() < 1e-6, "legendre m = {n}: {l}");
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn trig_tail_kernel_diag_is_constant() {
    let spec = RkhsSpec::sobolev_mixed(1.0, 1, 1024).unwrap();
    for m in [0usize, 3, 10, 100] {
        let t = spec.tail_sum(m).unwrap().total();
        for x in [0.0, 1.0, 2.5, 6.0] {
            let d = spec.tail_kernel_diag(m, &[x], 1024).unwrap();
            assert!(d.value <= t + 1e-13 && t <= d.total() + 1e-13);
        }
    }
    let single = spec.tail_kernel_diag(1023, &[0.4], 1024).unwrap();
    let s = spec.sigma(1024).unwrap();
    assert!((single.value - s * s).abs() < 1e-18);
}

#[test]
fn tail_kernel_diag_obeys_dyadic_bound() {
    let trig = RkhsSpec::sobolev_mixed(1.0, 1, 2048).unwrap();
    let leg = RkhsSpec::legendre_sobolev(2.0, 2048).unwrap();
    for m in [8usize, 32, 128] {
        let start = m / 4;
        let trig_sum: f64 = (start + 1..=2048).map(|k| 2.0 * 4.0 * trig.sigma(k).unwrap().powi(2)).sum();
        let trig_slack = 8.0 * trig.tail_sum(2048).unwrap().total();
        let leg_sum: f64 = (start + 1..=2048).map(|k| 2.0 * 8.0 * k as f64 * leg.sigma(k).unwrap().powi(2)).sum();
        let leg_slack = 16.0 * (2048.0f64 - 1.0).powf(-2.0) * 2.0;
        for x in [-1.0, -0.5, 0.0, 0.9, 1.0] {
            let d = leg.tail_kernel_diag(m, &[x], 2048).unwrap();
            assert!(d.value <= leg_sum + leg_slack, "m = {m}, x = {x}");
            let y = 0.99 * std::f64::consts::PI * (x + 1.0);
            let t = trig.tail_kernel_diag(m, &[y], 2048).unwrap();
            assert!(t.value <= trig_sum + trig_slack);
        }
    }
}

#[test]
fn geometric_example_of_the_hilbert_bound() {
    let values: Vec<f64> = (1..=40).map(|k| 0.5f64.powi(k)).collect();
    let sp = SpectrumSequence::from_values(values, TailRule::Geometric { c: 1.0, q: 0.5 }, "geometric").unwrap();
    let mut inputs = BoundInputs::new(8, ChristoffelRule::for_family(BasisFamily::Trigonometric));
    inputs.spectrum = Some(&sp);
    let rep = bound_rhs(BoundName::Thm22, &inputs).unwrap();
    let tail4 = 0.25f64.powi(4) / 3.0;
    let tail2 = 0.25f64.powi(2) / 3.0;
    let oracle = (866.0 * tail4).sqrt() + (2.0 * 4.0 * tail2).sqrt();
    assert!((rep.value - oracle).abs() < 1e-12 * oracle, "{} vs {oracle}", rep.value);
    assert!((rep.recomputed() - rep.value).abs() < 1e-15);
}

#[test]
fn finite_alpha_bound_equals_direct_sum() {
    let values: Vec<f64> = (1..=50).map(|k| 1.0 / k as f64).collect();
    let al = AlphaSequence::new(AlphaClass::Table { values: values.clone() }, 1).unwrap();
    let mut inputs = BoundInputs::new(16, ChristoffelRule::for_family(BasisFamily::Trigonometric));
    inputs.alpha = Some(&al);
    let rep = bound_rhs(BoundName::Prop32, &inputs).unwrap();
    let direct: f64 = (5..=50).map(|k| values[k - 1] / (k as f64).sqrt()).sum::<f64>() * 70.0 / 4.0;
    assert!((rep.value - direct).abs() < 1e-12 * direct);
    assert_eq!(rep.truncation_remainder, 0.0);
}

/// alpha_k for the Wiener class in one dimension: 2^{-l} with |Omega_l| = 2^{l+1} - 1 <= k.
fn wiener_alpha_1d(k: u64) -> f64 {
    let mut l = 0;
    while (1u64 << (l + 2)) - 1 <= k {
        l += 1;
    }
    if k == 0 {
        return 1.0;
    }
    0.5f64.powi(l as i32)
}

#[test]
fn wiener_class_bound_matches_brute_force() {
    let al = AlphaSequence::new(AlphaClass::Wiener { r: 1.0 }, 1).unwrap();
    let m = 64usize;
    let mut inputs = BoundInputs::new(m, ChristoffelRule::for_family(BasisFamily::Trigonometric));
    inputs.alpha = Some(&al);
    let rep = bound_rhs(BoundName::Thm33, &inputs).unwrap();
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for k in (m as u64 / 4 + 1)..=1_000_000 {
        let a = wiener_alpha_1d(k);
        let kf = k as f64;
        s1 += 2.0 * a * (4.0 * kf).sqrt() / kf;
        s2 += a / kf.sqrt();
    }
    let oracle = s1 + 70.0 * s2;
    assert!(((rep.value - oracle) / oracle).abs() < 0.01, "{} vs {oracle}", rep.value);
    assert!(rep.value >= oracle);
}

#[test]
fn bounds_refuse_small_m_and_missing_inputs() {
    let inputs = BoundInputs::new(2, ChristoffelRule::for_family(BasisFamily::Trigonometric));
    assert!(bound_rhs(BoundName::Thm22, &inputs).is_err());
    let inputs = BoundInputs::new(8, ChristoffelRule::for_family(BasisFamily::Trigonometric));
    assert!(bound_rhs(BoundName::Thm22, &inputs).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn legendre_christoffel_square_is_attained_at_the_endpoint(n in 1usize..80) {
        let v = legendre_normalized(1.0, n);
        let sq: f64 = v.iter().map(|t| t * t).sum();
        prop_assert!((sq - (n * n) as f64 / 2.0).abs() < 1e-9 * (n * n) as f64);
        let leg = BasisSystem::legendre(n).unwrap();
        prop_assert!((christoffel_exact(&leg, n).unwrap().powi(2) - sq).abs() < 1e-9 * sq);
    }
}
