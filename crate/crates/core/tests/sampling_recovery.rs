mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unirec::basis::Points;
use unirec::harness::operator_checks;
use unirec::lift::{random_test_functions, verify_lift};
use unirec::recovery::{fit_wls, Approximant};
use unirec::sampling::{draw_samples, plan_for, sample_count, stream_id, SamplePlan, SamplingDensity};
use unirec::{Error, RecoveryOperator, RkhsSpec, Weighting, C64};

use common::golub_welsch;

fn trig_spec() -> RkhsSpec {
    RkhsSpec::sobolev_mixed(1.0, 1, 4096).unwrap()
}

fn legendre_spec() -> RkhsSpec {
    RkhsSpec::legendre_sobolev(2.0, 4096).unwrap()
}

#[test]
fn trig_density_is_identically_one() {
    let spec = trig_spec();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in [4usize, 16, 64] {
        let dens = SamplingDensity::new(&spec, m, None).unwrap();
        for _ in 0..100 {
            let x = 2.0 * PI * rng.random::<f64>();
            assert!((dens.eval(&[x]).unwrap() - 1.0).abs() < 1e-12);
        }
    }
    let d2 = RkhsSpec::sobolev_mixed(1.0, 2, 4096).unwrap();
    let dens = SamplingDensity::new(&d2, 33, None).unwrap();
    for _ in 0..100 {
        let x = [2.0 * PI * rng.random::<f64>(), 2.0 * PI * rng.random::<f64>()];
        assert!((dens.eval(&x).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn legendre_density_integrates_to_one_and_respects_the_floor() {
    let spec = legendre_spec();
    let (nodes, weights) = golub_welsch(1024);
    for m in [4usize, 8, 32, 64] {
        let dens = SamplingDensity::new(&spec, m, None).unwrap();
        assert!(dens.truncation() < 1000);
        let integral: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * dens.eval(&[*x]).unwrap()).sum();
        assert!((integral - 1.0).abs() < 1e-6, "m = {m}: {integral}");
        for i in 0..10_000 {
            let x = -1.0 + 2.0 * i as f64 / 9_999.0;
            assert!(dens.eval(&[x]).unwrap() >= 1.0 / 6.0 - 1e-12);
        }
        let peak = dens.eval(&[1.0]).unwrap();
        assert!(peak <= dens.sup_bound() * (1.0 + 1e-12));
    }
}

#[test]
fn empty_middle_term_rebalances_weights() {
    let spec = legendre_spec();
    let dens = SamplingDensity::new(&spec, 8, Some(8)).unwrap();
    let norm = dens.normalization();
    assert!(norm.middle_dropped);
    assert_eq!((norm.head_weight, norm.uniform_weight), (0.5, 0.5));
    let (nodes, weights) = golub_welsch(64);
    let integral: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * dens.eval(&[*x]).unwrap()).sum();
    assert!((integral - 1.0).abs() < 1e-12);
}

#[test]
fn sample_counts() {
    assert_eq!(sample_count(1, 4.0).unwrap(), 3);
    assert_eq!(sample_count(16, 4.0).unwrap(), (4.0 * 16.0 * 17f64.ln()).ceil() as usize);
    for m in 1..200 {
        assert!(sample_count(m, 0.1).unwrap() >= m);
    }
}

#[test]
fn plans_are_deterministic_and_streams_differ() {
    let spec = legendre_spec();
    let a = plan_for(&spec, 16, 4.0, 11, stream_id(0, 0)).unwrap();
    let b = plan_for(&spec, 16, 4.0, 11, stream_id(0, 0)).unwrap();
    let c = plan_for(&spec, 16, 4.0, 11, stream_id(0, 1)).unwrap();
    assert_eq!(a.points.coords(), b.points.coords());
    assert_eq!(a.to_csv(), b.to_csv());
    assert_ne!(a.points.coords(), c.points.coords());
    assert_eq!(a.weights().len(), a.n);
}

#[test]
fn trig_samples_pass_a_uniformity_test() {
    let spec = trig_spec();
    let dens = SamplingDensity::new(&spec, 16, None).unwrap();
    let n = 4000;
    let plan = draw_samples(&dens, n, 5, 0, Some(16)).unwrap();
    let mut u: Vec<f64> = plan.points.iter().map(|x| x[0] / (2.0 * PI)).collect();
    u.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut d: f64 = 0.0;
    for (i, v) in u.iter().enumerate() {
        d = d.max((v - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - v).abs());
    }
    // 1% critical value of the Kolmogorov-Smirnov statistic.
    assert!(d < 1.63 / (n as f64).sqrt(), "KS distance {d}");
    assert_eq!(plan.acceptance_rate, 1.0);
}

#[test]
fn legendre_samples_follow_the_density() {
    let spec = legendre_spec();
    let dens = SamplingDensity::new(&spec, 8, None).unwrap();
    let n = 20_000;
    let plan = draw_samples(&dens, n, 9, 0, None).unwrap();
    assert!(plan.acceptance_rate > 1e-4 && plan.acceptance_rate <= 1.0);
    let bins = 20;
    let mut counts = vec![0usize; bins];
    for x in plan.points.iter() {
        let b = (((x[0] + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let (gn, gw) = golub_welsch(200);
    let mut chi2 = 0.0;
    for (b, &count) in counts.iter().enumerate() {
        let lo = -1.0 + 2.0 * b as f64 / bins as f64;
        let h = 2.0 / bins as f64;
        let p: f64 = gn
            .iter()
            .zip(&gw)
            .map(|(t, w)| 0.5 * h * w * dens.eval(&[lo + 0.5 * h * (t + 1.0)]).unwrap())
            .sum();
        let expect = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((count as f64 - expect).abs() < 4.0 * sd, "bin {b}: {count} vs {expect:.1}");
        chi2 += (count as f64 - expect).powi(2) / expect;
    }
    // 99.9% quantile of chi-square with 19 degrees of freedom.
    assert!(chi2 < 43.82, "chi-square {chi2}");
}

fn unit(m: usize, j: usize) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); m];
    e[j] = C64::new(1.0, 0.0);
    e
}

#[test]
fn wls_reproduces_basis_functions() {
    for spec in [trig_spec(), legendre_spec()] {
        let m = 16;
        let plan = plan_for(&spec, m, 4.0, 21, 0).unwrap();
        let op = RecoveryOperator::build(spec.basis(), m, &plan, Weighting::Weighted).unwrap();
        for j in 0..m {
            let vals: Vec<C64> = plan.points.iter().map(|x| spec.basis().eval(j + 1, x).unwrap()).collect();
            let c = op.apply(&vals).unwrap();
            let e = unit(m, j);
            for (a, b) in c.iter().zip(&e) {
                assert!((a - b).norm() < 1e-10);
            }
        }
        let c = fit_wls(spec.basis(), m, &plan, &vec![C64::new(1.0, 0.0); plan.n], Weighting::Unweighted).unwrap();
        assert!(c.iter().all(|v| v.re.is_finite()));
    }
}

fn equispaced_plan(m: usize) -> SamplePlan {
    let coords: Vec<f64> = (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).collect();
    SamplePlan {
        points: Points::new(1, coords).unwrap(),
        density: vec![1.0; m],
        seed: 0,
        m,
        big_m: m,
        n: m,
        oversampling: None,
        lattice: None,
        acceptance_rate: 1.0,
    }
}

#[test]
fn square_systems_interpolate() {
    let spec = trig_spec();
    let m = 9;
    let plan = equispaced_plan(m);
    let op = RecoveryOperator::build(spec.basis(), m, &plan, Weighting::Weighted).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let vals: Vec<C64> = (0..m).map(|_| C64::new(rng.random(), rng.random())).collect();
    let c = op.apply(&vals).unwrap();
    for (i, x) in plan.points.iter().enumerate() {
        assert!((op.eval_coeffs(&c, x).unwrap() - vals[i]).norm() < 1e-9);
        let phi = op.cardinal_functions(x).unwrap();
        for (j, p) in phi.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((p - C64::new(target, 0.0)).norm() < 1e-8);
        }
    }
}

#[test]
fn cardinal_functions_reproduce_the_subspace() {
    let spec = legendre_spec();
    let m = 12;
    let plan = plan_for(&spec, m, 4.0, 2, 0).unwrap();
    let op = RecoveryOperator::build(spec.basis(), m, &plan, Weighting::Weighted).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let x = [2.0 * rng.random::<f64>() - 1.0];
        let phi = op.cardinal_functions(&x).unwrap();
        for j in 1..=m {
            let s: C64 = plan.points.iter().zip(&phi).map(|(xi, p)| spec.basis().eval(j, xi).unwrap() * p).sum();
            assert!((s - spec.basis().eval(j, &x).unwrap()).norm() < 1e-8);
        }
    }
}

#[test]
fn too_few_samples_are_rejected() {
    let spec = trig_spec();
    let plan = equispaced_plan(5);
    assert!(RecoveryOperator::build(spec.basis(), 9, &plan, Weighting::Weighted).is_err());
    let mut dup = equispaced_plan(9);
    dup.points = Points::new(1, vec![0.5; 9]).unwrap();
    match RecoveryOperator::build(spec.basis(), 9, &dup, Weighting::Weighted) {
        Err(e @ Error::RankDeficient { .. }) => assert_eq!(e.exit_code(), 3),
        other => panic!("expected rank deficiency, got {other:?}"),
    }
}

#[test]
fn perturbed_operator_fails_wls_checks_but_not_the_lift() {
    let spec = trig_spec();
    let m = 16;
    let plan = plan_for(&spec, m, 4.0, 4, 0).unwrap();
    let op = RecoveryOperator::build(spec.basis(), m, &plan, Weighting::Weighted).unwrap();
    assert!(operator_checks(&op, 1, 0).unwrap().iter().all(|c| c.passed));
    let bad = op.perturbed(0.05, 3);
    assert!(bad.idempotence_defect().unwrap() > 1e-6);
    let checks = operator_checks(&bad, 1, 0).unwrap();
    assert!(checks.iter().all(|c| !c.passed), "{checks:?}");
    let grid = unirec::grid::GridSpec::default_for(1).points(spec.basis().space()).unwrap();
    let fns = random_test_functions(20, 4 * m, 6);
    let ledger = verify_lift(&Approximant::Sampled(&bad), &spec, m, &fns, &grid).unwrap();
    assert_eq!(ledger.violations, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn wls_is_exact_on_the_subspace(m in 2usize..40, seed in 0u64..1000, legendre in any::<bool>()) {
        let spec = if legendre { legendre_spec() } else { trig_spec() };
        let plan = plan_for(&spec, m, 3.0, seed, 0).unwrap();
        let op = RecoveryOperator::build(spec.basis(), m, &plan, Weighting::Weighted).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
        let coeffs: Vec<C64> = (0..m).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let vals: Vec<C64> = plan.points.iter().map(|x| unirec::recovery::eval_expansion(spec.basis(), &coeffs, x).unwrap()).collect();
        let c = op.apply(&vals).unwrap();
        for (a, b) in c.iter().zip(&coeffs) {
            prop_assert!((a - b).norm() < 1e-9);
        }
        prop_assert!(op.idempotence_defect().unwrap() < 1e-9);
    }

    #[test]
    fn densities_stay_above_the_floor(m in 1usize..64, x in -1.0f64..1.0) {
        let spec = legendre_spec();
        let dens = SamplingDensity::new(&spec, m, None).unwrap();
        let v = dens.eval(&[x]).unwrap();
        prop_assert!(v >= 1.0 / 6.0 - 1e-12 && v <= dens.sup_bound() * (1.0 + 1e-12));
    }
}
