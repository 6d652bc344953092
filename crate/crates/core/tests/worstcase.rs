use nalgebra::DMatrix;
use unirec::alpha::{AlphaClass, AlphaSequence};
use unirec::grid::{GridSpec, Refinement};
use unirec::lift::{verify_lift, TestFunction};
use unirec::recovery::Approximant;
use unirec::sampling::plan_for;
use unirec::worstcase::{
    worst_case_l2, worst_case_linf, worst_case_lp_bound, ErrorReport, NormKind, WorstCaseOptions,
};
use unirec::{RecoveryOperator, RkhsSpec, Weighting, C64};

fn opts() -> WorstCaseOptions {
    WorstCaseOptions::default()
}

fn wls(spec: &RkhsSpec, m: usize, seed: u64) -> RecoveryOperator {
    let plan = plan_for(spec, m, 4.0, seed, 0).unwrap();
    RecoveryOperator::build(spec.basis(), m, &plan, Weighting::Weighted).unwrap()
}

#[test]
fn projection_and_zero_in_l2() {
    for spec in [
        RkhsSpec::sobolev_mixed(1.0, 1, 4096).unwrap(),
        RkhsSpec::legendre_sobolev(2.0, 4096).unwrap(),
    ] {
        for m in [4usize, 8, 16, 32] {
            let r = worst_case_l2(&Approximant::Projection { m }, &spec, &opts()).unwrap();
            let s = spec.sigma(m + 1).unwrap();
            assert!((r.value - s).abs() < 1e-9 && (r.upper() - s).abs() < 1e-9, "m = {m}: {r:?}");
        }
        let z = worst_case_l2(&Approximant::Zero, &spec, &opts()).unwrap();
        assert!((z.value - spec.sigma(1).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn projection_and_zero_in_linf() {
    let spec = RkhsSpec::sobolev_mixed(1.0, 1, 4096).unwrap();
    let grid = GridSpec::default_for(1);
    for m in [0usize, 4, 8, 16, 32] {
        let approx = if m == 0 { Approximant::Zero } else { Approximant::Projection { m } };
        let r = worst_case_linf(&approx, &spec, &grid, &opts()).unwrap();
        let exact = spec.tail_sum(m).unwrap().total().sqrt();
        assert!(r.value <= exact + 1e-12 && exact <= r.upper() + 1e-12, "m = {m}: {r:?} vs {exact}");
        assert!(r.certified && r.certificate < 0.01 * r.value);
    }
    let leg = RkhsSpec::legendre_sobolev(2.0, 4096).unwrap();
    let z = worst_case_linf(&Approximant::Zero, &leg, &grid, &opts()).unwrap();
    // sup_x K(x, x) sits at x = 1 where b_k(1)^2 = (2k - 1)/2.
    let direct: f64 = (1..=200_000u64)
        .map(|k| {
            let kf = k as f64;
            (2.0 * kf - 1.0) / 2.0 / (1.0 + ((kf - 1.0) * kf).powi(2))
        })
        .sum();
    let direct = direct.sqrt();
    assert!(z.value <= direct + 1e-9 && direct <= z.upper() + 1e-9, "{z:?} vs {direct}");
}

/// Error coefficients of f = sum c_k sigma_k b_k: diag(sigma) - [G B(X) diag(sigma); 0].
fn dense_error_matrix(spec: &RkhsSpec, op: &RecoveryOperator) -> DMatrix<C64> {
    let n_total = spec.max_index();
    let b = spec.basis().design_matrix(op.points(), n_total).unwrap();
    let gb = op.map() * b;
    let mut e = DMatrix::<C64>::zeros(n_total, n_total);
    for j in 0..n_total {
        let s = spec.sigma(j + 1).unwrap();
        e[(j, j)] += C64::new(s, 0.0);
        for i in 0..op.m() {
            e[(i, j)] -= gb[(i, j)] * s;
        }
    }
    e
}

fn dense_pointwise(spec: &RkhsSpec, op: &RecoveryOperator, x: &[f64]) -> f64 {
    let n_total = spec.max_index();
    let phi = op.cardinal_functions(x).unwrap();
    let bx = spec.basis().eval_prefix(x, n_total).unwrap();
    let mut acc = 0.0;
    for k in 0..n_total {
        let mut v = bx[k];
        for (i, xi) in op.points().iter().enumerate() {
            v -= phi[i] * spec.basis().eval(k + 1, xi).unwrap();
        }
        acc += spec.sigma(k + 1).unwrap().powi(2) * v.norm_sqr();
    }
    acc.sqrt()
}

#[test]
fn finite_spectrum_matches_dense_oracle() {
    let alpha = AlphaSequence::new(AlphaClass::Wiener { r: 1.0 }, 1).unwrap();
    let spec = RkhsSpec::intermediate(&alpha, 192).unwrap();
    let op = wls(&spec, 16, 12);
    let approx = Approximant::Sampled(&op);
    let l2 = worst_case_l2(&approx, &spec, &opts()).unwrap();
    let e = dense_error_matrix(&spec, &op);
    let oracle = e.singular_values().max();
    assert!((l2.value - oracle).abs() < 1e-9 * oracle && l2.upper() >= oracle - 1e-12, "{l2:?} vs {oracle}");

    let grid = GridSpec::new(256, Refinement::Local { factor: 16 }).unwrap();
    let linf = worst_case_linf(&approx, &spec, &grid, &opts()).unwrap();
    let at_arg = dense_pointwise(&spec, &op, &linf.grid.as_ref().unwrap().argmax);
    assert!((linf.value - at_arg).abs() < 1e-9 * at_arg, "{} vs {at_arg}", linf.value);
    let coarse = GridSpec::new(256, Refinement::None).unwrap().points(spec.basis().space()).unwrap();
    let coarse_max = coarse.iter().map(|x| dense_pointwise(&spec, &op, x)).fold(0.0, f64::max);
    assert!(coarse_max <= linf.value + 1e-12);
}

#[test]
fn lattice_and_coefficient_routes_agree() {
    let spec = RkhsSpec::sobolev_mixed(2.0, 1, 4096).unwrap();
    let bare = RkhsSpec::new(spec.basis().clone(), spec.spectrum().clone(), "no-lattice").unwrap();
    assert!(bare.lattice().is_none());
    let op = wls(&spec, 16, 7);
    let approx = Approximant::Sampled(&op);
    let grid = GridSpec::default_for(1);
    let a = worst_case_linf(&approx, &spec, &grid, &opts()).unwrap();
    let b = worst_case_linf(&approx, &bare, &grid, &opts()).unwrap();
    assert_ne!(a.method, b.method);
    assert!((a.value - b.value).abs() < 1e-6, "{} vs {}", a.value, b.value);
    assert!(a.upper() >= b.value - 1e-12 && b.upper() >= a.value - 1e-12);
}

#[test]
fn l2_is_below_linf() {
    for (spec, m) in [
        (RkhsSpec::sobolev_mixed(1.0, 1, 4096).unwrap(), 16usize),
        (RkhsSpec::legendre_sobolev(2.0, 4096).unwrap(), 16),
        (RkhsSpec::sobolev_mixed(1.0, 2, 4096).unwrap(), 16),
    ] {
        let op = wls(&spec, m, 1);
        let approx = Approximant::Sampled(&op);
        let l2 = worst_case_l2(&approx, &spec, &opts()).unwrap();
        let linf = worst_case_linf(&approx, &spec, &GridSpec::default_for(spec.dim()), &opts()).unwrap();
        assert!(l2.value <= spec.mass().sqrt() * linf.upper() + 1e-12);
        assert!(l2.upper() >= spec.sigma(m + 1).unwrap() - 1e-12);
        assert!(linf.upper() >= spec.gelfand_lower(m).unwrap() - 1e-9);
        assert!(l2.certified && linf.certified);
    }
}

#[test]
fn linf_grows_under_nested_refinement() {
    let spec = RkhsSpec::legendre_sobolev(2.0, 4096).unwrap();
    let op = wls(&spec, 8, 3);
    let approx = Approximant::Sampled(&op);
    let mut fixed = opts();
    fixed.truncation = Some(2048);
    let mut prev = 0.0;
    for per_axis in [65usize, 129, 257, 513, 1025] {
        let grid = GridSpec::new(per_axis, Refinement::None).unwrap();
        let r = worst_case_linf(&approx, &spec, &grid, &fixed).unwrap();
        assert!(r.value >= prev - 1e-14, "{per_axis}: {} < {prev}", r.value);
        prev = r.value;
    }
    let refined = worst_case_linf(&approx, &spec, &GridSpec::new(1025, Refinement::Local { factor: 16 }).unwrap(), &fixed).unwrap();
    assert!(refined.value >= prev - 1e-14);
}

fn report(norm: NormKind, value: f64) -> ErrorReport {
    ErrorReport {
        norm,
        value,
        certificate: 0.0,
        certified: true,
        method: "fixture".into(),
        truncation: None,
        grid: None,
        operator_id: "fixture".into(),
        range_dim: 1,
        weighting: None,
    }
}

#[test]
fn lp_interpolation_examples() {
    let l2 = report(NormKind::L2, 1e-2);
    let li = report(NormKind::Linf, 1e-1);
    assert!((worst_case_lp_bound(&l2, &li, 2.0).unwrap() - 1e-2).abs() < 1e-17);
    assert!((worst_case_lp_bound(&l2, &li, f64::INFINITY).unwrap() - 1e-1).abs() < 1e-16);
    assert!((worst_case_lp_bound(&l2, &li, 4.0).unwrap() - 10f64.powf(-1.5)).abs() < 1e-15);
    assert!(worst_case_lp_bound(&l2, &li, 1.0).is_err());
}

#[test]
fn lift_examples_for_the_projection() {
    let spec = RkhsSpec::sobolev_mixed(1.0, 1, 4096).unwrap();
    let m = 8;
    let grid = GridSpec::default_for(1).points(spec.basis().space()).unwrap();
    let mut inside = vec![C64::new(0.0, 0.0); m];
    inside[3] = C64::new(0.6, 0.0);
    inside[5] = C64::new(0.0, 0.8);
    let mut next = vec![C64::new(0.0, 0.0); m + 1];
    next[m] = C64::new(1.0, 0.0);
    let fns = vec![TestFunction { coeffs: inside }, TestFunction { coeffs: next }];
    let ledger = verify_lift(&Approximant::Projection { m }, &spec, m, &fns, &grid).unwrap();
    assert_eq!(ledger.violations, 0);
    assert!(ledger.entries[0].lhs < 1e-14 && ledger.entries[0].rhs < 1e-14);
    let s = spec.sigma(m + 1).unwrap();
    let e = &ledger.entries[1];
    assert!((e.lhs - s).abs() < 1e-12);
    let rhs = spec.tail_sum(m).unwrap().total().sqrt() + (m as f64).sqrt() * s;
    assert!((e.rhs - rhs).abs() < 1e-9 * rhs && e.margin > 0.0);
}
