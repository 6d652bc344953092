//! Special functions: Hurwitz zeta, certified power sums and Gauss-Legendre quadrature.

/// Bernoulli numbers B_2, B_4, ..., B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Euler-Maclaurin correction sum_{j} B_{2j}/(2j)! * (p)_{2j-1} * x^{-p-2j+1}.
///
/// This is the correction for the tail sum_{k >= x} k^{-p}; `(p)_n` is the rising factorial.
fn em_correction(p: f64, x: f64) -> f64 {
    let mut total = 0.0;
    // rising factorial (p)_{2j-1} and (2j)!
    let mut rising = p;
    let mut fact = 2.0;
    let mut xpow = x.powf(-p - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * xpow;
        total += term;
        if term.abs() < 1e-18 * total.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let n = 2.0 * j as f64 + 1.0;
        rising *= (p + n) * (p + n + 1.0);
        fact *= (n + 2.0) * (n + 3.0);
        xpow /= x * x;
    }
    total
}

/// Hurwitz zeta function zeta(s, a) = sum_{j >= 0} (a + j)^{-s} for s > 1 and a > 0.
///
/// Direct summation of the first terms is followed by an Euler-Maclaurin tail; the
/// shift keeps the asymptotic expansion well inside its convergence regime, so the
/// relative error is at the level of double rounding.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta needs s > 1 and a > 0");
    let shift = (12.0 + s).ceil() as usize;
    let mut head = 0.0;
    for j in (0..shift).rev() {
        head += (a + j as f64).powf(-s);
    }
    let x = a + shift as f64;
    let tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s) + em_correction(s, x);
    head + tail
}

/// Riemann zeta function for s > 1.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// Finite power sum sum_{k=a}^{b} k^{-p} for 1 <= a <= b and any real p.
///
/// Short ranges are summed directly; long ranges use Euler-Maclaurin at both ends.
pub fn power_sum(a: u64, b: u64, p: f64) -> f64 {
    assert!(a >= 1, "power_sum needs a >= 1");
    if b < a {
        return 0.0;
    }
    if p == 0.0 {
        return (b - a + 1) as f64;
    }
    if b - a < 4096 {
        let mut s = 0.0;
        for k in (a..=b).rev() {
            s += (k as f64).powf(-p);
        }
        return s;
    }
    // sum_{k=a}^{a+31} directly, then the smooth remainder from A = a + 32.
    let mut head = 0.0;
    for k in (a..a + 32).rev() {
        head += (k as f64).powf(-p);
    }
    let lo = (a + 32) as f64;
    let hi = b as f64;
    let integral = if (p - 1.0).abs() < 1e-15 {
        (hi / lo).ln()
    } else {
        (hi.powf(1.0 - p) - lo.powf(1.0 - p)) / (1.0 - p)
    };
    let ends = 0.5 * (lo.powf(-p) + hi.powf(-p));
    // f^{(2j-1)}(x) = -(p)_{2j-1} x^{-p-2j+1}; the correction is sum B/(2j)! (f'(hi) - f'(lo)).
    let corr = em_correction(p, lo) - em_correction(p, hi);
    head + integral + ends + corr
}

/// Infinite power tail sum_{k >= a} k^{-p} for p > 1 and a >= 1.
pub fn power_tail(a: u64, p: f64) -> f64 {
    hurwitz_zeta(p, a as f64)
}

/// Gauss-Legendre nodes and weights on [-1, 1] with `n` points (exact for degree 2n - 1).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs n >= 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root.
        let theta = std::f64::consts::PI * (4.0 * i as f64 + 3.0) / (4.0 * nf + 2.0);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Classical Legendre polynomial P_n(x) and its derivative.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_known_values() {
        let pi = std::f64::consts::PI;
        assert!((zeta(2.0) - pi * pi / 6.0).abs() < 1e-14);
        assert!((zeta(4.0) - pi.powi(4) / 90.0).abs() < 1e-14);
        // zeta(2, 1/2) = (2^2 - 1) zeta(2)
        assert!((hurwitz_zeta(2.0, 0.5) - 3.0 * pi * pi / 6.0).abs() < 1e-13);
    }

    #[test]
    fn power_sums_match_direct() {
        for &p in &[0.5, 1.0, 1.5, 3.0] {
            let direct: f64 = (7..=20000u64).rev().map(|k| (k as f64).powf(-p)).sum();
            let fast = power_sum(7, 20000, p);
            assert!((direct - fast).abs() < 1e-11 * direct, "p={p}: {direct} vs {fast}");
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((m - 2.0 / 13.0).abs() < 1e-14);
    }
}
