//! Self-contained reference evaluators used to cross-check the production
//! numerics. Everything here is deliberately written from first principles
//! (series, recurrences, bisection, brute-force quadrature) and must stay
//! independent of the implementations it audits.

/// erf(x) from its Maclaurin series (|x| <= 2, where alternating-term
/// cancellation stays near one ulp) or the complement's Laplace continued
/// fraction (|x| > 2).
pub fn erf_series(x: f64) -> f64 {
    if x < 0.0 {
        return -erf_series(-x);
    }
    if x > 2.0 {
        return 1.0 - erfc_continued_fraction(x);
    }
    // erf(x) = 2/sqrt(pi) * sum_k (-1)^k x^(2k+1) / (k! (2k+1))
    let mut term = x;
    let mut sum = x;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= -x * x / k as f64;
        let add = term / (2 * k + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs().max(1e-300) || k > 400 {
            break;
        }
    }
    sum * std::f64::consts::FRAC_2_SQRT_PI
}

/// erfc(x) for x > 0 via the classical continued fraction
/// erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + 1/2/(x + 2/2/(x + 3/2/(x + ...)))),
/// evaluated bottom-up with a fixed depth that converges for x > 3.
pub fn erfc_continued_fraction(x: f64) -> f64 {
    let mut f = 0.0;
    for m in (1..=300u32).rev() {
        f = 0.5 * m as f64 / (x + f);
    }
    (-x * x).exp() / ((x + f) * std::f64::consts::PI.sqrt())
}

/// Standard normal CDF built only on the oracle erf.
pub fn std_normal_cdf_oracle(x: f64) -> f64 {
    0.5 + 0.5 * erf_series(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Quantile by bisection on a supplied CDF. The bracket [-40, 40] covers
/// every p representable away from 0 and 1 in f64.
pub fn quantile_by_bisection(cdf: impl Fn(f64) -> f64, p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "bisection oracle needs p in (0,1)");
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// log Gamma via Stirling's expansion with Bernoulli corrections, shifting
/// the argument above 20 with the recurrence first.
pub fn log_gamma_stirling(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut shift = 0.0;
    let mut y = x;
    while y < 20.0 {
        shift -= y.ln();
        y += 1.0;
    }
    // B_2/(2*1) = 1/12, B_4/(4*3) = -1/360, ...
    const COEF: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
    ];
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    let mut s = (y - 0.5) * y.ln() - y + 0.5 * ln2pi;
    let y2 = y * y;
    let mut pw = y;
    for c in COEF {
        s += c / pw;
        pw *= y2;
    }
    s + shift
}

/// log I_nu(x) by direct summation of the ascending series
/// I_nu(x) = sum_k (x/2)^(nu+2k) / (k! Gamma(nu+k+1)),
/// carried out in the log domain with compensated accumulation so arguments
/// far beyond f64 overflow stay representable.
pub fn log_bessel_i_series_oracle(nu: f64, x: f64) -> f64 {
    assert!(nu >= 0.0 && x > 0.0);
    let lh = (0.5 * x).ln();
    // Peak term index; pad generously on both sides.
    let peak = 0.5 * (((nu + 1.0) * (nu + 1.0) + x * x).sqrt() - (nu + 1.0));
    let kmax = (peak + 12.0 * (peak + 10.0).sqrt() + 40.0).ceil() as usize;
    let mut logs = Vec::with_capacity(kmax + 1);
    let mut max_log = f64::NEG_INFINITY;
    for k in 0..=kmax {
        let kf = k as f64;
        let lt = (nu + 2.0 * kf) * lh - log_gamma_stirling(kf + 1.0) - log_gamma_stirling(nu + kf + 1.0);
        if lt > max_log {
            max_log = lt;
        }
        logs.push(lt);
    }
    // Kahan-compensated sum of the rescaled positive terms.
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for lt in logs {
        let t = (lt - max_log).exp();
        let y = t - c;
        let s = sum + y;
        c = (s - sum) - y;
        sum = s;
    }
    max_log + sum.ln()
}

/// Gauss-Hermite nodes and weights for integrals against exp(-t^2) dt.
///
/// Newton iteration on the orthonormal Hermite recurrence; weights from the
/// Christoffel function 1/sum_k p_k(x)^2. Nodes are exact for polynomials of
/// degree <= 2n-1.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let mut x = 0.0f64;
    for i in 0..m {
        // Initial guesses from Numerical Recipes' gauher.
        x = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => x - 1.14 * (n as f64).powf(0.426) / x,
            2 => 1.86 * x - 0.86 * nodes[0],
            3 => 1.91 * x - 0.91 * nodes[1],
            _ => 2.0 * x - nodes[i - 2],
        };
        for _ in 0..100 {
            let (p, dp) = orthonormal_hermite(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        let w = 1.0 / christoffel_hermite(n, x);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[m - 1] = 0.0;
        weights[m - 1] = 1.0 / christoffel_hermite(n, 0.0);
    }
    (nodes, weights)
}

/// (p_n(x), p_n'(x)) for Hermite polynomials orthonormal w.r.t. exp(-x^2) dx.
fn orthonormal_hermite(n: usize, x: f64) -> (f64, f64) {
    let mut pm = 0.0f64;
    let mut p = std::f64::consts::PI.powf(-0.25);
    for k in 0..n {
        let kf = k as f64;
        let pn = x * (2.0 / (kf + 1.0)).sqrt() * p - (kf / (kf + 1.0)).sqrt() * pm;
        pm = p;
        p = pn;
    }
    let dp = (2.0 * n as f64).sqrt() * pm;
    (p, dp)
}

fn christoffel_hermite(n: usize, x: f64) -> f64 {
    let mut pm = 0.0f64;
    let mut p = std::f64::consts::PI.powf(-0.25);
    let mut s = p * p;
    for k in 0..n - 1 {
        let kf = k as f64;
        let pn = x * (2.0 / (kf + 1.0)).sqrt() * p - (kf / (kf + 1.0)).sqrt() * pm;
        pm = p;
        p = pn;
        s += p * p;
    }
    s
}

/// Expectation of `f` under N(mean, variance) by Gauss-Hermite quadrature.
pub fn gauss_hermite_expectation(f: impl Fn(f64) -> f64, mean: f64, variance: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_hermite(n);
    let scale = (2.0 * variance).sqrt();
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    nodes
        .iter()
        .zip(&weights)
        .map(|(&t, &w)| w * f(mean + scale * t))
        .sum::<f64>()
        * inv_sqrt_pi
}

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F1(x) - F2(x)|.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let xa = a[i];
        let xb = b[j];
        let x = xa.min(xb);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Critical value of the two-sample KS statistic at significance `alpha`
/// from the asymptotic Kolmogorov distribution.
pub fn ks_two_sample_critical(n1: usize, n2: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n1 + n2) as f64 / (n1 as f64 * n2 as f64)).sqrt()
}

/// Integral of exp(log_f) over [a, b] by composite Simpson with `panels`
/// even subdivisions, rescaled by the max log so huge magnitudes survive.
pub fn simpson_log_integral(log_f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 2 && b > a);
    let n = panels + (panels % 2); // even
    let h = (b - a) / n as f64;
    let logs: Vec<f64> = (0..=n).map(|i| log_f(a + i as f64 * h)).collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return 0.0;
    }
    let mut s = 0.0;
    for (i, lf) in logs.iter().enumerate() {
        let coef = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s += coef * (lf - m).exp();
    }
    m.exp() * s * h / 3.0
}

/// Least-squares slope of y against x together with the slope's standard
/// error estimated from the residual scatter.
pub fn ls_slope_with_se(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert!(x.len() == y.len() && x.len() >= 3);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(u, v)| {
            let r = v - (intercept + slope * u);
            r * r
        })
        .sum();
    let se = (ss_res / (n - 2.0) / sxx).sqrt();
    (slope, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erf_matches_tabulated_values() {
        // Abramowitz & Stegun 7.1: erf(1) = 0.8427007929497149, erf(2) = 0.9953222650189527.
        assert!((erf_series(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erf_series(2.0) - 0.995_322_265_018_952_7).abs() < 1e-15);
        assert!((erf_series(-1.0) + erf_series(1.0)).abs() < 1e-16);
        // Continued-fraction side: erfc(2) = 1 - erf(2) = 4.677734981047266e-3,
        // and the two branches must agree across the switch point.
        assert!(((erfc_continued_fraction(2.0) - 4.677_734_981_047_266e-3) / 4.68e-3).abs() < 1e-13);
        assert!((erf_series(2.0) - (1.0 - erfc_continued_fraction(2.0))).abs() < 1e-15);
    }

    #[test]
    fn erfc_tail_is_accurate() {
        // erfc(5) = 1.5374597944280349e-12 (A&S / DLMF 7.2).
        let e5 = erfc_continued_fraction(5.0);
        assert!((e5 - 1.537_459_794_428_034_9e-12).abs() / 1.54e-12 < 1e-10);
    }

    #[test]
    fn stirling_log_gamma_recurrence_and_known_points() {
        assert!(log_gamma_stirling(1.0).abs() < 1e-13);
        assert!((log_gamma_stirling(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-13);
        for &x in &[0.3, 1.7, 4.2, 9.9, 33.0] {
            let lhs = log_gamma_stirling(x + 1.0);
            let rhs = log_gamma_stirling(x) + x.ln();
            assert!((lhs - rhs).abs() < 1e-12, "recurrence at {x}");
        }
    }

    #[test]
    fn bessel_series_small_order_reference_points() {
        // I_0(1) = 1.2660658777520082, I_1(2) = 1.590636854637329 (DLMF tables).
        assert!((log_bessel_i_series_oracle(0.0, 1.0) - 1.266_065_877_752_008_2f64.ln()).abs() < 1e-12);
        assert!((log_bessel_i_series_oracle(1.0, 2.0) - 1.590_636_854_637_329f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gauss_hermite_moments() {
        // Against exp(-t^2): integral of 1 is sqrt(pi), of t^2 is sqrt(pi)/2,
        // of t^4 is 3 sqrt(pi)/4.
        let (x, w) = gauss_hermite(32);
        let sp = std::f64::consts::PI.sqrt();
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(t, w)| w * t * t).sum();
        let m4: f64 = x.iter().zip(&w).map(|(t, w)| w * t.powi(4)).sum();
        assert!((m0 - sp).abs() < 1e-12);
        assert!((m2 - sp / 2.0).abs() < 1e-12);
        assert!((m4 - 3.0 * sp / 4.0).abs() < 1e-11);
    }

    #[test]
    fn simpson_recovers_gaussian_mass() {
        let total = simpson_log_integral(
            |x| -0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln(),
            -10.0,
            10.0,
            400,
        );
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ks_statistic_on_disjoint_samples_is_one() {
        let mut a = vec![0.0, 1.0, 2.0];
        let mut b = vec![10.0, 11.0];
        assert!((ks_two_sample(&mut a, &mut b) - 1.0).abs() < 1e-15);
    }
}
